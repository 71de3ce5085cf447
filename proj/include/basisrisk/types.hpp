#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "basisrisk/errors.hpp"

namespace basisrisk {

enum class Crop { corn, soy };

inline const char* crop_name(Crop c) {
  return c == Crop::corn ? "corn" : "soy";
}

inline Crop parse_crop(std::string_view s) {
  if (s == "corn") return Crop::corn;
  if (s == "soy" || s == "soybean" || s == "soybeans") return Crop::soy;
  fail(ErrorKind::parse, "unknown crop '" + std::string(s) + "' (expected corn or soy)");
}

// Biophysical plausibility bounds, bu/acre. Simulated yields are truncated
// to these; observed data is validated against positivity only.
struct CropBounds {
  double lo;
  double hi;
};

inline CropBounds crop_bounds(Crop c) {
  return c == Crop::corn ? CropBounds{10.0, 350.0} : CropBounds{10.0, 100.0};
}

// One field-crop yield history. years and yields are parallel arrays,
// strictly increasing in year; gaps are allowed (rotation).
struct FieldCropSeries {
  std::string field_id;
  std::string county_id;
  Crop crop = Crop::corn;
  std::vector<int> years;
  std::vector<double> yields;

  std::size_t n_obs() const { return years.size(); }
};

// County average-yield series for one crop: the official index the area
// contract settles against. reference_* optionally carries an external
// detrended series (a stand-in for long official records) that simulation
// prefers over the panel-derived means.
struct CountySeries {
  std::string county_id;
  Crop crop = Crop::corn;
  std::vector<int> years;
  std::vector<double> mean_yields;
  double longrun_mean = 0.0;
  std::vector<int> reference_years;
  std::vector<double> reference_means;
};

enum class Provenance { ingested, synthetic, simulated };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::ingested: return "ingested";
    case Provenance::synthetic: return "synthetic";
    case Provenance::simulated: return "simulated";
  }
  return "unknown";
}

inline Provenance parse_provenance(std::string_view s) {
  if (s == "ingested") return Provenance::ingested;
  if (s == "synthetic") return Provenance::synthetic;
  if (s == "simulated") return Provenance::simulated;
  fail(ErrorKind::parse, "unknown provenance '" + std::string(s) + "'");
}

struct Panel {
  std::vector<FieldCropSeries> fields;   // sorted by (field_id, crop)
  std::vector<CountySeries> counties;    // sorted by (county_id, crop)
  Provenance provenance = Provenance::ingested;

  const CountySeries* find_county(std::string_view county_id, Crop crop) const;
  const CountySeries& require_county(std::string_view county_id, Crop crop) const;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// Controls the synthetic panel generator. Counties are laid out on a
// near-square lattice spanning temporal_sd_range x spatial_sd_range, so a
// generated panel always contains the full spread of both variability axes.
struct SyntheticConfig {
  int n_counties = 4;
  int fields_per_county = 50;
  int n_years = 30;
  Crop crop = Crop::corn;
  double crop_mean = 162.0;        // baseline mean yield, bu/acre
  double county_shock_sd = 14.0;   // sd of the common county factor
  Range temporal_sd_range{4.0, 12.0};  // per-county field noise sd
  Range spatial_sd_range{3.0, 12.0};   // per-county spread of field means
  Range beta_range{0.8, 1.2};          // field loading on the county factor
  std::uint64_t seed = 1;
};

}  // namespace basisrisk
