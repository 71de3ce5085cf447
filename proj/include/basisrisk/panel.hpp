#pragma once

#include <string>
#include <vector>

#include "basisrisk/types.hpp"

namespace basisrisk {

// Maps the canonical column names onto whatever the file calls them.
// Columns may appear in any order; extra columns are ignored.
struct ColumnSchema {
  std::string field_id = "field_id";
  std::string county_id = "county_id";
  std::string crop = "crop";
  std::string year = "year";
  std::string yield = "yield";
};

// Loads a yield panel from a delimited text file with a header row.
// If "<path minus .csv>.counties.csv" exists next to it, county series and
// provenance are restored from that sidecar; otherwise county means are
// recomputed from the fields and provenance is 'ingested'.
Panel load_panel(const std::string& path, const ColumnSchema& schema = {});

// Writes the panel in the same layout (observations file + county sidecar).
void save_panel(const Panel& panel, const std::string& path);

// Where the county sidecar for a panel file lives ("<stem>.counties.csv").
std::string panel_sidecar_path(const std::string& path);

// Structural invariants: parallel arrays, strictly increasing years,
// positive yields, positive county means, counties present for every field,
// and (for ingested panels) county means consistent with field averages.
void validate_panel(const Panel& panel);

// Drops field-crop series with fewer than min_years observations. For
// ingested panels county means are recomputed afterwards; official series
// (synthetic or simulated provenance) are kept as-is.
Panel filter_min_years(const Panel& panel, int min_years);

// Low-level generator: each county has a common factor series
//   g_ct = crop_mean + factor_sd * z_ct
// and fields follow y_it = alpha_i + beta_i * g_ct + eps_it with
// alpha_i = (1 - beta_i) * crop_mean + delta_i. County mean_yields store
// the factor series itself, playing the role of the official index.
struct CountyGenSpec {
  std::string county_id;
  double factor_sd = 14.0;      // sd of the county-wide factor
  double idio_sd = 8.0;         // per-field noise sd
  double mean_spread_sd = 6.0;  // sd of delta_i (spread of field means)
  Range beta_range{0.8, 1.2};
};

Panel generate_panel(const std::vector<CountyGenSpec>& counties, Crop crop,
                     double crop_mean, int fields_per_county, int n_years,
                     std::uint64_t seed);

// Lattice-driven generator per SyntheticConfig. Pure function of the config.
Panel generate_synthetic_panel(const SyntheticConfig& cfg);

// Four-county preset covering the corners of the (temporal, spatial)
// variability plane: quiet/tight, volatile/tight, quiet/patchy,
// volatile/patchy. Used by the reversal and sweep exercises.
Panel archetype_panel(int fields_per_county, int n_years, std::uint64_t seed,
                      Crop crop = Crop::corn, double crop_mean = 162.0);

}  // namespace basisrisk
