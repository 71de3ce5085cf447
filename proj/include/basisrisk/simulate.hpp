#pragma once

#include <span>
#include <string>
#include <vector>

#include "basisrisk/regression.hpp"
#include "basisrisk/rng.hpp"
#include "basisrisk/types.hpp"

namespace basisrisk {

enum class SimSource { reference_means, ar2_extension };

inline const char* sim_source_name(SimSource s) {
  return s == SimSource::reference_means ? "reference_means" : "ar2_extension";
}

struct SimulationSpec {
  CropBounds corn_bounds{10.0, 350.0};
  CropBounds soy_bounds{10.0, 100.0};
  // 0 means "use the full base-series window"; otherwise the horizon length
  // (reference_means keeps the most recent n_years, ar2_extension simulates
  // exactly n_years).
  int n_years = 0;
  std::uint64_t seed = 1;
  SimSource source = SimSource::reference_means;

  CropBounds bounds_for(Crop c) const {
    return c == Crop::corn ? corn_bounds : soy_bounds;
  }
  void validate() const;
};

struct AR2Model {
  std::string county_id;
  double intercept = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
  std::vector<double> residuals;  // empirical innovation pool
  double last1 = 0.0;             // most recent level, seeds the recursion
  double last2 = 0.0;
  bool fallback_constant = false; // set when the series had ~zero variance
};

// Removes a linear trend by OLS on (year, mean) and re-centers the residuals
// at the fitted final-year level, so simulated series live at the current
// technology level. Applied to mean_yields; other fields pass through.
CountySeries detrend_county_series(const CountySeries& series);

// One truncated-normal draw per county-mean year, located at
// alpha + beta * mean_t with scale sqrt(sigma2_resid), truncated to the
// crop's bounds. Inverse-CDF truncation: exact, and consumes exactly one
// uniform per draw, which keeps parallel replays deterministic (rejection
// sampling would not).
std::vector<double> simulate_field_years(const RegressionFit& fit,
                                         std::span<const double> county_means,
                                         const SimulationSpec& spec, Rng& rng);

// OLS of y_t on (1, y_{t-1}, y_{t-2}); empirical residuals kept for the
// bootstrap. Near-constant series fall back to a constant process.
AR2Model fit_ar2(std::span<const double> series, const std::string& county_id = "");

// Recursive simulation seeded with the last two observed levels, innovations
// drawn uniformly from the residual pool, 50 burn-in steps discarded, output
// floored at floor_lo.
std::vector<double> simulate_county_series(const AR2Model& model, int n_years,
                                           Rng& rng, double floor_lo = 10.0);

// Whole-panel simulation: per county picks the simulation base series
// (reference_means when present, otherwise the detrended county means; or an
// AR(2) extension of that base), then simulates every field against it with
// a stream keyed by (seed, field_id, crop). Balanced output, provenance
// 'simulated'. fits must cover every field in the panel.
Panel simulate_panel(const Panel& panel, const std::vector<RegressionFit>& fits,
                     const SimulationSpec& spec, int workers = 1);

}  // namespace basisrisk
