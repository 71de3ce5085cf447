#pragma once

#include <span>
#include <string>

#include "basisrisk/preferences.hpp"
#include "basisrisk/types.hpp"

namespace basisrisk {

// Per-field regression of field yields on the county average:
//   y_t = alpha + beta * countymean_t + eps_t
// over the overlapping observed years. The share of field variance the
// county index cannot explain (1 - R^2) is the field's basis risk.
struct RegressionFit {
  std::string field_id;
  std::string county_id;
  Crop crop = Crop::corn;
  double alpha = 0.0;
  double beta = 0.0;
  double sigma2_resid = 0.0;  // population residual variance
  double r2 = 0.0;
  double field_mean = 0.0;
  double field_var = 0.0;     // population variance over the overlap window
  int n_obs = 0;
};

struct CountyStats {
  std::string county_id;
  Crop crop = Crop::corn;
  int n_fields = 0;
  double temporal_variability = 0.0;  // mean over fields of field variance
  double temporal_cv = 0.0;           // mean over fields of sd/mean
  double spatial_variability = 0.0;   // variance of field means
  double critical_beta = 0.0;         // NaN when the index never pays
  double indemnity_var = 0.0;
};

// OLS on overlapping years; residual variance uses denominator n so that
// sigma2_resid / field_var == 1 - r2 holds exactly.
RegressionFit fit_field_regression(const FieldCropSeries& field,
                                   const CountySeries& county,
                                   int min_overlap = 8);

// Share of field variance the index cannot remove: 1 - R^2.
double basis_risk(const RegressionFit& fit);

// Threshold slope above which holding the area contract reduces a field's
// net-yield variance. Not stated in closed form by the usual treatments;
// derived from Var(y + I - pi) - Var(y) = Var(I) + 2 beta Cov(ybar, I) = 0:
//   beta~ = -Var(I) / (2 Cov(ybar, I)).
double critical_beta(std::span<const double> county_indemnities,
                     const CountySeries& county);

// Variance removed by the area contract: Delta = Var(I) (beta/beta~ - 1).
double variance_reduction(const RegressionFit& fit, const CountyStats& stats);

// Second-order utility gain from removing Delta of variance at mean mu:
//   -1/2 u''(mu) Delta, with u''(y) = -rho y^(-rho-1) for CRRA.
double taylor_utility_gain(double delta, double mu, const PreferenceSpec& pref);

CountyStats county_stats(const Panel& panel, const std::string& county_id,
                         Crop crop, std::span<const double> county_indemnities);

}  // namespace basisrisk
