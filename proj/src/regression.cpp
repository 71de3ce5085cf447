#include "basisrisk/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "basisrisk/stats.hpp"

namespace basisrisk {

namespace {

// Overlapping (county_mean, field_yield) pairs, in year order.
void overlap_series(const FieldCropSeries& field, const CountySeries& county,
                    std::vector<double>& x, std::vector<double>& y) {
  x.clear();
  y.clear();
  std::size_t ci = 0;
  for (std::size_t fi = 0; fi < field.years.size(); ++fi) {
    while (ci < county.years.size() && county.years[ci] < field.years[fi]) ++ci;
    if (ci < county.years.size() && county.years[ci] == field.years[fi]) {
      x.push_back(county.mean_yields[ci]);
      y.push_back(field.yields[fi]);
    }
  }
}

}  // namespace

RegressionFit fit_field_regression(const FieldCropSeries& field,
                                   const CountySeries& county,
                                   int min_overlap) {
  std::vector<double> x, y;
  overlap_series(field, county, x, y);
  if (static_cast<int>(x.size()) < min_overlap)
    fail(ErrorKind::insufficient_data,
         "field '" + field.field_id + "': only " + std::to_string(x.size()) +
             " overlapping years with county '" + county.county_id + "' (need " +
             std::to_string(min_overlap) + ")");
  double vx = stats::variance(x);
  if (vx <= 0.0)
    fail(ErrorKind::degenerate,
         "county '" + county.county_id + "' constant over the overlap window");

  RegressionFit fit;
  fit.field_id = field.field_id;
  fit.county_id = field.county_id;
  fit.crop = field.crop;
  fit.n_obs = static_cast<int>(x.size());
  fit.field_mean = stats::mean(y);
  fit.field_var = stats::variance(y);
  fit.beta = stats::covariance(x, y) / vx;
  fit.alpha = fit.field_mean - fit.beta * stats::mean(x);

  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - fit.alpha - fit.beta * x[i];
    ss += e * e;
  }
  fit.sigma2_resid = ss / static_cast<double>(x.size());
  // r2 derived from the residual variance itself so the 1-R^2 identity is
  // exact by construction; constant fields get r2 = 0 by convention.
  fit.r2 = fit.field_var > 0.0
               ? std::clamp(1.0 - fit.sigma2_resid / fit.field_var, 0.0, 1.0)
               : 0.0;
  return fit;
}

double basis_risk(const RegressionFit& fit) {
  if (!(fit.field_var > 0.0))
    fail(ErrorKind::degenerate,
         "basis_risk: field '" + fit.field_id + "' has zero variance");
  return 1.0 - fit.r2;
}

double critical_beta(std::span<const double> county_indemnities,
                     const CountySeries& county) {
  if (county_indemnities.size() != county.mean_yields.size())
    fail(ErrorKind::validation, "critical_beta: indemnities not aligned with county years");
  double var_i = stats::variance(county_indemnities);
  if (!(var_i > 0.0))
    fail(ErrorKind::degenerate,
         "critical_beta: index never pays for county '" + county.county_id + "'");
  double cov = stats::covariance(county.mean_yields, county_indemnities);
  if (cov == 0.0)
    fail(ErrorKind::degenerate, "critical_beta: zero covariance between index and county");
  return -var_i / (2.0 * cov);
}

double variance_reduction(const RegressionFit& fit, const CountyStats& stats) {
  if (!std::isfinite(stats.critical_beta) || stats.critical_beta == 0.0)
    fail(ErrorKind::degenerate,
         "variance_reduction: critical beta degenerate for county '" +
             stats.county_id + "'");
  return stats.indemnity_var * (fit.beta / stats.critical_beta - 1.0);
}

double taylor_utility_gain(double delta, double mu, const PreferenceSpec& pref) {
  if (!(mu > 0.0)) fail(ErrorKind::domain, "taylor_utility_gain: mu must be positive");
  if (pref.kind != PreferenceKind::crra)
    fail(ErrorKind::domain,
         "taylor_utility_gain: needs a twice-differentiable utility (crra)");
  // -1/2 u''(mu) delta with u''(y) = -rho y^(-rho-1)
  return 0.5 * pref.rho * std::pow(mu, -pref.rho - 1.0) * delta;
}

CountyStats county_stats(const Panel& panel, const std::string& county_id,
                         Crop crop, std::span<const double> county_indemnities) {
  const CountySeries& county = panel.require_county(county_id, crop);

  // Field order is already normalized by id, which keeps the reductions
  // independent of any parallel fit order upstream.
  std::vector<double> field_means;
  double sum_var = 0.0, sum_cv = 0.0;
  for (const auto& f : panel.fields) {
    if (f.county_id != county_id || f.crop != crop) continue;
    double m = stats::mean(f.yields);
    double v = stats::variance(f.yields);
    field_means.push_back(m);
    sum_var += v;
    sum_cv += std::sqrt(v) / m;
  }
  if (field_means.size() < 2)
    fail(ErrorKind::insufficient_data,
         "county_stats: county '" + county_id + "' has fewer than 2 fields for " +
             crop_name(crop));

  CountyStats cs;
  cs.county_id = county_id;
  cs.crop = crop;
  cs.n_fields = static_cast<int>(field_means.size());
  cs.temporal_variability = sum_var / static_cast<double>(field_means.size());
  cs.temporal_cv = sum_cv / static_cast<double>(field_means.size());
  cs.spatial_variability = stats::variance(field_means);
  cs.indemnity_var = stats::variance(county_indemnities);
  try {
    cs.critical_beta = critical_beta(county_indemnities, county);
  } catch (const Error&) {
    // Index never pays (or zero covariance): mark rather than abort, so a
    // quiet county does not take the whole batch down.
    cs.critical_beta = std::numeric_limits<double>::quiet_NaN();
  }
  return cs;
}

}  // namespace basisrisk
