#include "basisrisk/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "basisrisk/panel.hpp"
#include "basisrisk/parallel.hpp"
#include "basisrisk/stats.hpp"

namespace basisrisk {

void SimulationSpec::validate() const {
  auto check = [](const CropBounds& b, const char* which) {
    if (!(b.lo > 0.0) || !(b.lo < b.hi))
      fail(ErrorKind::config, std::string(which) + " bounds need 0 < lower < upper");
  };
  check(corn_bounds, "corn");
  check(soy_bounds, "soy");
  if (n_years != 0 && n_years < 8)
    fail(ErrorKind::config, "simulation n_years must be 0 (full window) or >= 8");
}

CountySeries detrend_county_series(const CountySeries& series) {
  std::size_t n = series.years.size();
  if (n < 8)
    fail(ErrorKind::insufficient_data,
         "detrend: county '" + series.county_id + "' has fewer than 8 years");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(series.years[i]);
  stats::LinearFit trend = stats::simple_ols(x, series.mean_yields);
  double final_level = trend.intercept + trend.slope * x.back();

  CountySeries out = series;
  for (std::size_t i = 0; i < n; ++i) {
    double resid = series.mean_yields[i] - (trend.intercept + trend.slope * x[i]);
    out.mean_yields[i] = final_level + resid;
    if (!(out.mean_yields[i] > 0.0))
      fail(ErrorKind::degenerate,
           "detrend: county '" + series.county_id +
               "' produced a nonpositive re-centered mean");
  }
  out.longrun_mean = stats::mean(out.mean_yields);
  return out;
}

std::vector<double> simulate_field_years(const RegressionFit& fit,
                                         std::span<const double> county_means,
                                         const SimulationSpec& spec, Rng& rng) {
  spec.validate();
  CropBounds b = spec.bounds_for(fit.crop);
  double sigma = std::sqrt(std::max(fit.sigma2_resid, 0.0));
  std::vector<double> out;
  out.reserve(county_means.size());
  for (double m : county_means) {
    double loc = fit.alpha + fit.beta * m;
    if (sigma == 0.0) {
      if (loc < b.lo || loc > b.hi)
        fail(ErrorKind::degenerate,
             "simulate: field '" + fit.field_id +
                 "' has zero residual scale and location outside crop bounds");
      out.push_back(loc);
      continue;
    }
    double u = rng.uniform01();
    double pa = stats::norm_cdf((b.lo - loc) / sigma);
    double pb = stats::norm_cdf((b.hi - loc) / sigma);
    if (!(pb > pa)) {
      // all mass numerically beyond one bound; collapse to the nearer bound
      out.push_back(loc < b.lo ? b.lo : b.hi);
      continue;
    }
    double p = pa + u * (pb - pa);
    p = std::clamp(p, 1e-300, 1.0 - 1e-16);
    double draw = loc + sigma * stats::norm_ppf(p);
    out.push_back(std::clamp(draw, b.lo, b.hi));
  }
  return out;
}

AR2Model fit_ar2(std::span<const double> series, const std::string& county_id) {
  std::size_t n = series.size();
  if (n < 8)
    fail(ErrorKind::insufficient_data, "fit_ar2: need at least 8 observations");

  AR2Model model;
  model.county_id = county_id;
  model.last1 = series[n - 1];
  model.last2 = series[n - 2];

  double m = stats::mean(series);
  double v = stats::variance(series);
  if (v < 1e-12 * m * m) {
    model.intercept = m;
    model.fallback_constant = true;
    model.residuals.assign(1, 0.0);
    return model;
  }

  // Normal equations for y_t on (1, y_{t-1}, y_{t-2}).
  double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double rhs[3] = {0, 0, 0};
  for (std::size_t t = 2; t < n; ++t) {
    double x1 = series[t - 1], x2 = series[t - 2], y = series[t];
    double row[3] = {1.0, x1, x2};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a[i][j] += row[i] * row[j];
      rhs[i] += row[i] * y;
    }
  }
  double coef[3];
  stats::solve3(a, rhs, coef);
  model.intercept = coef[0];
  model.phi1 = coef[1];
  model.phi2 = coef[2];
  for (std::size_t t = 2; t < n; ++t) {
    double pred = model.intercept + model.phi1 * series[t - 1] + model.phi2 * series[t - 2];
    model.residuals.push_back(series[t] - pred);
  }
  return model;
}

std::vector<double> simulate_county_series(const AR2Model& model, int n_years,
                                           Rng& rng, double floor_lo) {
  if (n_years < 1) fail(ErrorKind::config, "simulate_county_series: n_years must be >= 1");
  if (model.residuals.empty())
    fail(ErrorKind::validation, "simulate_county_series: empty residual pool");

  const int burn_in = 50;
  double prev1 = model.last1, prev2 = model.last2;
  std::vector<double> out;
  out.reserve(n_years);
  std::size_t pool = model.residuals.size();
  for (int step = 0; step < burn_in + n_years; ++step) {
    double u = rng.uniform01();
    std::size_t idx = std::min(static_cast<std::size_t>(u * static_cast<double>(pool)),
                               pool - 1);
    double y = model.intercept + model.phi1 * prev1 + model.phi2 * prev2 +
               model.residuals[idx];
    y = std::max(y, floor_lo);
    prev2 = prev1;
    prev1 = y;
    if (step >= burn_in) out.push_back(y);
  }
  return out;
}

Panel simulate_panel(const Panel& panel, const std::vector<RegressionFit>& fits,
                     const SimulationSpec& spec, int workers) {
  spec.validate();

  std::map<std::pair<std::string, int>, const RegressionFit*> fit_by_field;
  for (const auto& f : fits)
    fit_by_field[{f.field_id, static_cast<int>(f.crop)}] = &f;

  Panel out;
  out.provenance = Provenance::simulated;

  // Per-county simulation base at current technology level.
  for (const auto& county : panel.counties) {
    CountySeries base;
    base.county_id = county.county_id;
    base.crop = county.crop;
    if (!county.reference_means.empty()) {
      base.years = county.reference_years;
      base.mean_yields = county.reference_means;
    } else {
      base.years = county.years;
      base.mean_yields = county.mean_yields;
    }
    base.longrun_mean = stats::mean(base.mean_yields);
    CountySeries detrended = detrend_county_series(base);

    CountySeries sim;
    sim.county_id = county.county_id;
    sim.crop = county.crop;
    double floor_lo = spec.bounds_for(county.crop).lo;
    if (spec.source == SimSource::ar2_extension) {
      int horizon = spec.n_years == 0 ? static_cast<int>(detrended.years.size())
                                      : spec.n_years;
      AR2Model model = fit_ar2(detrended.mean_yields, county.county_id);
      Rng rng = stream_rng(spec.seed, "county-sim", county.county_id,
                           static_cast<std::uint64_t>(county.crop));
      sim.mean_yields = simulate_county_series(model, horizon, rng, floor_lo);
      int last_year = detrended.years.back();
      for (int t = 0; t < horizon; ++t) sim.years.push_back(last_year + 1 + t);
    } else {
      std::size_t n = detrended.years.size();
      std::size_t keep = n;
      if (spec.n_years != 0) {
        if (static_cast<std::size_t>(spec.n_years) > n)
          fail(ErrorKind::config,
               "simulate: county '" + county.county_id + "' base series has " +
                   std::to_string(n) + " years < requested " +
                   std::to_string(spec.n_years) + "; use ar2_extension");
        keep = static_cast<std::size_t>(spec.n_years);
      }
      sim.years.assign(detrended.years.end() - keep, detrended.years.end());
      sim.mean_yields.assign(detrended.mean_yields.end() - keep,
                             detrended.mean_yields.end());
    }
    sim.longrun_mean = stats::mean(sim.mean_yields);
    out.counties.push_back(std::move(sim));
  }

  out.fields.resize(panel.fields.size());
  parallel_for(panel.fields.size(), workers, [&](std::size_t i) {
    const FieldCropSeries& src = panel.fields[i];
    auto it = fit_by_field.find({src.field_id, static_cast<int>(src.crop)});
    if (it == fit_by_field.end())
      fail(ErrorKind::validation, "simulate: no regression fit for field '" +
                                      src.field_id + "' (" + crop_name(src.crop) + ")");
    const CountySeries& sim_county = out.require_county(src.county_id, src.crop);
    FieldCropSeries f;
    f.field_id = src.field_id;
    f.county_id = src.county_id;
    f.crop = src.crop;
    f.years = sim_county.years;
    Rng rng = stream_rng(spec.seed, "field-sim", src.field_id,
                         static_cast<std::uint64_t>(src.crop));
    f.yields = simulate_field_years(*it->second, sim_county.mean_yields, spec, rng);
    out.fields[i] = std::move(f);
  });

  validate_panel(out);
  return out;
}

}  // namespace basisrisk
