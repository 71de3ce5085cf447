#include "basisrisk/contracts.hpp"

#include <algorithm>
#include <cmath>

#include "basisrisk/stats.hpp"

namespace basisrisk {

std::vector<double> default_trigger_grid() {
  std::vector<double> grid;
  for (int p = 20; p <= 95; p += 5) grid.push_back(p / 100.0);
  return grid;
}

double require_grid_trigger(double trigger) {
  for (int p = 20; p <= 95; p += 5) {
    double g = p / 100.0;
    if (std::fabs(trigger - g) < 1e-9) return g;
  }
  fail(ErrorKind::config,
       "trigger " + std::to_string(trigger) + " not in the 0.20..0.95 grid");
}

SubsidySchedule SubsidySchedule::defaults(bool include_cat) {
  SubsidySchedule s;
  s.set(Scheme::farm, 0.50, 0.67);
  s.set(Scheme::farm, 0.55, 0.64);
  s.set(Scheme::farm, 0.60, 0.64);
  s.set(Scheme::farm, 0.65, 0.59);
  s.set(Scheme::farm, 0.70, 0.59);
  s.set(Scheme::farm, 0.75, 0.55);
  s.set(Scheme::farm, 0.80, 0.48);
  s.set(Scheme::farm, 0.85, 0.38);
  s.set(Scheme::area, 0.70, 0.59);
  s.set(Scheme::area, 0.75, 0.59);
  s.set(Scheme::area, 0.80, 0.55);
  s.set(Scheme::area, 0.85, 0.55);
  s.set(Scheme::area, 0.90, 0.51);
  if (include_cat) s.set(Scheme::farm, 0.50, 1.00);
  return s;
}

void SubsidySchedule::set(Scheme scheme, double trigger, double rate) {
  if (!(rate >= 0.0 && rate <= 1.0))
    fail(ErrorKind::config, "subsidy rate must lie in [0,1]");
  int key = static_cast<int>(std::lround(trigger * 100.0));
  for (auto& [k, r] : rates_)
    if (k.first == static_cast<int>(scheme) && k.second == key) {
      r = rate;
      return;
    }
  rates_.push_back({{static_cast<int>(scheme), key}, rate});
}

std::optional<double> SubsidySchedule::rate(Scheme scheme, double trigger) const {
  int key = static_cast<int>(std::lround(trigger * 100.0));
  for (const auto& [k, r] : rates_)
    if (k.first == static_cast<int>(scheme) && k.second == key) return r;
  return std::nullopt;
}

IndemnitySeries area_indemnity(const CountySeries& county, double trigger) {
  double tau = require_grid_trigger(trigger);
  IndemnitySeries out;
  out.years = county.years;
  out.indemnities.reserve(county.mean_yields.size());
  double target = tau * county.longrun_mean;
  for (double ybar : county.mean_yields)
    out.indemnities.push_back(std::max(target - ybar, 0.0));
  return out;
}

IndemnitySeries farm_indemnity(const FieldCropSeries& field, double trigger) {
  double tau = require_grid_trigger(trigger);
  IndemnitySeries out;
  out.years = field.years;
  out.indemnities.reserve(field.yields.size());
  double target = tau * stats::mean(field.yields);
  for (double y : field.yields) out.indemnities.push_back(std::max(target - y, 0.0));
  return out;
}

double fair_premium(const IndemnitySeries& ind) {
  if (ind.indemnities.empty())
    fail(ErrorKind::insufficient_data, "fair_premium: empty indemnity series");
  return stats::mean(ind.indemnities);
}

double subsidized_premium(double premium, Scheme scheme, double trigger,
                          const SubsidySchedule& schedule) {
  if (premium < 0.0) fail(ErrorKind::domain, "subsidized_premium: negative premium");
  auto r = schedule.rate(scheme, trigger);
  if (!r)
    fail(ErrorKind::not_offered,
         std::string(scheme_name(scheme)) + " plan at trigger " +
             std::to_string(trigger) + " is not offered with subsidy");
  return premium * (1.0 - *r);
}

std::vector<double> net_yield_series(std::span<const double> yields,
                                     std::span<const double> indemnities,
                                     double premium) {
  if (yields.size() != indemnities.size())
    fail(ErrorKind::validation, "net_yield_series: length mismatch");
  std::vector<double> net(yields.size());
  for (std::size_t i = 0; i < yields.size(); ++i) {
    net[i] = yields[i] + indemnities[i] - premium;
    if (!(net[i] > 0.0))
      fail(ErrorKind::domain, "net_yield_series: nonpositive outcome at index " +
                                  std::to_string(i));
  }
  return net;
}

}  // namespace basisrisk
