#include "basisrisk/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <optional>

#include "basisrisk/parallel.hpp"
#include "basisrisk/stats.hpp"

namespace basisrisk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string FarmEquiv::encode() const {
  switch (kind) {
    case FarmEquivKind::zero: return "ZERO";
    case FarmEquivKind::undefined: return "UNDEF:" + fmt_double(value);
    case FarmEquivKind::value: return "VALUE:" + fmt_double(value);
  }
  return "ZERO";
}

FarmEquiv FarmEquiv::decode(const std::string& s) {
  FarmEquiv fe;
  if (s == "ZERO") {
    fe.kind = FarmEquivKind::zero;
    return fe;
  }
  auto parse_tail = [&](std::size_t prefix) {
    const char* begin = s.c_str() + prefix;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
      fail(ErrorKind::parse, "bad farm_equiv encoding '" + s + "'");
    return v;
  };
  if (s.rfind("UNDEF:", 0) == 0) {
    fe.kind = FarmEquivKind::undefined;
    fe.value = parse_tail(6);
    return fe;
  }
  if (s.rfind("VALUE:", 0) == 0) {
    fe.kind = FarmEquivKind::value;
    fe.value = parse_tail(6);
    return fe;
  }
  fail(ErrorKind::parse, "bad farm_equiv encoding '" + s + "'");
}

bool farm_equiv_less(const FarmEquiv& a, const FarmEquiv& b) {
  auto tier = [](const FarmEquiv& fe) {
    switch (fe.kind) {
      case FarmEquivKind::zero: return 0;
      case FarmEquivKind::undefined: return 1;
      case FarmEquivKind::value: return 2;
    }
    return 0;
  };
  if (tier(a) != tier(b)) return tier(a) < tier(b);
  if (a.kind == FarmEquivKind::zero) return false;
  return a.value < b.value;
}

FarmEquiv farm_equivalent_coverage(double w_none, double w_area,
                                   std::span<const double> w_farm,
                                   std::span<const char> farm_has_payout,
                                   std::span<const double> grid,
                                   double min_rel_yield) {
  if (w_farm.size() != grid.size() || farm_has_payout.size() != grid.size())
    fail(ErrorKind::validation, "farm_equivalent_coverage: ragged inputs");
  FarmEquiv fe;
  if (w_area <= w_none) {
    fe.kind = FarmEquivKind::zero;
    return fe;
  }
  bool any_paying = std::any_of(farm_has_payout.begin(), farm_has_payout.end(),
                                [](char c) { return c != 0; });
  // Largest paying trigger the area plan strictly beats; zero-payout
  // triggers are vacuous relabelings of "no insurance" and are skipped,
  // unless nothing on the grid pays at all.
  for (std::size_t i = grid.size(); i-- > 0;) {
    if (any_paying && !farm_has_payout[i]) continue;
    if (w_area > w_farm[i]) {
      fe.kind = FarmEquivKind::value;
      fe.value = grid[i];
      return fe;
    }
  }
  fe.kind = FarmEquivKind::undefined;
  fe.value = min_rel_yield;
  return fe;
}

FarmEquiv farm_equivalent_coverage(const FieldEvaluation& eval,
                                   std::span<const double> grid) {
  return farm_equivalent_coverage(eval.w_none, eval.w_area, eval.w_farm,
                                  eval.farm_has_payout, grid, eval.min_rel_yield);
}

double fnp(const FieldCropSeries& field, const CountySeries& county,
           double theta_c, double theta_i) {
  std::size_t ci = 0;
  int below = 0, false_neg = 0;
  for (std::size_t fi = 0; fi < field.years.size(); ++fi) {
    while (ci < county.years.size() && county.years[ci] < field.years[fi]) ++ci;
    if (ci >= county.years.size() || county.years[ci] != field.years[fi]) continue;
    if (field.yields[fi] < theta_i) {
      ++below;
      if (county.mean_yields[ci] > theta_c) ++false_neg;
    }
  }
  if (below == 0)
    fail(ErrorKind::degenerate, "fnp: field '" + field.field_id +
                                    "' never fell below the loss threshold");
  return static_cast<double>(false_neg) / static_cast<double>(below);
}

namespace {

// county indemnities restricted to the field's observed years
std::vector<double> align_to_field(const FieldCropSeries& field,
                                   const CountySeries& county,
                                   const IndemnitySeries& ind) {
  std::vector<double> out;
  out.reserve(field.years.size());
  std::size_t ci = 0;
  for (int fy : field.years) {
    while (ci < ind.years.size() && ind.years[ci] < fy) ++ci;
    if (ci >= ind.years.size() || ind.years[ci] != fy)
      fail(ErrorKind::validation, "field '" + field.field_id + "': year " +
                                      std::to_string(fy) + " missing from county '" +
                                      county.county_id + "' index");
    out.push_back(ind.indemnities[ci]);
  }
  return out;
}

std::optional<std::vector<double>> nets_or_flag(std::span<const double> yields,
                                               std::span<const double> ind,
                                               double premium) {
  try {
    return net_yield_series(yields, ind, premium);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::domain) return std::nullopt;
    throw;
  }
}

double welfare(std::span<const double> net, double mean_uninsured, double premium,
               const PreferenceSpec& pref) {
  if (pref.kind == PreferenceKind::crra) {
    return certainty_equivalent(net, pref);
  }
  double ref = cpt_reference(mean_uninsured, premium, pref.reference_rule);
  return cpt_value(net, ref, pref.cpt);
}

}  // namespace

FieldEvaluation evaluate_field(const FieldCropSeries& field,
                               const CountySeries& county,
                               const ContractPlan& plan,
                               const PreferenceSpec& pref,
                               const EvaluateOptions& opts) {
  pref.validate();

  FieldEvaluation ev;
  ev.field_id = field.field_id;
  ev.county_id = field.county_id;
  ev.crop = field.crop;
  ev.pref_kind = pref.kind;
  ev.n_years = static_cast<int>(field.n_obs());
  ev.mean_yield = stats::mean(field.yields);
  double y_min = *std::min_element(field.yields.begin(), field.yields.end());
  ev.min_rel_yield = y_min / ev.mean_yield;
  ev.w_farm.assign(plan.farm_triggers.size(), kNaN);
  ev.farm_has_payout.assign(plan.farm_triggers.size(), 0);
  ev.rp_none = ev.rp_area = ev.rp_reduction = kNaN;
  ev.fnp = kNaN;

  auto flag = [&](const std::string& reason) {
    ev.flagged = true;
    ev.flag_reason = reason;
    ev.w_none = ev.w_area = kNaN;
    std::fill(ev.w_farm.begin(), ev.w_farm.end(), kNaN);
    return ev;
  };

  // Area plan, priced on the chosen fairness window.
  IndemnitySeries area_full = area_indemnity(county, plan.area_trigger);
  std::vector<double> area_ind = align_to_field(field, county, area_full);
  double area_fair_field = stats::mean(area_ind);
  double area_fair_county = fair_premium(area_full);
  double base_premium = plan.subsidy_base == PremiumBasis::county_fair
                            ? area_fair_county
                            : area_fair_field;
  if (plan.subsidized) {
    ev.premium_area = subsidized_premium(base_premium, Scheme::area,
                                         plan.area_trigger, plan.schedule);
  } else {
    ev.premium_area = plan.basis == PremiumBasis::county_fair ? area_fair_county
                                                              : area_fair_field;
  }

  auto none_net = nets_or_flag(field.yields, std::vector<double>(field.n_obs(), 0.0), 0.0);
  if (!none_net) return flag("nonpositive yield");
  auto area_net = nets_or_flag(field.yields, area_ind, ev.premium_area);
  if (!area_net) return flag("nonpositive net under area plan");

  ev.w_none = welfare(*none_net, ev.mean_yield, 0.0, pref);
  ev.w_area = welfare(*area_net, ev.mean_yield, ev.premium_area, pref);

  // Farm plans are priced on the field's own window; with subsidies, grid
  // triggers the schedule does not offer stay at the fair premium.
  for (std::size_t i = 0; i < plan.farm_triggers.size(); ++i) {
    double tau = plan.farm_triggers[i];
    IndemnitySeries find = farm_indemnity(field, tau);
    bool pays = std::any_of(find.indemnities.begin(), find.indemnities.end(),
                            [](double v) { return v > 0.0; });
    ev.farm_has_payout[i] = pays ? 1 : 0;
    double premium = fair_premium(find);
    if (plan.subsidized) {
      if (auto r = plan.schedule.rate(Scheme::farm, tau)) premium *= (1.0 - *r);
    }
    auto net = nets_or_flag(field.yields, find.indemnities, premium);
    if (!net) return flag("nonpositive net under farm plan");
    ev.w_farm[i] = welfare(*net, ev.mean_yield, premium, pref);
  }

  if (pref.kind == PreferenceKind::crra) {
    ev.rp_none = ev.mean_yield - ev.w_none;
    ev.rp_area = stats::mean(*area_net) - ev.w_area;
    if (ev.rp_none > 0.0) ev.rp_reduction = 1.0 - ev.rp_area / ev.rp_none;
  }

  ev.farm_equiv = farm_equivalent_coverage(ev.w_none, ev.w_area, ev.w_farm,
                                           ev.farm_has_payout, plan.farm_triggers,
                                           ev.min_rel_yield);

  try {
    ev.fnp = fnp(field, county, opts.fnp_county_frac * county.longrun_mean,
                 opts.fnp_field_frac * ev.mean_yield);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::degenerate) throw;
  }

  return ev;
}

double risk_premium_reduction(const FieldEvaluation& eval) {
  if (!(eval.rp_none > 0.0))
    fail(ErrorKind::degenerate, "risk_premium_reduction: field '" + eval.field_id +
                                    "' carries no risk");
  return 1.0 - eval.rp_area / eval.rp_none;
}

CountyAggregate aggregate_county(std::span<const FieldEvaluation> evals,
                                 const EvaluateOptions& opts) {
  if (evals.empty())
    fail(ErrorKind::insufficient_data, "aggregate_county: no evaluations");

  CountyAggregate agg;
  agg.county_id = evals.front().county_id;
  agg.crop = evals.front().crop;

  struct Entry {
    FarmEquiv fe;
    double weight;
    double gain;
    double rp_red;
  };
  std::vector<Entry> kept;
  for (const auto& ev : evals) {
    if (ev.county_id != agg.county_id || ev.crop != agg.crop)
      fail(ErrorKind::validation, "aggregate_county: mixed county/crop input");
    if (ev.flagged) {
      ++agg.n_flagged;
      continue;
    }
    Entry e;
    e.fe = ev.farm_equiv;
    e.weight = opts.weight_by_years ? static_cast<double>(ev.n_years) : 1.0;
    e.gain = ev.pref_kind == PreferenceKind::crra
                 ? 100.0 * (ev.w_area / ev.w_none - 1.0)
                 : ev.w_area - ev.w_none;
    e.rp_red = ev.rp_reduction;
    kept.push_back(e);
  }
  if (kept.empty())
    fail(ErrorKind::insufficient_data,
         "aggregate_county: county '" + agg.county_id + "' has no unflagged fields");
  agg.n_fields = static_cast<int>(kept.size());

  std::sort(kept.begin(), kept.end(),
            [](const Entry& a, const Entry& b) { return farm_equiv_less(a.fe, b.fe); });

  double total_w = 0.0;
  for (const auto& e : kept) total_w += e.weight;
  // lower weighted median: first entry whose cumulative weight covers half
  double cum = 0.0;
  for (const auto& e : kept) {
    cum += e.weight;
    if (2.0 * cum >= total_w) {
      agg.median_farm_equiv = e.fe;
      break;
    }
  }

  auto share_at = [&](double threshold) {
    double hit = 0.0;
    for (const auto& e : kept) {
      if (e.fe.kind != FarmEquivKind::value) continue;  // Zero/Undefined below any
      bool ok = opts.share_strict ? e.fe.value > threshold + 1e-9
                                  : e.fe.value >= threshold - 1e-9;
      if (ok) hit += e.weight;
    }
    return hit / total_w;
  };
  agg.share_ge_85 = share_at(0.85);
  agg.share_ge_50 = share_at(0.50);
  agg.share_ge_90 = share_at(0.90);

  double zero_w = 0.0, undef_w = 0.0, gain_sum = 0.0;
  double rp_sum = 0.0, rp_w = 0.0;
  for (const auto& e : kept) {
    if (e.fe.kind == FarmEquivKind::zero) zero_w += e.weight;
    if (e.fe.kind == FarmEquivKind::undefined) undef_w += e.weight;
    gain_sum += e.weight * e.gain;
    if (std::isfinite(e.rp_red)) {
      rp_sum += e.weight * e.rp_red;
      rp_w += e.weight;
    }
  }
  agg.share_zero = zero_w / total_w;
  agg.share_undefined = undef_w / total_w;
  agg.mean_gain_vs_none = gain_sum / total_w;
  agg.mean_rp_reduction = rp_w > 0.0 ? rp_sum / rp_w : kNaN;
  return agg;
}

std::vector<FieldEvaluation> evaluate_panel(const Panel& panel,
                                            const ContractPlan& plan,
                                            const PreferenceSpec& pref,
                                            const EvaluateOptions& opts,
                                            int workers) {
  pref.validate();
  for (double tau : plan.farm_triggers) require_grid_trigger(tau);
  require_grid_trigger(plan.area_trigger);

  std::vector<FieldEvaluation> evals(panel.fields.size());
  parallel_for(panel.fields.size(), workers, [&](std::size_t i) {
    const FieldCropSeries& f = panel.fields[i];
    const CountySeries& c = panel.require_county(f.county_id, f.crop);
    evals[i] = evaluate_field(f, c, plan, pref, opts);
  });
  return evals;
}

}  // namespace basisrisk
