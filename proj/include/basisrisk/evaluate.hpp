#pragma once

#include <span>
#include <string>
#include <vector>

#include "basisrisk/contracts.hpp"
#include "basisrisk/preferences.hpp"
#include "basisrisk/types.hpp"

namespace basisrisk {

// What gets compared per field: nothing, the area plan at area_trigger, and
// a farm plan at every grid trigger.
struct ContractPlan {
  std::vector<double> farm_triggers = default_trigger_grid();
  double area_trigger = 0.90;
  PremiumBasis basis = PremiumBasis::field_fair;
  bool subsidized = false;
  SubsidySchedule schedule = SubsidySchedule::defaults();
  // Subsidized pricing starts from the fair premium on this basis.
  PremiumBasis subsidy_base = PremiumBasis::field_fair;
};

enum class FarmEquivKind { value, zero, undefined };

// tau* outcome: a grid value, Zero (index no better than nothing), or
// Undefined with the interval's upper bound y_min/mean.
struct FarmEquiv {
  FarmEquivKind kind = FarmEquivKind::zero;
  double value = 0.0;

  std::string encode() const;
  static FarmEquiv decode(const std::string& s);
};

// Total order used for rank statistics: Zero < Undefined(u) < Value(tau),
// Undefined ordered by upper bound, Values by tau.
bool farm_equiv_less(const FarmEquiv& a, const FarmEquiv& b);

struct FieldEvaluation {
  std::string field_id;
  std::string county_id;
  Crop crop = Crop::corn;
  PreferenceKind pref_kind = PreferenceKind::crra;
  int n_years = 0;  // observed years the plans were priced on
  double mean_yield = 0.0;
  double min_rel_yield = 0.0;  // y_min / mean, Undefined's upper bound
  // Welfare per plan: certainty equivalents under CRRA, prospect values
  // under CPT. Comparisons only ever happen within one preference spec.
  double w_none = 0.0;
  double w_area = 0.0;
  std::vector<double> w_farm;           // parallel to plan.farm_triggers
  std::vector<char> farm_has_payout;    // indemnity series not identically 0
  double premium_area = 0.0;            // premium actually charged
  double rp_none = 0.0, rp_area = 0.0;  // NaN under cpt
  double rp_reduction = 0.0;            // NaN under cpt or riskless field
  FarmEquiv farm_equiv;
  double fnp = 0.0;  // NaN when the field never fell below its threshold
  bool flagged = false;
  std::string flag_reason;
};

struct CountyAggregate {
  std::string county_id;
  Crop crop = Crop::corn;
  int n_fields = 0;   // unflagged
  int n_flagged = 0;
  FarmEquiv median_farm_equiv;
  double share_ge_85 = 0.0;
  double share_ge_50 = 0.0;
  double share_ge_90 = 0.0;
  double share_zero = 0.0;
  double share_undefined = 0.0;
  // Percent CE gain of area over none under CRRA; mean welfare difference
  // under CPT (prospect values may legitimately be <= 0).
  double mean_gain_vs_none = 0.0;
  double mean_rp_reduction = 0.0;  // NaN under cpt
};

struct EvaluateOptions {
  double fnp_county_frac = 0.9;
  double fnp_field_frac = 0.9;
  bool share_strict = false;     // > instead of >= for the share thresholds
  bool weight_by_years = false;  // weight aggregates by observation count
};

// Prices every plan on the field's observed years (area premiums optionally
// on the full county window), evaluates welfare per plan, and derives the
// farm-equivalent coverage, risk premiums, and FNP. Nonpositive net outcomes
// flag the field instead of aborting the batch.
FieldEvaluation evaluate_field(const FieldCropSeries& field,
                               const CountySeries& county,
                               const ContractPlan& plan,
                               const PreferenceSpec& pref,
                               const EvaluateOptions& opts = {});

// 1 - rp_area/rp_none; errors when the field carries no risk.
double risk_premium_reduction(const FieldEvaluation& eval);

FarmEquiv farm_equivalent_coverage(double w_none, double w_area,
                                   std::span<const double> w_farm,
                                   std::span<const char> farm_has_payout,
                                   std::span<const double> grid,
                                   double min_rel_yield);
FarmEquiv farm_equivalent_coverage(const FieldEvaluation& eval,
                                   std::span<const double> grid);

// P(county index above theta_c | field below theta_i) over aligned years.
double fnp(const FieldCropSeries& field, const CountySeries& county,
           double theta_c, double theta_i);

CountyAggregate aggregate_county(std::span<const FieldEvaluation> evals,
                                 const EvaluateOptions& opts = {});

// Whole-panel evaluation, parallel over fields, deterministic order.
std::vector<FieldEvaluation> evaluate_panel(const Panel& panel,
                                            const ContractPlan& plan,
                                            const PreferenceSpec& pref,
                                            const EvaluateOptions& opts,
                                            int workers = 1);

}  // namespace basisrisk
