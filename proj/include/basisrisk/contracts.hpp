#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "basisrisk/types.hpp"

namespace basisrisk {

enum class Scheme { area, farm };

inline const char* scheme_name(Scheme s) { return s == Scheme::area ? "area" : "farm"; }

enum class PremiumBasis { field_fair, county_fair, subsidized };

inline const char* premium_basis_name(PremiumBasis b) {
  switch (b) {
    case PremiumBasis::field_fair: return "field_fair";
    case PremiumBasis::county_fair: return "county_fair";
    case PremiumBasis::subsidized: return "subsidized";
  }
  return "unknown";
}

// Candidate coverage levels 0.20, 0.25, ..., 0.95.
std::vector<double> default_trigger_grid();

// Snaps a trigger to the grid (tolerance 1e-9) or raises a config error.
double require_grid_trigger(double trigger);

struct Contract {
  Scheme scheme = Scheme::area;
  double trigger = 0.90;
  double premium = 0.0;
  PremiumBasis basis = PremiumBasis::field_fair;
  double subsidy_rate = 0.0;  // nonzero only when basis == subsidized
};

struct IndemnitySeries {
  std::vector<int> years;
  std::vector<double> indemnities;
};

// Premium support rates by (scheme, trigger). The built-in table mirrors the
// federal schedule: farm plans subsidized from 50% through 85% coverage, area
// plans from 70% through 90%; farm 90/95 and low area triggers are not
// offered. Catastrophic-only coverage (farm 50% at full subsidy) replaces the
// regular 50% rate when enabled.
class SubsidySchedule {
 public:
  static SubsidySchedule defaults(bool include_cat = false);

  void set(Scheme scheme, double trigger, double rate);
  std::optional<double> rate(Scheme scheme, double trigger) const;

 private:
  // trigger keyed as round(100 * tau)
  std::vector<std::pair<std::pair<int, int>, double>> rates_;
};

// Area payout against the county series: max(trigger * longrun_mean - ybar_t, 0).
// Protection factor fixed at 100%, payouts in yield units.
IndemnitySeries area_indemnity(const CountySeries& county, double trigger);

// Farm payout against the field's own history: max(trigger * mean - y_t, 0),
// with the mean taken over the same series being insured.
IndemnitySeries farm_indemnity(const FieldCropSeries& field, double trigger);

// Ex-post fair premium: mean indemnity over the series' window.
double fair_premium(const IndemnitySeries& ind);

// premium * (1 - subsidy rate); errors when the combination is not offered.
double subsidized_premium(double premium, Scheme scheme, double trigger,
                          const SubsidySchedule& schedule);

// net_t = y_t + I_t - premium. Errors on any nonpositive outcome, which the
// evaluator turns into a flagged field.
std::vector<double> net_yield_series(std::span<const double> yields,
                                     std::span<const double> indemnities,
                                     double premium);

}  // namespace basisrisk
