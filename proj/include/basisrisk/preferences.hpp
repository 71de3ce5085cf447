#pragma once

#include <span>

namespace basisrisk {

enum class PreferenceKind { crra, cpt };

inline const char* preference_kind_name(PreferenceKind k) {
  return k == PreferenceKind::crra ? "crra" : "cpt";
}

enum class ReferenceRule {
  r1_expected_plus_premium,  // reference moves with the premium paid
  r2_expected_only,          // premium treated as sunk
};

// Canonical Tversky-Kahneman (1992) estimates. These are library defaults,
// overridable from config; nothing downstream assumes these exact values.
struct CptParams {
  double alpha_gain = 0.88;
  double beta_loss = 0.88;
  double lambda = 2.25;
  double gamma_gain = 0.61;
  double gamma_loss = 0.69;
};

struct PreferenceSpec {
  PreferenceKind kind = PreferenceKind::crra;
  double rho = 1.5;
  CptParams cpt;
  ReferenceRule reference_rule = ReferenceRule::r1_expected_plus_premium;

  void validate() const;
};

// Iso-elastic utility u(y) = y^(1-rho)/(1-rho), rho > 0, rho != 1.
double crra_utility(double y, double rho);

// Inverse of crra_utility on its range.
double crra_inverse_utility(double u, double rho);

// CE = u^-1(mean of u(outcome)), equal weights. CRRA only.
double certainty_equivalent(std::span<const double> outcomes,
                            const PreferenceSpec& pref);

struct RiskPremium {
  double absolute = 0.0;  // mean - CE
  double relative = 0.0;  // (mean - CE)/mean
};

RiskPremium risk_premium(std::span<const double> outcomes,
                         const PreferenceSpec& pref);

// Tversky-Kahneman probability weighting w(p) = p^g / (p^g + (1-p)^g)^(1/g).
double prob_weight(double p, double gamma);

// Cumulative prospect value of an equal-weight empirical lottery. Outcomes
// at or above the reference are gains (weighted cumulatively from the best
// outcome down), outcomes below are losses (from the worst up); tied
// outcomes are merged into one atom before weighting.
double cpt_value(std::span<const double> outcomes, double reference,
                 const CptParams& params);

double cpt_reference(double expected_no_insurance, double premium,
                     ReferenceRule rule);

}  // namespace basisrisk
