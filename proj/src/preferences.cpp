#include "basisrisk/preferences.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "basisrisk/errors.hpp"
#include "basisrisk/stats.hpp"

namespace basisrisk {

void PreferenceSpec::validate() const {
  if (kind == PreferenceKind::crra) {
    if (!(rho > 0.0) || rho == 1.0)
      fail(ErrorKind::config, "crra rho must be > 0 and != 1");
    return;
  }
  if (!(cpt.alpha_gain > 0.0 && cpt.alpha_gain <= 1.0))
    fail(ErrorKind::config, "cpt alpha_gain must lie in (0,1]");
  if (!(cpt.beta_loss > 0.0 && cpt.beta_loss <= 1.0))
    fail(ErrorKind::config, "cpt beta_loss must lie in (0,1]");
  if (!(cpt.lambda >= 1.0)) fail(ErrorKind::config, "cpt lambda must be >= 1");
  // Below ~0.28 the TK weighting function stops being increasing.
  if (!(cpt.gamma_gain > 0.28 && cpt.gamma_gain <= 1.0))
    fail(ErrorKind::config, "cpt gamma_gain must lie in (0.28,1]");
  if (!(cpt.gamma_loss > 0.28 && cpt.gamma_loss <= 1.0))
    fail(ErrorKind::config, "cpt gamma_loss must lie in (0.28,1]");
}

double crra_utility(double y, double rho) {
  if (!(y > 0.0)) fail(ErrorKind::domain, "crra_utility: y must be positive");
  if (!(rho > 0.0) || rho == 1.0)
    fail(ErrorKind::config, "crra_utility: rho must be > 0 and != 1");
  if (rho == 1.5) return -2.0 / std::sqrt(y);  // hot path for the default
  return std::pow(y, 1.0 - rho) / (1.0 - rho);
}

double crra_inverse_utility(double u, double rho) {
  if (!(rho > 0.0) || rho == 1.0)
    fail(ErrorKind::config, "crra_inverse_utility: rho must be > 0 and != 1");
  double z = (1.0 - rho) * u;
  if (!(z > 0.0))
    fail(ErrorKind::domain, "crra_inverse_utility: value outside utility range");
  if (rho == 1.5) {
    double w = -u;  // u = -2/sqrt(y) => y = 4/u^2
    return 4.0 / (w * w);
  }
  return std::pow(z, 1.0 / (1.0 - rho));
}

double certainty_equivalent(std::span<const double> outcomes,
                            const PreferenceSpec& pref) {
  if (pref.kind != PreferenceKind::crra)
    fail(ErrorKind::config, "certainty_equivalent: defined for crra preferences");
  if (outcomes.empty())
    fail(ErrorKind::insufficient_data, "certainty_equivalent: empty outcomes");
  double s = 0.0;
  for (double y : outcomes) s += crra_utility(y, pref.rho);
  double ubar = s / static_cast<double>(outcomes.size());
  return crra_inverse_utility(ubar, pref.rho);
}

RiskPremium risk_premium(std::span<const double> outcomes,
                         const PreferenceSpec& pref) {
  double m = stats::mean(outcomes);
  double ce = certainty_equivalent(outcomes, pref);
  RiskPremium rp;
  rp.absolute = m - ce;
  rp.relative = rp.absolute / m;
  return rp;
}

double prob_weight(double p, double gamma) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::domain, "prob_weight: p outside [0,1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  double pg = std::pow(p, gamma);
  double qg = std::pow(1.0 - p, gamma);
  return pg / std::pow(pg + qg, 1.0 / gamma);
}

double cpt_value(std::span<const double> outcomes, double reference,
                 const CptParams& params) {
  if (outcomes.empty()) fail(ErrorKind::insufficient_data, "cpt_value: empty outcomes");

  std::vector<double> sorted(outcomes.begin(), outcomes.end());
  std::sort(sorted.begin(), sorted.end());

  // Merge ties into atoms (value, count). Simulated yields tie at the
  // truncation bounds often enough for this to matter.
  struct Atom { double value; std::size_t count; };
  std::vector<Atom> atoms;
  for (double v : sorted) {
    if (!atoms.empty() && atoms.back().value == v)
      ++atoms.back().count;
    else
      atoms.push_back({v, 1});
  }

  double n = static_cast<double>(sorted.size());
  double total = 0.0;

  // Losses: walk from the worst outcome up; the decision weight of an atom
  // is w-(P(X <= x)) - w-(P(X < x)).
  double cum = 0.0;
  for (const Atom& a : atoms) {
    if (a.value >= reference) break;
    double lo = prob_weight(cum, params.gamma_loss);
    cum += static_cast<double>(a.count) / n;
    double hi = prob_weight(cum, params.gamma_loss);
    total += (hi - lo) * (-params.lambda * std::pow(reference - a.value, params.beta_loss));
  }

  // Gains: walk from the best outcome down with w+(P(X >= x)) - w+(P(X > x)).
  cum = 0.0;
  for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
    if (it->value < reference) break;
    double lo = prob_weight(cum, params.gamma_gain);
    cum += static_cast<double>(it->count) / n;
    double hi = prob_weight(cum, params.gamma_gain);
    total += (hi - lo) * std::pow(it->value - reference, params.alpha_gain);
  }

  return total;
}

double cpt_reference(double expected_no_insurance, double premium,
                     ReferenceRule rule) {
  if (premium < 0.0) fail(ErrorKind::domain, "cpt_reference: negative premium");
  if (rule == ReferenceRule::r1_expected_plus_premium)
    return expected_no_insurance + premium;
  return expected_no_insurance;
}

}  // namespace basisrisk
