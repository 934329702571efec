#include "gridstore/cgt_equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "two_player.hpp"

namespace gridstore {

using detail::Duel;

std::string to_string(BestResponseCaseId id) {
  switch (id) {
    case BestResponseCaseId::BelowLoadStoreAll: return "BelowLoadStoreAll";
    case BestResponseCaseId::InteriorOptimum: return "InteriorOptimum";
    case BestResponseCaseId::PriceDominatedStoreAll: return "PriceDominatedStoreAll";
  }
  return "Unknown";
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::BNE1: return "BNE1";
    case Classification::BNE2: return "BNE2";
    case Classification::BNE3: return "BNE3";
    case Classification::BNE4: return "BNE4";
    case Classification::PtIterated: return "PT-Iterated";
    case Classification::CycleDetected: return "CycleDetected";
  }
  return "Unknown";
}

double expected_utility_cgt(int player, const StrategyProfile& profile, const Scenario& s) {
  const Duel d(player, s);
  const double alpha = profile[player];
  const double alpha_opp = profile[1 - player];
  const double linear = d.linear_payoff(alpha);
  if (alpha_opp <= 0.0 || !d.contested(alpha, alpha_opp)) return linear;

  // Below the split point every stored kWh is bought; above it the buyer
  // trims half the excess from each player, which is linear in the
  // opponent's type.
  const double a = d.split_point(alpha, alpha_opp);
  const double qm = d.q_opp_max;
  const double intercept = d.rho * d.q * (1.0 - alpha) + 0.5 * d.k * (alpha * d.q + d.l_c);
  const double contested_part =
      intercept * (qm - a) - 0.25 * d.k * alpha_opp * (qm * qm - a * a);
  return (a * linear + contested_part) / qm;
}

double interior_best_response(int player, double opponent_alpha, const Scenario& s) {
  const Duel d(player, s);
  return (d.l_c * d.k + (d.k - 2.0 * d.rho) * opponent_alpha * d.q_opp_max) / (d.q * d.k);
}

BestResponse best_response_cgt(int player, double opponent_alpha, const Scenario& s) {
  const Duel d(player, s);
  BestResponse br;
  br.rcase.threshold_t = d.threshold();
  br.rcase.slack = d.price_ratio() * opponent_alpha - br.rcase.threshold_t;

  if (opponent_alpha <= br.rcase.threshold_t) {
    br.rcase.case_id = BestResponseCaseId::BelowLoadStoreAll;
    br.alpha = 1.0;
  } else if (br.rcase.slack > 0.0) {
    br.rcase.case_id = BestResponseCaseId::InteriorOptimum;
    double a = interior_best_response(player, opponent_alpha, s);
    if (a > 1.0 && a - 1.0 <= 1e-12) a = 1.0;
    if (a < 0.0 && -a <= 1e-12) a = 0.0;
    br.alpha = a;
  } else {
    br.rcase.case_id = BestResponseCaseId::PriceDominatedStoreAll;
    br.alpha = 1.0;
  }
  return br;
}

bool verify_bne(const StrategyProfile& profile, const Scenario& s, double tol) {
  detail::require_two_players(s);
  if (profile.size() != 2) throw DimensionMismatch("verify_bne needs a two-entry profile");
  for (int n = 0; n < 2; ++n) {
    const double br = best_response_cgt(n, profile[1 - n], s).alpha;
    if (!(std::abs(profile[n] - br) <= tol)) return false;
  }
  return true;
}

StrategyProfile fourth_bne_profile(const Scenario& s) {
  detail::require_two_players(s);
  const double rho = s.grid.rho;
  const double k = s.grid.emergency_value();
  const double lc = s.grid.l_c;
  const double q1 = s.microgrids[0].q, q2 = s.microgrids[1].q;
  const double q1m = s.microgrids[0].q_max, q2m = s.microgrids[1].q_max;
  const double c = k - 2.0 * rho;
  const double denom = q1 * q2 * k * k - c * c * q1m * q2m;
  return make_profile(lc * k * (q2 * k + c * q2m) / denom,
                      lc * k * (q1 * k + c * q1m) / denom);
}

namespace {

bool in_unit_square(const StrategyProfile& p) {
  return std::isfinite(p[0]) && std::isfinite(p[1]) && p[0] >= 0.0 && p[0] <= 1.0 &&
         p[1] >= 0.0 && p[1] <= 1.0;
}

// Existence conditions. Index 0/1 is the player; t[n] = (L_c - Q_n) / Q_{m,max}
// and g = 2 rho / (theta rho_c) - 1.
struct ConditionInputs {
  double lc, g;
  double q[2], qm[2], t[2];

  explicit ConditionInputs(const Scenario& s) {
    lc = s.grid.l_c;
    g = 2.0 * s.grid.rho / s.grid.emergency_value() - 1.0;
    for (int n = 0; n < 2; ++n) {
      q[n] = s.microgrids[n].q;
      qm[n] = s.microgrids[n].q_max;
    }
    t[0] = (lc - q[0]) / qm[1];
    t[1] = (lc - q[1]) / qm[0];
  }

  // Player n is never contested, whatever the opponent does.
  bool never_contested(int n) const { return lc >= qm[1 - n] + q[n]; }
  // Player n stores everything against an opponent storing everything.
  bool stores_all_when_contested(int n) const { return g <= t[n] && t[n] < 1.0; }
};

std::vector<std::string> store_all_conditions(const ConditionInputs& c) {
  std::vector<std::string> out;
  if (c.never_contested(0) && c.never_contested(1)) out.push_back("1a");
  if (c.never_contested(0) && c.stores_all_when_contested(1)) out.push_back("1b");
  if (c.stores_all_when_contested(0) && c.never_contested(1)) out.push_back("1c");
  if (c.stores_all_when_contested(0) && c.stores_all_when_contested(1)) out.push_back("1d");
  return out;
}

// Player `full` stores everything, player `part` plays the interior value
// `alpha_part`. Labels are (prefix)a and (prefix)b.
std::vector<std::string> one_interior_conditions(const ConditionInputs& c, int full, int part,
                                                 double alpha_part, const std::string& prefix) {
  std::vector<std::string> out;
  const bool part_interior = c.g > c.t[part];
  if (c.lc >= alpha_part * c.qm[part] + c.q[full] && part_interior) out.push_back(prefix + "a");
  if (c.g * alpha_part <= c.t[full] && c.t[full] < alpha_part && part_interior)
    out.push_back(prefix + "b");
  return out;
}

}  // namespace

std::vector<BneCandidate> bne_candidates(const Scenario& s) {
  detail::require_two_players(s);
  const ConditionInputs c(s);
  std::vector<BneCandidate> out;

  out.push_back({Classification::BNE1, make_profile(1.0, 1.0), store_all_conditions(c)});

  const double a2 = interior_best_response(1, 1.0, s);
  out.push_back({Classification::BNE2, make_profile(1.0, a2), one_interior_conditions(c, 0, 1, a2, "2")});

  const double a1 = interior_best_response(0, 1.0, s);
  out.push_back({Classification::BNE3, make_profile(a1, 1.0), one_interior_conditions(c, 1, 0, a1, "3")});

  const StrategyProfile p4 = fourth_bne_profile(s);
  BneCandidate fourth{Classification::BNE4, p4, {}};
  if (p4[1] * c.g > c.t[0] && p4[0] * c.g > c.t[1]) fourth.conditions.push_back("4a");
  out.push_back(fourth);

  for (auto& cand : out) {
    cand.in_range = in_unit_square(cand.profile);
    cand.verified = cand.in_range && verify_bne(cand.profile, s, 1e-9);
  }
  return out;
}

std::vector<EquilibriumResult> enumerate_bne(const Scenario& s) {
  std::vector<EquilibriumResult> out;
  for (const auto& cand : bne_candidates(s)) {
    if (!cand.verified) continue;
    EquilibriumResult r;
    r.profile = cand.profile;
    r.classification = cand.classification;
    r.conditions = cand.conditions;
    r.expected_utilities = Eigen::Vector2d(expected_utility_cgt(0, cand.profile, s),
                                           expected_utility_cgt(1, cand.profile, s));
    r.converged = true;
    r.iterations = 0;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace gridstore
