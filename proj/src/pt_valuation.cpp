#include "gridstore/pt_valuation.hpp"

#include <algorithm>
#include <cmath>

#include "two_player.hpp"

namespace gridstore {

using detail::Duel;

double pt_value(double u, const ProspectParams& p) {
  if (u > p.r) return std::pow(u - p.r, p.beta_plus);
  if (u < p.r) return -p.lambda * std::pow(p.r - u, p.beta_minus);
  return 0.0;
}

std::string to_string(GainLossBranch b) {
  switch (b) {
    case GainLossBranch::AllLoss: return "AllLoss";
    case GainLossBranch::Mixed: return "Mixed";
    case GainLossBranch::AllGain: return "AllGain";
  }
  return "Unknown";
}

namespace {

const ProspectParams& framing_of(int player, const Scenario& s) {
  const auto& p = s.prospect_of(player);
  if (!p) throw MissingProspectParams(fmt::format("player {} has no prospect parameters", player));
  return *p;
}

// x^e for x >= 0; rounding can leave x a hair below zero at the crossing.
double power_of_gap(double x, double e) { return std::pow(std::max(x, 0.0), e); }

}  // namespace

PtBranchTerms pt_branch_terms(int player, const StrategyProfile& profile, const Scenario& s) {
  const Duel d(player, s);
  const ProspectParams& p = framing_of(player, s);
  const double alpha = profile[player];
  const double alpha_opp = profile[1 - player];
  if (alpha_opp <= 0.0)
    throw DegenerateOpponentStrategy("opponent stores nothing; split point undefined");

  PtBranchTerms t;
  const double qm = d.q_opp_max;
  const double slope = 0.5 * d.k * alpha_opp;  // payoff drop per kWh of opponent type
  const double intercept = d.rho * d.q * (1.0 - alpha) + 0.5 * d.k * (alpha * d.q + d.l_c);
  const auto contested_payoff = [&](double x) { return intercept - slope * x; };

  t.a = d.split_point(alpha, alpha_opp);
  t.b = (p.r - d.rho * d.q) / (d.q * (d.k - d.rho));
  t.q2r = (intercept - p.r) / slope;
  t.m_g = -1.0 / ((p.beta_plus + 1.0) * slope * qm);
  t.m_l = -p.lambda / ((p.beta_minus + 1.0) * slope * qm);
  t.u_i1 = d.linear_payoff(alpha);
  t.u_max2 = contested_payoff(qm);
  t.u_a2 = contested_payoff(t.a);
  t.u_r2 = contested_payoff(t.q2r);

  if (t.q2r < t.a) {
    t.branch = GainLossBranch::AllLoss;
  } else if (t.q2r > qm) {
    t.branch = GainLossBranch::AllGain;
  } else {
    t.branch = GainLossBranch::Mixed;
  }
  return t;
}

double expected_pt_utility(int player, const StrategyProfile& profile, const Scenario& s) {
  const Duel d(player, s);
  const ProspectParams& p = framing_of(player, s);
  const double alpha = profile[player];
  const double alpha_opp = profile[1 - player];

  // Uncontested: the payoff does not depend on the opponent's type.
  if (alpha_opp <= d.threshold() || !d.contested(alpha, alpha_opp))
    return pt_value(d.linear_payoff(alpha), p);

  const PtBranchTerms t = pt_branch_terms(player, profile, s);
  const double r = p.r;
  const double gp = p.beta_plus + 1.0;
  const double gm = p.beta_minus + 1.0;

  const double i1 = t.a / d.q_opp_max * pt_value(t.u_i1, p);

  double i2 = 0.0;
  switch (t.branch) {
    case GainLossBranch::AllLoss:
      i2 = t.m_l * (power_of_gap(r - t.u_max2, gm) - power_of_gap(r - t.u_a2, gm));
      break;
    case GainLossBranch::AllGain:
      i2 = t.m_g * (power_of_gap(t.u_max2 - r, gp) - power_of_gap(t.u_a2 - r, gp));
      break;
    case GainLossBranch::Mixed:
      i2 = t.m_g * (power_of_gap(t.u_r2 - r, gp) - power_of_gap(t.u_a2 - r, gp)) +
           t.m_l * (power_of_gap(r - t.u_max2, gm) - power_of_gap(r - t.u_r2, gm));
      break;
  }
  return i1 + i2;
}

}  // namespace gridstore
