#pragma once

#include <string>

#include "gridstore/core_model.hpp"

namespace gridstore {

/// Framed value of a payoff against the reference point: concave power of
/// gains, loss-multiplied power of losses, zero at the reference.
double pt_value(double u, const ProspectParams& p);

/// Sign pattern of the framed payoff on the contested part of the opponent's
/// type range [A, Q_{m,max}].
enum class GainLossBranch { AllLoss, Mixed, AllGain };

std::string to_string(GainLossBranch b);

/// Building blocks of the contested framed expectation.
///
/// On [A, Q_{m,max}] the payoff falls linearly in the opponent's type, so the
/// framed integral has closed-form antiderivatives. The coefficients m_g and
/// m_l already include the belief density 1/Q_{m,max}.
struct PtBranchTerms {
  double a = 0.0;       // split point A = (L_c - alpha_n Q_n) / alpha_m
  double b = 0.0;       // alpha_n above which the uncontested payoff is a gain
  double q2r = 0.0;     // opponent type where the contested payoff equals r
  double m_g = 0.0;
  double m_l = 0.0;
  double u_i1 = 0.0;    // payoff when the opponent type is below A
  double u_max2 = 0.0;  // payoff at opponent type Q_{m,max}
  double u_a2 = 0.0;    // payoff at opponent type A (equals u_i1)
  double u_r2 = 0.0;    // payoff at opponent type q2r (equals r)
  GainLossBranch branch = GainLossBranch::AllGain;
};

/// Throws DegenerateOpponentStrategy when the opponent stores nothing and
/// MissingProspectParams when the player has no framing parameters.
PtBranchTerms pt_branch_terms(int player, const StrategyProfile& profile, const Scenario& s);

/// Closed-form framed expectation over the opponent's uniform type. Throws
/// MissingProspectParams for a rational player.
double expected_pt_utility(int player, const StrategyProfile& profile, const Scenario& s);

}  // namespace gridstore
