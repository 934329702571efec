#pragma once

#include <string>
#include <vector>

#include "gridstore/core_model.hpp"

namespace gridstore {

// Closed forms for two microgrids under classical (risk-neutral) expected
// utility. Player indices are 0 and 1; the opponent of `player` is
// 1 - player. Every function throws NotTwoPlayer for other sizes.

enum class BestResponseCaseId {
  BelowLoadStoreAll,       // opponent can never push the total past L_c
  InteriorOptimum,         // stationary point of the concave contested payoff
  PriceDominatedStoreAll,  // stationary point lies beyond 1
};

std::string to_string(BestResponseCaseId id);

struct BestResponseCase {
  BestResponseCaseId case_id = BestResponseCaseId::BelowLoadStoreAll;
  double threshold_t = 0.0;  // (L_c - Q_n) / Q_{m,max}
  double slack = 0.0;        // (2 rho / (theta rho_c) - 1) * alpha_m - threshold_t
};

struct BestResponse {
  double alpha = 1.0;
  BestResponseCase rcase;
};

enum class Classification { BNE1, BNE2, BNE3, BNE4, PtIterated, CycleDetected };

std::string to_string(Classification c);

struct EquilibriumResult {
  StrategyProfile profile;
  Classification classification = Classification::PtIterated;
  std::vector<std::string> conditions;  // satisfied existence-condition labels
  Eigen::VectorXd expected_utilities;   // classical expected utility, $
  bool converged = true;
  int iterations = 0;
  double last_delta = 0.0;  // max |change| over the final round
};

/// Expected payoff of `player` over the opponent's uniform type.
double expected_utility_cgt(int player, const StrategyProfile& profile, const Scenario& s);

/// Stationary point of the contested expected payoff, without branch logic.
double interior_best_response(int player, double opponent_alpha, const Scenario& s);

/// Exact best response. Ties in the branch conditions go to storing everything.
BestResponse best_response_cgt(int player, double opponent_alpha, const Scenario& s);

/// True when each component is within `tol` of its best response to the other.
bool verify_bne(const StrategyProfile& profile, const Scenario& s, double tol = 1e-9);

/// Simultaneous interior solution of both stationarity conditions.
StrategyProfile fourth_bne_profile(const Scenario& s);

struct BneCandidate {
  Classification classification;
  StrategyProfile profile;
  std::vector<std::string> conditions;
  bool in_range = false;
  bool verified = false;
};

/// All four candidate profiles with their condition labels, in-range flags and
/// verification outcome, whether or not they are equilibria.
std::vector<BneCandidate> bne_candidates(const Scenario& s);

/// Candidates that lie in [0,1]^2 and pass verify_bne at tol 1e-9.
std::vector<EquilibriumResult> enumerate_bne(const Scenario& s);

}  // namespace gridstore
