#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "gridstore/cgt_equilibrium.hpp"
#include "gridstore/core_model.hpp"

namespace gridstore {

struct SolverSettings {
  double grid_step = 1e-3;      // action discretization
  double tol = 1e-6;            // fixed-point tolerance
  int max_iters = 200;
  double quad_rel_tol = 1e-10;
  bool refine = true;           // ternary refinement around the grid argmax
};

/// Throws std::invalid_argument on unusable settings and returns warnings
/// for usable but resolution-limited ones.
std::vector<std::string> check_settings(const SolverSettings& settings);

/// Numerical expectation of the (optionally framed) realized payoff over the
/// opponent's uniform type. The domain is split wherever the payoff has a
/// kink before adaptive Gauss-Kronrod integration.
double quadrature_expected_utility(int player, const StrategyProfile& profile, const Scenario& s,
                                   bool framed, double rel_tol = 1e-10);

/// Closed-form objective maximized by `player`: framed expectation when
/// `framed`, classical expectation otherwise.
double expected_objective(int player, const StrategyProfile& profile, const Scenario& s,
                          bool framed);

/// Argmax over the action grid {0, step, ..., 1}, ties toward the smaller
/// action, refined by ternary search inside +/- one step when the sampled
/// objective is single-peaked there.
double grid_best_response(int player, double opponent_alpha, const Scenario& s, bool framed,
                          const SolverSettings& settings = {});

/// Response of player n to the opponent's current fraction.
using ResponseMap = std::function<double(int, double)>;

/// Round loop shared by all solvers: player 0 then player 1 respond each
/// round until the profile moves by at most tol. Throws CycleDetected when a
/// round reproduces the profile from two rounds back. Leaves
/// expected_utilities empty.
EquilibriumResult iterate_responses(const StrategyProfile& initial, const ResponseMap& respond,
                                    const SolverSettings& settings);

/// Sequential best-response dynamics: player 0 then player 1 each round.
/// Framed players use grid_best_response, rational players the closed form.
/// Returns converged = false when max_iters is exhausted and throws
/// CycleDetected on a period-2 orbit.
EquilibriumResult iterate_best_response(const Scenario& s, const StrategyProfile& initial,
                                        const SolverSettings& settings,
                                        std::array<bool, 2> framed);

/// Framing flags taken from the scenario: players with prospect parameters
/// are framed.
std::array<bool, 2> framing_flags(const Scenario& s);

}  // namespace gridstore
