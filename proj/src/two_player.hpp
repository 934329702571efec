#pragma once

#include <fmt/format.h>

#include "gridstore/core_model.hpp"

namespace gridstore::detail {

inline void require_two_players(const Scenario& s) {
  if (s.n_players() != 2 || s.grid.n_players != 2)
    throw NotTwoPlayer(fmt::format("closed forms need 2 players, scenario has {}", s.n_players()));
}

/// Quantities seen by one player of a two-microgrid scenario.
struct Duel {
  double rho;
  double k;     // theta * rho_c
  double l_c;
  double q;     // own surplus
  double q_opp_max;

  Duel(int player, const Scenario& s) {
    require_two_players(s);
    if (player != 0 && player != 1)
      throw DimensionMismatch(fmt::format("player index {} out of range", player));
    rho = s.grid.rho;
    k = s.grid.emergency_value();
    l_c = s.grid.l_c;
    q = s.microgrids[player].q;
    q_opp_max = s.microgrids[1 - player].q_max;
  }

  // Payoff when all stored energy is bought.
  double linear_payoff(double alpha) const { return rho * q * (1.0 - alpha) + k * alpha * q; }

  // The total can exceed L_c for some opponent type.
  bool contested(double alpha, double alpha_opp) const {
    return alpha * q + alpha_opp * q_opp_max > l_c;
  }

  // Opponent type at which the total stored energy reaches L_c.
  double split_point(double alpha, double alpha_opp) const {
    return (l_c - alpha * q) / alpha_opp;
  }

  double threshold() const { return (l_c - q) / q_opp_max; }
  double price_ratio() const { return 2.0 * rho / k - 1.0; }
};

}  // namespace gridstore::detail
