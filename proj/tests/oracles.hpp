#pragma once

// Independent numerical oracles used only by tests. Nothing here calls the
// branch logic it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gridstore/cgt_equilibrium.hpp"
#include "gridstore/core_model.hpp"

namespace gridstore::testing {

/// Exhaustive argmax of f over {0, step, ..., 1}; ties toward the smaller point.
inline double brute_argmax(const std::function<double(double)>& f, double step) {
  const long n = std::lround(1.0 / step);
  double best = 0.0, best_v = f(0.0);
  for (long i = 1; i <= n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n);
    const double v = f(x);
    if (v > best_v) {
      best_v = v;
      best = x;
    }
  }
  return best;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Argmax of the classical expected payoff by brute force.
inline double brute_best_response(int player, double opponent_alpha, const Scenario& s,
                                  double step) {
  StrategyProfile p(2);
  p[1 - player] = opponent_alpha;
  return brute_argmax(
      [&](double a) {
        p[player] = a;
        return expected_utility_cgt(player, p, s);
      },
      step);
}

/// Fixed points of alternating brute-force best responses from several starts.
inline std::vector<StrategyProfile> brute_fixed_points(const Scenario& s, double step,
                                                       int rounds = 200) {
  std::vector<StrategyProfile> out;
  for (const auto& start : {make_profile(1, 1), make_profile(0, 0), make_profile(0.5, 0.9),
                            make_profile(0.9, 0.3)}) {
    StrategyProfile p = start;
    for (int r = 0; r < rounds; ++r) {
      p[0] = brute_best_response(0, p[1], s, step);
      p[1] = brute_best_response(1, p[0], s, step);
    }
    out.push_back(p);
  }
  return out;
}

/// Simultaneous solution of both interior stationarity conditions as a 2x2
/// linear system.
inline Eigen::Vector2d interior_pair_by_linear_solve(const Scenario& s) {
  const double k = s.grid.emergency_value(), rho = s.grid.rho, lc = s.grid.l_c;
  const double c = (k - 2.0 * rho) / k;
  const double q1 = s.microgrids[0].q, q2 = s.microgrids[1].q;
  const double q1m = s.microgrids[0].q_max, q2m = s.microgrids[1].q_max;
  // alpha_1 - c q2m / q1 alpha_2 = lc / q1, and symmetrically.
  Eigen::Matrix2d m;
  m << 1.0, -c * q2m / q1, -c * q1m / q2, 1.0;
  const Eigen::Vector2d rhs(lc / q1, lc / q2);
  return m.fullPivLu().solve(rhs);
}

/// Random valid two-player scenario. Prices keep theta*rho_c above rho.
inline Scenario random_scenario(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Scenario s;
  s.grid.rho = 0.05 + 0.15 * u01(rng);
  s.grid.theta = 0.005 + 0.05 * u01(rng);
  const double floor_price = s.grid.rho / s.grid.theta;
  s.grid.rho_c = floor_price * (1.02 + 1.5 * u01(rng));
  s.grid.l_c = 100.0 + 300.0 * u01(rng);
  s.grid.n_players = 2;
  for (int n = 0; n < 2; ++n) {
    MicrogridConfig mg;
    mg.q_max = s.grid.l_c * (0.1 + 0.89 * u01(rng));
    mg.q = mg.q_max * (0.05 + 0.95 * u01(rng));
    s.microgrids.push_back(mg);
  }
  return s;
}

/// Payoff of `player` when the opponent's type is x, from the allocation rule.
inline double payoff_at_opponent_type(int player, const StrategyProfile& p, const Scenario& s,
                                      double x) {
  EnergyVector q(2);
  q[player] = s.microgrids[player].q;
  q[1 - player] = x;
  return realized_utility(player, p, q, s.grid);
}

/// Strata of the framed expectation: whether the opponent's type can matter,
/// the sign of the payoff below the split point, and where the reference
/// crossing falls.
enum class PtStratum { FlatGain, FlatLoss, LossAllLoss, GainMixed, GainAllGain };

inline const char* to_string(PtStratum s) {
  switch (s) {
    case PtStratum::FlatGain: return "uncontested gain";
    case PtStratum::FlatLoss: return "uncontested loss";
    case PtStratum::LossAllLoss: return "I1 loss, I2 all loss";
    case PtStratum::GainMixed: return "I1 gain, I2 mixed";
    case PtStratum::GainAllGain: return "I1 gain, I2 all gain";
  }
  return "";
}

struct PtDraw {
  Scenario s;
  StrategyProfile profile;
};

/// Random scenario, profile and framing for player 0 landing in `stratum`, or
/// nothing when the drawn profile cannot reach it. The reference point is
/// placed from payoffs sampled at the ends of the opponent's type range.
inline std::optional<PtDraw> pt_draw(std::mt19937_64& rng, PtStratum stratum) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  PtDraw d{random_scenario(rng), make_profile(0.02 + 0.98 * u01(rng), 0.02 + 0.98 * u01(rng))};
  const double q2max = d.s.microgrids[1].q_max;
  const bool contested = d.profile[0] * d.s.microgrids[0].q + d.profile[1] * q2max > d.s.grid.l_c;
  const bool want_contested = stratum != PtStratum::FlatGain && stratum != PtStratum::FlatLoss;
  if (contested != want_contested) return std::nullopt;

  const double low = payoff_at_opponent_type(0, d.profile, d.s, 0.0);
  const double high = payoff_at_opponent_type(0, d.profile, d.s, q2max);
  const double spread = std::max(low - high, 0.05 * std::abs(low) + 1e-3);
  double r = 0.0;
  switch (stratum) {
    case PtStratum::FlatGain:
    case PtStratum::GainAllGain: r = high - spread * (0.01 + u01(rng)); break;
    case PtStratum::FlatLoss:
    case PtStratum::LossAllLoss: r = low + spread * (0.01 + u01(rng)); break;
    case PtStratum::GainMixed: r = high + (low - high) * (0.02 + 0.96 * u01(rng)); break;
  }
  ProspectParams pp;
  pp.r = r;
  pp.lambda = 1.0 + 3.0 * u01(rng);
  pp.beta_plus = 0.2 + 0.8 * u01(rng);
  pp.beta_minus = 0.2 + 0.8 * u01(rng);
  d.s.prospect = {pp, std::nullopt};
  return d;
}

}  // namespace gridstore::testing
