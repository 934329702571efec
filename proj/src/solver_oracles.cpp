#include "gridstore/solver_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fmt/format.h>

#include "gridstore/pt_valuation.hpp"
#include "two_player.hpp"

namespace gridstore {

std::vector<std::string> check_settings(const SolverSettings& settings) {
  if (!(settings.grid_step > 0.0 && settings.grid_step <= 0.1))
    throw std::invalid_argument(fmt::format("grid_step {} outside (0, 0.1]", settings.grid_step));
  if (!(settings.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (settings.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(settings.quad_rel_tol > 0.0)) throw std::invalid_argument("quad_rel_tol must be positive");
  std::vector<std::string> warnings;
  if (settings.tol < settings.grid_step)
    warnings.push_back(fmt::format(
        "tol {} is below grid_step {}: framed best responses are resolution-limited", settings.tol,
        settings.grid_step));
  return warnings;
}

namespace {

std::array<std::size_t, 2> ordered(int player) {
  return {static_cast<std::size_t>(player), static_cast<std::size_t>(1 - player)};
}

}  // namespace

double quadrature_expected_utility(int player, const StrategyProfile& profile, const Scenario& s,
                                   bool framed, double rel_tol) {
  detail::require_two_players(s);
  const int opp = 1 - player;
  const Belief belief = s.belief(player, opp);
  const auto [own, other] = ordered(player);

  const ProspectParams* framing = nullptr;
  if (framed) {
    if (!s.prospect_of(player))
      throw MissingProspectParams(fmt::format("player {} has no prospect parameters", player));
    framing = &*s.prospect_of(player);
  }

  EnergyVector surpluses(2);
  surpluses[own] = s.microgrids[player].q;
  const auto payoff = [&](double x) {
    EnergyVector q = surpluses;
    q[other] = x;
    return realized_utility(player, profile, q, s.grid);
  };

  // Kinks of the realized payoff in the opponent's type: where the total
  // reaches L_c and where the allocation clamps at zero.
  std::vector<double> cuts{0.0, belief.upper};
  const double stored = profile[player] * s.microgrids[player].q;
  const double alpha_opp = profile[opp];
  if (alpha_opp > 0.0) {
    cuts.push_back((s.grid.l_c - stored) / alpha_opp);
    cuts.push_back((s.grid.l_c + stored) / alpha_opp);
  }
  const auto keep = [&](double x) { return x > 0.0 && x < belief.upper; };
  std::erase_if(cuts, [&](double x) { return !(x == 0.0 || x == belief.upper || keep(x)); });
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // The payoff is affine between kinks, so a framed integrand's reference
  // crossing is found by interpolating the endpoints.
  if (framing) {
    std::vector<double> crossings;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double lo = cuts[i], hi = cuts[i + 1];
      const double ulo = payoff(lo) - framing->r, uhi = payoff(hi) - framing->r;
      if (ulo * uhi < 0.0) crossings.push_back(lo + ulo * (hi - lo) / (ulo - uhi));
    }
    cuts.insert(cuts.end(), crossings.begin(), crossings.end());
    std::sort(cuts.begin(), cuts.end());
  }

  const auto integrand = [&](double x) {
    const double u = payoff(x);
    return (framing ? pt_value(u, *framing) : u) * belief.density(x);
  };

  // Framed pieces have power-law endpoint singularities at the reference
  // crossing, where tanh-sinh converges and Gauss-Kronrod bisects forever.
  using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;
  static thread_local boost::math::quadrature::tanh_sinh<double> singular;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total += framing ? singular.integrate(integrand, cuts[i], cuts[i + 1], rel_tol)
                     : Quad::integrate(integrand, cuts[i], cuts[i + 1], 15, rel_tol);
  }
  return total;
}

double expected_objective(int player, const StrategyProfile& profile, const Scenario& s,
                          bool framed) {
  return framed ? expected_pt_utility(player, profile, s)
                : expected_utility_cgt(player, profile, s);
}

namespace {

struct Objective {
  int player;
  StrategyProfile profile;
  const Scenario& s;
  bool framed;

  double operator()(double alpha) {
    profile[player] = alpha;
    return expected_objective(player, profile, s, framed);
  }
};

bool single_peaked(Objective& f, double lo, double hi) {
  constexpr int kSamples = 9;
  double prev = f(lo);
  bool falling = false;
  for (int i = 1; i < kSamples; ++i) {
    const double v = f(lo + (hi - lo) * i / (kSamples - 1));
    if (v < prev) {
      falling = true;
    } else if (v > prev && falling) {
      return false;
    }
    prev = v;
  }
  return true;
}

double ternary_max(Objective& f, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) < f(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double grid_best_response(int player, double opponent_alpha, const Scenario& s, bool framed,
                          const SolverSettings& settings) {
  detail::require_two_players(s);
  StrategyProfile profile(2);
  profile[player] = 0.0;
  profile[1 - player] = opponent_alpha;
  Objective f{player, profile, s, framed};

  const auto steps = static_cast<long>(std::floor(1.0 / settings.grid_step + 1e-9));
  std::vector<double> grid;
  grid.reserve(steps + 2);
  for (long i = 0; i <= steps; ++i) grid.push_back(std::min(1.0, i * settings.grid_step));
  if (grid.back() < 1.0) grid.push_back(1.0);

  double best = 0.0;
  double best_value = f(0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > best_value) {
      best_value = v;
      best = grid[i];
    }
  }
  if (!settings.refine) return best;

  const double lo = std::max(0.0, best - settings.grid_step);
  const double hi = std::min(1.0, best + settings.grid_step);
  if (!single_peaked(f, lo, hi)) return best;
  const double refined = ternary_max(f, lo, hi);
  return f(refined) > best_value ? refined : best;
}

std::array<bool, 2> framing_flags(const Scenario& s) {
  return {s.is_prospect(0), s.is_prospect(1)};
}

EquilibriumResult iterate_responses(const StrategyProfile& initial, const ResponseMap& respond,
                                    const SolverSettings& settings) {
  if (initial.size() != 2) throw DimensionMismatch("initial profile needs two entries");
  EquilibriumResult result;
  result.classification = Classification::PtIterated;
  StrategyProfile profile = initial;
  StrategyProfile two_back = initial;

  for (int iter = 1; iter <= settings.max_iters; ++iter) {
    const StrategyProfile before = profile;
    profile[0] = respond(0, profile[1]);
    profile[1] = respond(1, profile[0]);
    result.iterations = iter;
    result.last_delta = (profile - before).cwiseAbs().maxCoeff();

    if (result.last_delta <= settings.tol) {
      result.converged = true;
      break;
    }
    if (iter >= 2 && (profile - two_back).cwiseAbs().maxCoeff() <= settings.tol) {
      throw CycleDetected(
          fmt::format("best responses alternate between ({:.9g}, {:.9g}) and ({:.9g}, {:.9g})",
                      profile[0], profile[1], before[0], before[1]),
          profile, before, iter);
    }
    two_back = before;
    result.converged = false;
  }
  result.profile = profile;
  return result;
}

EquilibriumResult iterate_best_response(const Scenario& s, const StrategyProfile& initial,
                                        const SolverSettings& settings,
                                        std::array<bool, 2> framed) {
  detail::require_two_players(s);
  check_settings(settings);
  if (initial.size() != 2) throw DimensionMismatch("initial profile needs two entries");
  for (int n = 0; n < 2; ++n)
    if (framed[n] && !s.prospect_of(n))
      throw MissingProspectParams(fmt::format("player {} is framed but has no parameters", n));

  EquilibriumResult result = iterate_responses(
      initial,
      [&](int n, double opp) {
        return framed[n] ? grid_best_response(n, opp, s, true, settings)
                         : best_response_cgt(n, opp, s).alpha;
      },
      settings);
  result.expected_utilities = Eigen::Vector2d(expected_utility_cgt(0, result.profile, s),
                                              expected_utility_cgt(1, result.profile, s));
  return result;
}

}  // namespace gridstore
