#include <doctest.h>

#include <random>

#include "gridstore/cgt_equilibrium.hpp"
#include "gridstore/solver_oracles.hpp"
#include "oracles.hpp"

using namespace gridstore;
using namespace gridstore::testing;

namespace {

Scenario with_load(double l_c) {
  Scenario s = reference_scenario();
  s.grid.l_c = l_c;
  return s;
}

// Exact value from a 30-digit quadrature of the realized payoff.
constexpr double kExpectedAtInterior = 13.1310344827584426666;
constexpr double kInteriorResponse = 0.761494252873563218390805;
constexpr double kFourthBne = 0.874811463046757164404223;

}  // namespace

TEST_CASE("expected utility closed form") {
  const Scenario s = reference_scenario();
  CHECK(expected_utility_cgt(0, make_profile(1.0, 0.5), s) == doctest::Approx(13.92).epsilon(1e-13));
  CHECK(expected_utility_cgt(0, make_profile(0.0, 1.0), s) == doctest::Approx(12.0).epsilon(1e-13));
  CHECK(expected_utility_cgt(0, make_profile(0.761494, 1.0), s) ==
        doctest::Approx(kExpectedAtInterior).epsilon(1e-12));
  CHECK(expected_utility_cgt(0, make_profile(0.761494, 1.0), s) ==
        doctest::Approx(quadrature_expected_utility(0, make_profile(0.761494, 1.0), s, false))
            .epsilon(1e-12));
}

TEST_CASE("expected utility is symmetric under player relabeling") {
  Scenario s = reference_scenario();
  s.microgrids = {{100.0, 160.0}, {80.0, 120.0}};
  Scenario swapped = s;
  std::swap(swapped.microgrids[0], swapped.microgrids[1]);
  const StrategyProfile p = make_profile(0.9, 0.7);
  CHECK(expected_utility_cgt(0, p, s) == doctest::Approx(expected_utility_cgt(1, make_profile(0.7, 0.9), swapped)));
}

TEST_CASE("best response branches") {
  const Scenario s = reference_scenario();
  const auto below = best_response_cgt(0, 0.5, s);
  CHECK(below.alpha == 1.0);
  CHECK(below.rcase.case_id == BestResponseCaseId::BelowLoadStoreAll);
  CHECK(below.rcase.threshold_t == doctest::Approx(80.0 / 150.0));

  const auto interior = best_response_cgt(0, 1.0, s);
  CHECK(interior.rcase.case_id == BestResponseCaseId::InteriorOptimum);
  CHECK(interior.alpha == doctest::Approx(kInteriorResponse).epsilon(1e-14));
  CHECK(std::abs(interior.alpha - brute_best_response(0, 1.0, s, 1e-5)) <= 1e-5);

  const auto dominated = best_response_cgt(0, 0.6, s);
  CHECK(dominated.alpha == 1.0);
  CHECK(dominated.rcase.case_id == BestResponseCaseId::PriceDominatedStoreAll);
  CHECK(dominated.rcase.slack < 0.0);
  CHECK(brute_best_response(0, 0.6, s, 1e-5) == 1.0);
}

TEST_CASE("boundary ties resolve to storing everything") {
  Scenario s = reference_scenario();
  s.microgrids[1].q_max = 160.0;  // threshold (200 - 120) / 160 = 0.5 exactly
  const auto br = best_response_cgt(0, 0.5, s);
  CHECK(br.rcase.threshold_t == 0.5);
  CHECK(br.alpha == 1.0);
  CHECK(br.rcase.case_id == BestResponseCaseId::BelowLoadStoreAll);
}

TEST_CASE("best response matches brute-force argmax on random scenarios") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Scenario s = random_scenario(rng);
    const int player = i % 2;
    const double opp = u(rng);
    const double br = best_response_cgt(player, opp, s).alpha;
    CHECK(std::abs(br - brute_best_response(player, opp, s, 1e-4)) <= 1e-4 + 1e-12);
  }
}

TEST_CASE("interior response is a stationary point") {
  std::mt19937_64 rng(12);
  int interior = 0;
  for (int i = 0; i < 40000 && interior < 200; ++i) {
    const Scenario s = random_scenario(rng);
    const double opp = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto br = best_response_cgt(0, opp, s);
    if (br.rcase.case_id != BestResponseCaseId::InteriorOptimum) continue;
    if (br.alpha < 1e-3 || br.alpha > 1.0 - 1e-3) continue;
    ++interior;
    const auto f = [&](double a) { return expected_utility_cgt(0, make_profile(a, opp), s); };
    const double scale = s.grid.emergency_value() * s.microgrids[0].q;
    CHECK(std::abs(central_difference(f, br.alpha, 1e-5)) / scale < 1e-6);
  }
  CHECK(interior >= 100);
}

TEST_CASE("enumeration on reference and load variants") {
  SUBCASE("large load: store everything via 1a") {
    const auto eqs = enumerate_bne(with_load(400.0));
    REQUIRE(eqs.size() == 1);
    CHECK(eqs[0].classification == Classification::BNE1);
    CHECK(eqs[0].profile == make_profile(1, 1));
    CHECK(std::find(eqs[0].conditions.begin(), eqs[0].conditions.end(), "1a") != eqs[0].conditions.end());
  }
  SUBCASE("reference market: interior pair") {
    const auto eqs = enumerate_bne(reference_scenario());
    REQUIRE(eqs.size() == 1);
    CHECK(eqs[0].classification == Classification::BNE4);
    CHECK(eqs[0].profile[0] == doctest::Approx(kFourthBne).epsilon(1e-13));
    CHECK(eqs[0].profile[1] == doctest::Approx(kFourthBne).epsilon(1e-13));
    CHECK(eqs[0].conditions == std::vector<std::string>{"4a"});
    // Response slopes near -0.9 magnify the grid error about tenfold.
    for (const auto& p : brute_fixed_points(reference_scenario(), 1e-4)) {
      CHECK(std::abs(p[0] - kFourthBne) < 1e-3);
      CHECK(std::abs(p[1] - kFourthBne) < 1e-3);
    }
  }
  SUBCASE("load 260: store everything via 1d") {
    const auto eqs = enumerate_bne(with_load(260.0));
    REQUIRE(eqs.size() == 1);
    CHECK(eqs[0].profile == make_profile(1, 1));
    CHECK(eqs[0].conditions == std::vector<std::string>{"1d"});
    for (const auto& p : brute_fixed_points(with_load(260.0), 1e-3)) CHECK(p == make_profile(1, 1));
  }
}

TEST_CASE("verify_bne") {
  CHECK(verify_bne(make_profile(0.874811463046757, 0.874811463046757), reference_scenario(), 1e-6));
  CHECK_FALSE(verify_bne(make_profile(1, 1), reference_scenario(), 1e-6));
  CHECK(verify_bne(make_profile(1, 1), with_load(400.0), 1e-9));
}

TEST_CASE("fourth equilibrium closed form solves the stationarity system") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 1000; ++i) {
    const Scenario s = random_scenario(rng);
    const StrategyProfile closed = fourth_bne_profile(s);
    const Eigen::Vector2d solved = interior_pair_by_linear_solve(s);
    if (!closed.allFinite() || closed.cwiseAbs().maxCoeff() > 1e6) continue;
    CHECK(std::abs(closed[0] - solved[0]) <= 1e-12 * std::max(1.0, std::abs(solved[0])));
    CHECK(std::abs(closed[1] - solved[1]) <= 1e-12 * std::max(1.0, std::abs(solved[1])));
  }
}

TEST_CASE("enumerated equilibria verify and 1a is exclusive") {
  std::mt19937_64 rng(14);
  int with_1a = 0, total = 0;
  for (int i = 0; i < 3000; ++i) {
    const Scenario s = random_scenario(rng);
    const auto eqs = enumerate_bne(s);
    total += static_cast<int>(eqs.size());
    for (const auto& e : eqs) CHECK(verify_bne(e.profile, s, 1e-9));

    const auto cands = bne_candidates(s);
    const bool cond_1a = std::find(cands[0].conditions.begin(), cands[0].conditions.end(), "1a") !=
                         cands[0].conditions.end();
    if (cond_1a) {
      ++with_1a;
      REQUIRE(eqs.size() == 1);
      CHECK(eqs[0].profile == make_profile(1, 1));
    }
  }
  CHECK(with_1a > 10);
  CHECK(total > 1000);
}

TEST_CASE("two-player closed forms reject other sizes") {
  Scenario s = reference_scenario();
  s.microgrids.push_back({50.0, 100.0});
  s.grid.n_players = 3;
  CHECK_THROWS_AS(expected_utility_cgt(0, Eigen::Vector3d(1, 1, 1), s), NotTwoPlayer);
  CHECK_THROWS_AS(best_response_cgt(0, 0.5, s), NotTwoPlayer);
  CHECK_THROWS_AS(enumerate_bne(s), NotTwoPlayer);
}
