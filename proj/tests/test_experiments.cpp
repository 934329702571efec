#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gridstore/experiments.hpp"

using namespace gridstore;

namespace {

Scenario framed_reference(double r) {
  Scenario s = reference_scenario();
  ProspectParams p;
  p.r = r;
  s.prospect = {p, p};
  return s;
}

SweepSpec small_spec(SweptParameter param, std::vector<double> values) {
  SweepSpec spec;
  spec.base = framed_reference(11.5);
  spec.swept_parameter = param;
  spec.values = std::move(values);
  spec.solver.grid_step = 0.01;
  spec.solver.tol = 1e-6;
  return spec;
}

std::string csv_of(const SweepTable& t) {
  std::ostringstream os;
  write_csv(t, os);
  return os.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("step values") {
  CHECK(step_values(5.0, 16.0, 0.25).size() == 45);
  CHECK(step_values(1.0, 4.0, 0.5) == std::vector<double>{1, 1.5, 2, 2.5, 3, 3.5, 4});
  CHECK(step_values(5.0, 25.0, 0.5).back() == 25.0);
  CHECK_THROWS(step_values(1.0, 0.0, 0.5));
  CHECK_THROWS(step_values(1.0, 2.0, 0.0));
}

TEST_CASE("sweep spec validation") {
  SweepSpec spec = small_spec(SweptParameter::ReferencePoint, {});
  CHECK_THROWS_AS(check_sweep_spec(spec), std::invalid_argument);
  spec.values = {1.0, 1.0};
  CHECK_THROWS_AS(check_sweep_spec(spec), std::invalid_argument);
  spec.values = {2.0, 1.0};
  CHECK_THROWS_AS(check_sweep_spec(spec), std::invalid_argument);
  spec.values = {1.0, 2.0};
  CHECK_NOTHROW(check_sweep_spec(spec));
}

TEST_CASE("reference point sweep layout") {
  const SweepSpec spec = small_spec(SweptParameter::ReferencePoint, {5.0, 10.0, 12.0, 16.0});
  const SweepTable t = sweep_reference_point(spec);
  REQUIRE(t.rows.size() == 5);
  CHECK(t.rows[0].sweep_param == "cgt_baseline");
  CHECK_FALSE(t.rows[0].value.has_value());

  const auto eqs = enumerate_bne(spec.base);
  REQUIRE(eqs.size() == 1);
  CHECK(t.rows[0].alpha == eqs[0].profile);
  CHECK(t.rows[0].classification == to_string(eqs[0].classification));
  CHECK(t.rows[0].total_stored_kwh == eqs[0].profile[0] * 120.0 + eqs[0].profile[1] * 120.0);

  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    CHECK(t.rows[i].sweep_param == "reference_point");
    CHECK(*t.rows[i].value == spec.values[i - 1]);
    CHECK(t.rows[i].converged);
    CHECK(t.rows[i].total_stored_kwh ==
          doctest::Approx(120.0 * (t.rows[i].alpha[0] + t.rows[i].alpha[1])));
  }

  const auto lines = lines_of(csv_of(t));
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] ==
        "sweep_param,value,alpha_1,alpha_2,total_stored_kwh,expected_utility_1,"
        "expected_utility_2,classification,converged,iterations");
  CHECK(lines[1].rfind("cgt_baseline,,0.874811463,0.874811463,209.954751,", 0) == 0);
}

TEST_CASE("sweeps are reproducible across thread counts") {
  const SweepSpec spec = small_spec(SweptParameter::ReferencePoint, {8.0, 11.0, 12.5, 14.0});
  setenv("GRIDSTORE_THREADS", "1", 1);
  const std::string one = csv_of(sweep_reference_point(spec));
  setenv("GRIDSTORE_THREADS", "3", 1);
  const std::string three = csv_of(sweep_reference_point(spec));
  unsetenv("GRIDSTORE_THREADS");
  CHECK(one == three);
  CHECK(sweep_threads() >= 1);
}

TEST_CASE("emergency price sweep") {
  SweepSpec spec = small_spec(SweptParameter::EmergencyPrice, {5.0, 12.0});
  spec.rho_c_values = {10.2, 12.0};
  const SweepTable t = sweep_emergency_price(spec);
  CHECK(t.rows.size() == 4);
  CHECK(t.extra_columns == std::vector<std::string>{"rho_c", "pct_deviation_from_r_min"});
  CHECK(t.rows[0].extra[1] == 0.0);
  CHECK(max_relative_deviation(t, 10.2) >= 0.0);
  CHECK(max_relative_deviation(t, 12.0) > max_relative_deviation(t, 10.2));

  spec.rho_c_values = {9.0};
  CHECK_THROWS(sweep_emergency_price(spec));
}

TEST_CASE("lambda sweep") {
  const SweepTable t = sweep_lambda(small_spec(SweptParameter::Lambda, {1.0, 4.0}));
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].sweep_param == "lambda");
  CHECK(t.rows[1].total_stored_kwh <= t.rows[0].total_stored_kwh);
}

TEST_CASE("asymmetric sweep") {
  SweepSpec spec = small_spec(SweptParameter::ReferencePointAsymmetric, {5.0, 13.0});
  const SweepTable t = asymmetric_equilibrium(spec);
  REQUIRE(t.rows.size() == 2);
  // Low reference: both stay near the classical pair 0.8748.
  CHECK(std::abs(t.rows[0].alpha[0] - 0.8748) < 0.025);
  CHECK(std::abs(t.rows[0].alpha[1] - 0.8748) < 0.025);
  CHECK(std::abs(t.rows[1].alpha[0] - 0.625) < 0.02);
  CHECK(t.rows[1].alpha[1] == 1.0);
}

TEST_CASE("price search") {
  SolverSettings st;
  st.grid_step = 0.01;
  const Scenario base = framed_reference(11.5);
  const auto res = required_emergency_price_for(base, 1.0, 11.5, st);
  // Resolution grid of one cent.
  CHECK(std::abs(res.rho_c * 100.0 - std::round(res.rho_c * 100.0)) < 1e-9);
  CHECK(res.rho_c > 10.0);
  CHECK(res.row.total_stored_kwh >= 200.0);

  // One cent lower does not cover the load.
  const Scenario lower = [&] {
    Scenario s = base;
    s.grid.rho_c = res.rho_c - 0.01;
    for (auto& p : s.prospect) p->lambda = 1.0;
    return s;
  }();
  if (lower.grid.rho_c * lower.grid.theta > lower.grid.rho) {
    const auto below = iterate_best_response(lower, make_profile(1, 1), st, {true, true});
    CHECK(120.0 * (below.profile[0] + below.profile[1]) < 200.0);
  }

  PriceSearchOptions impossible;
  impossible.coverage_target = 1000.0;
  CHECK_THROWS_AS(required_emergency_price_for(base, 1.0, 11.5, st, impossible), NoCoveragePrice);

  const std::vector<double> lambdas{1.0};
  const SweepTable t = required_emergency_price(base, lambdas, 11.5, st, impossible);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].classification == "NoCoveragePrice");
  CHECK(std::isnan(t.rows[0].extra[1]));
}

TEST_CASE("sweep files") {
  const auto dir = std::filesystem::temp_directory_path() / "gridstore_test_experiments";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "t.csv").string();
  const SweepTable t = sweep_reference_point(small_spec(SweptParameter::ReferencePoint, {5.0}));
  write_sweep_files(t, path, {{"note", "x"}});
  std::ifstream csv(path), meta(path + ".meta.json");
  std::stringstream a, b;
  a << csv.rdbuf();
  b << meta.rdbuf();
  CHECK(a.str() == csv_of(t));
  CHECK(nlohmann::json::parse(b.str())["note"] == "x");
  std::filesystem::remove_all(dir);
}
