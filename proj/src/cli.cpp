#include "gridstore/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "gridstore/cgt_equilibrium.hpp"
#include "gridstore/experiments.hpp"
#include "gridstore/scenario_io.hpp"
#include "gridstore/solver_oracles.hpp"

namespace gridstore::cli {

namespace {

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  std::string out_path;

  double grid_step = SolverSettings{}.grid_step;
  double tol = SolverSettings{}.tol;
  int max_iters = SolverSettings{}.max_iters;
  std::vector<double> init{1.0, 1.0};

  std::string param = "reference-point";
  std::optional<double> from, to, step;
  std::vector<double> rho_c_values{10.2, 11.0, 12.0};
  double lambda = 4.0;

  double reference = 11.5;
  double lambda_from = 1.0, lambda_to = 4.0, lambda_step = 0.5;
  double rho_c_hi = 30.0;
};

SolverSettings settings_of(const Options& o) {
  SolverSettings s;
  s.grid_step = o.grid_step;
  s.tol = o.tol;
  s.max_iters = o.max_iters;
  return s;
}

void add_scenario_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "Scenario JSON file")->required();
  cmd->add_option("--override", o.overrides, "Field override, e.g. grid.rho_c=12")
      ->take_all()
      ->allow_extra_args(false);
}

void add_solver_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--grid-step", o.grid_step, "Action grid spacing");
  cmd->add_option("--tol", o.tol, "Fixed-point tolerance");
  cmd->add_option("--max-iters", o.max_iters, "Best-response rounds");
}

Scenario load_valid(const Options& o) {
  Scenario s = load_scenario(o.config, o.overrides);
  require_valid(s);
  return s;
}

std::string num(double v) { return fmt::format("{:.9g}", v); }

std::string join(const std::vector<std::string>& items) {
  if (items.empty()) return "-";
  std::string s;
  for (const auto& i : items) s += (s.empty() ? "" : ",") + i;
  return s;
}

void print_scenario(std::ostream& out, const Scenario& s) {
  fmt::print(out, "scenario: rho={} rho_c={} theta={} l_c={}", num(s.grid.rho), num(s.grid.rho_c),
             num(s.grid.theta), num(s.grid.l_c));
  for (int n = 0; n < s.n_players(); ++n)
    fmt::print(out, " | player {}: q={} q_max={}", n + 1, num(s.microgrids[n].q),
               num(s.microgrids[n].q_max));
  out << '\n';
}

int cmd_validate(const Options& o, std::ostream& out) {
  const Scenario s = load_scenario(o.config, o.overrides);
  const ValidationReport report = validate_scenario(s);
  for (const auto& c : report.checks) {
    if (c.passed) {
      fmt::print(out, "PASS  {}\n", c.name);
    } else {
      fmt::print(out, "FAIL  {}  [{}] {}\n", c.name, to_string(c.kind), c.detail);
    }
  }
  fmt::print(out, "{}\n", report.ok() ? "valid" : "invalid");
  return report.ok() ? kExitOk : kExitInvalidScenario;
}

int cmd_solve_cgt(const Options& o, std::ostream& out) {
  const Scenario s = load_valid(o);
  print_scenario(out, s);
  const auto results = enumerate_bne(s);
  fmt::print(out, "{:<14}{:>14}{:>14}{:>14}{:>14}  {}\n", "classification", "alpha_1", "alpha_2",
             "E[U_1]", "E[U_2]", "conditions");
  for (const auto& r : results) {
    fmt::print(out, "{:<14}{:>14}{:>14}{:>14}{:>14}  {}\n", to_string(r.classification),
               num(r.profile[0]), num(r.profile[1]), num(r.expected_utilities[0]),
               num(r.expected_utilities[1]), join(r.conditions));
  }
  if (results.empty()) out << "no pure-strategy equilibrium among the closed-form candidates\n";
  return kExitOk;
}

int cmd_enumerate(const Options& o, std::ostream& out) {
  const Scenario s = load_valid(o);
  print_scenario(out, s);
  fmt::print(out, "{:<14}{:>14}{:>14}  {:<9}{:<9}{}\n", "candidate", "alpha_1", "alpha_2",
             "in_range", "verified", "conditions");
  for (const auto& c : bne_candidates(s)) {
    fmt::print(out, "{:<14}{:>14}{:>14}  {:<9}{:<9}{}\n", to_string(c.classification),
               num(c.profile[0]), num(c.profile[1]), c.in_range ? "yes" : "no",
               c.verified ? "yes" : "no", join(c.conditions));
  }
  return kExitOk;
}

int cmd_solve_pt(const Options& o, std::ostream& out, std::ostream& err) {
  const Scenario s = load_valid(o);
  const SolverSettings settings = settings_of(o);
  for (const auto& w : check_settings(settings)) err << "warning: " << w << '\n';
  if (o.init.size() != 2) throw std::invalid_argument("--init needs two values");

  print_scenario(out, s);
  const auto framed = framing_flags(s);
  for (int n = 0; n < 2; ++n) {
    if (framed[n]) {
      const auto& p = *s.prospect_of(n);
      fmt::print(out, "player {}: framed r={} lambda={} beta_plus={} beta_minus={}\n", n + 1,
                 num(p.r), num(p.lambda), num(p.beta_plus), num(p.beta_minus));
    } else {
      fmt::print(out, "player {}: rational\n", n + 1);
    }
  }

  try {
    const auto r = iterate_best_response(s, make_profile(o.init[0], o.init[1]), settings, framed);
    fmt::print(out, "classification: {}\n", to_string(r.classification));
    fmt::print(out, "alpha_1: {}\nalpha_2: {}\n", num(r.profile[0]), num(r.profile[1]));
    fmt::print(out, "total_stored_kwh: {}\n", num(r.profile.dot(s.surpluses())));
    fmt::print(out, "expected_utility_1: {}\nexpected_utility_2: {}\n",
               num(r.expected_utilities[0]), num(r.expected_utilities[1]));
    fmt::print(out, "converged: {}\niterations: {}\nlast_delta: {}\n", r.converged ? "true" : "false",
               r.iterations, num(r.last_delta));
    return r.converged ? kExitOk : kExitNotConverged;
  } catch (const CycleDetected& e) {
    fmt::print(out, "classification: CycleDetected\n");
    fmt::print(out, "cycle: ({}, {}) <-> ({}, {})\n", num(e.first()[0]), num(e.first()[1]),
               num(e.second()[0]), num(e.second()[1]));
    fmt::print(out, "converged: false\niterations: {}\n", e.iterations());
    return kExitNotConverged;
  }
}

nlohmann::json settings_json(const SolverSettings& s) {
  return {{"grid_step", s.grid_step}, {"tol", s.tol}, {"max_iters", s.max_iters},
          {"quad_rel_tol", s.quad_rel_tol}};
}

int cmd_sweep(const Options& o, std::ostream& out) {
  SweepSpec spec;
  spec.base = load_valid(o);
  spec.solver = settings_of(o);
  spec.output_path = o.out_path;

  double from = 5.0, to = 16.0, step = 0.25;
  if (o.param == "reference-point") {
    spec.swept_parameter = SweptParameter::ReferencePoint;
  } else if (o.param == "emergency-price") {
    spec.swept_parameter = SweptParameter::EmergencyPrice;
    spec.rho_c_values = o.rho_c_values;
    spec.lambda = o.lambda;
  } else if (o.param == "lambda") {
    spec.swept_parameter = SweptParameter::Lambda;
    from = 1.0, to = 4.0, step = 0.5;
  } else if (o.param == "reference-point-asymmetric") {
    spec.swept_parameter = SweptParameter::ReferencePointAsymmetric;
    from = 5.0, to = 25.0, step = 0.5;
  } else {
    throw std::invalid_argument(fmt::format("unknown sweep parameter '{}'", o.param));
  }
  spec.values = step_values(o.from.value_or(from), o.to.value_or(to), o.step.value_or(step));

  if (spec.swept_parameter == SweptParameter::EmergencyPrice) {
    for (double rc : spec.rho_c_values) {
      Scenario probe = spec.base;
      probe.grid.rho_c = rc;
      require_valid(probe);
    }
  }

  SweepTable table;
  switch (spec.swept_parameter) {
    case SweptParameter::ReferencePoint: table = sweep_reference_point(spec); break;
    case SweptParameter::EmergencyPrice: table = sweep_emergency_price(spec); break;
    case SweptParameter::Lambda: table = sweep_lambda(spec); break;
    case SweptParameter::ReferencePointAsymmetric: table = asymmetric_equilibrium(spec); break;
  }

  nlohmann::json meta = {{"sweep", to_string(spec.swept_parameter)},
                         {"values", spec.values},
                         {"scenario", scenario_to_json(spec.base)},
                         {"solver", settings_json(spec.solver)},
                         {"initial_profile", {spec.initial[0], spec.initial[1]}}};
  if (spec.swept_parameter == SweptParameter::EmergencyPrice) {
    meta["rho_c_values"] = spec.rho_c_values;
    meta["lambda"] = spec.lambda;
  }
  write_sweep_files(table, o.out_path, meta);
  out << o.out_path << '\n';
  return kExitOk;
}

int cmd_find_price(const Options& o, std::ostream& out) {
  const Scenario base = load_valid(o);
  const SolverSettings settings = settings_of(o);
  const auto lambdas = step_values(o.lambda_from, o.lambda_to, o.lambda_step);
  PriceSearchOptions opts;
  opts.rho_c_hi = o.rho_c_hi;
  const SweepTable table = required_emergency_price(base, lambdas, o.reference, settings, opts);

  nlohmann::json meta = {{"sweep", "required_emergency_price"},
                         {"lambdas", lambdas},
                         {"reference_point", o.reference},
                         {"coverage_target_kwh", base.grid.l_c},
                         {"rho_c_hi", opts.rho_c_hi},
                         {"resolution", opts.resolution},
                         {"scenario", scenario_to_json(base)},
                         {"solver", settings_json(settings)}};
  write_sweep_files(table, o.out_path, meta);
  out << o.out_path << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Storage equilibria of the two-microgrid emergency energy game", "gridstore"};
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "Check every scenario invariant");
  add_scenario_options(validate, o);

  auto* solve_cgt = app.add_subcommand("solve-cgt", "Classical Bayesian Nash equilibria");
  add_scenario_options(solve_cgt, o);

  auto* enumerate = app.add_subcommand("enumerate", "All closed-form candidates with conditions");
  add_scenario_options(enumerate, o);

  auto* solve_pt = app.add_subcommand("solve-pt", "Best-response iteration with framing");
  add_scenario_options(solve_pt, o);
  add_solver_options(solve_pt, o);
  solve_pt->add_option("--init", o.init, "Initial profile a1,a2")->delimiter(',')->expected(2);

  auto* sweep = app.add_subcommand("sweep", "Parameter sweep to CSV");
  add_scenario_options(sweep, o);
  add_solver_options(sweep, o);
  sweep->add_option("--param", o.param, "reference-point | emergency-price | lambda | "
                                        "reference-point-asymmetric");
  sweep->add_option("--from", o.from, "First sweep value");
  sweep->add_option("--to", o.to, "Last sweep value");
  sweep->add_option("--step", o.step, "Sweep increment");
  sweep->add_option("--rho-c", o.rho_c_values, "Emergency prices (emergency-price sweep)")
      ->delimiter(',');
  sweep->add_option("--lambda", o.lambda, "Loss multiplier (emergency-price sweep)");
  sweep->add_option("--out", o.out_path, "Output CSV")->required();

  auto* find_price = app.add_subcommand("find-price", "Emergency price covering L_c per lambda");
  add_scenario_options(find_price, o);
  add_solver_options(find_price, o);
  find_price->add_option("--reference", o.reference, "Reference point of both operators");
  find_price->add_option("--lambda-from", o.lambda_from, "First loss multiplier");
  find_price->add_option("--lambda-to", o.lambda_to, "Last loss multiplier");
  find_price->add_option("--lambda-step", o.lambda_step, "Loss multiplier increment");
  find_price->add_option("--rho-c-hi", o.rho_c_hi, "Highest emergency price searched");
  find_price->add_option("--out", o.out_path, "Output CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out);
    if (solve_cgt->parsed()) return cmd_solve_cgt(o, out);
    if (enumerate->parsed()) return cmd_enumerate(o, out);
    if (solve_pt->parsed()) return cmd_solve_pt(o, out, err);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (find_price->parsed()) return cmd_find_price(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const InvalidScenario& e) {
    for (const auto& v : e.report().violations())
      err << "invalid: [" << to_string(v.kind) << "] " << v.detail << '\n';
    return kExitInvalidScenario;
  } catch (const NotTwoPlayer& e) {
    err << "invalid: " << e.what() << '\n';
    return kExitInvalidScenario;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}

}  // namespace gridstore::cli
