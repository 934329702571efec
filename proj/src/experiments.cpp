#include "gridstore/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "gridstore/cgt_equilibrium.hpp"
#include "gridstore/scenario_io.hpp"

namespace gridstore {

std::string to_string(SweptParameter p) {
  switch (p) {
    case SweptParameter::ReferencePoint: return "reference_point";
    case SweptParameter::EmergencyPrice: return "emergency_price";
    case SweptParameter::Lambda: return "lambda";
    case SweptParameter::ReferencePointAsymmetric: return "reference_point_asymmetric";
  }
  return "unknown";
}

void check_sweep_spec(const SweepSpec& spec) {
  if (spec.values.empty()) throw std::invalid_argument("sweep values are empty");
  for (std::size_t i = 1; i < spec.values.size(); ++i)
    if (!(spec.values[i] > spec.values[i - 1]))
      throw std::invalid_argument("sweep values must be strictly increasing");
  check_settings(spec.solver);
}

std::vector<double> step_values(double from, double to, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("sweep step must be positive");
  if (to < from) throw std::invalid_argument("sweep end lies below its start");
  const auto n = static_cast<long>(std::floor((to - from) / step * (1.0 + 1e-9) + 1e-9));
  std::vector<double> out;
  out.reserve(n + 1);
  for (long i = 0; i <= n; ++i) out.push_back(from + static_cast<double>(i) * step);
  return out;
}

unsigned sweep_threads() {
  if (const char* env = std::getenv("GRIDSTORE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs body(i) for i in [0, n). Results are written by index, so output order
// never depends on scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(sweep_threads(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double total_stored(const StrategyProfile& alpha, const Scenario& s) {
  return alpha.dot(s.surpluses());
}

SweepRow solve_row(const std::string& param, double value, const Scenario& s,
                   const StrategyProfile& initial, const SolverSettings& settings,
                   std::array<bool, 2> framed) {
  require_valid(s);
  SweepRow row;
  row.sweep_param = param;
  row.value = value;
  try {
    const EquilibriumResult r = iterate_best_response(s, initial, settings, framed);
    row.alpha = r.profile;
    row.classification = to_string(r.classification);
    row.converged = r.converged;
    row.iterations = r.iterations;
  } catch (const CycleDetected& e) {
    row.alpha = e.first();
    row.classification = to_string(Classification::CycleDetected);
    row.converged = false;
    row.iterations = e.iterations();
  }
  row.total_stored_kwh = total_stored(row.alpha, s);
  row.expected_utility = Eigen::Vector2d(expected_utility_cgt(0, row.alpha, s),
                                         expected_utility_cgt(1, row.alpha, s));
  return row;
}

Scenario rational_copy(const Scenario& base) {
  Scenario s = base;
  s.prospect.clear();
  return s;
}

ProspectParams framing_for(const Scenario& base, int player) {
  return base.prospect_of(player).value_or(ProspectParams{});
}

}  // namespace

Scenario with_reference_point(const Scenario& base, double r) {
  Scenario s = base;
  for (int n = 0; n < s.n_players(); ++n) {
    ProspectParams p = framing_for(base, n);
    p.r = r;
    s.set_prospect(n, p);
  }
  return s;
}

SweepTable sweep_reference_point(const SweepSpec& spec) {
  check_sweep_spec(spec);
  SweepTable table;

  const Scenario rational = rational_copy(spec.base);
  require_valid(rational);
  for (const auto& eq : enumerate_bne(rational)) {
    SweepRow row;
    row.sweep_param = "cgt_baseline";
    row.alpha = eq.profile;
    row.total_stored_kwh = total_stored(eq.profile, rational);
    row.expected_utility = eq.expected_utilities;
    row.classification = to_string(eq.classification);
    row.converged = true;
    row.iterations = 0;
    table.rows.push_back(row);
  }

  std::vector<SweepRow> rows(spec.values.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    const Scenario s = with_reference_point(spec.base, spec.values[i]);
    rows[i] = solve_row("reference_point", spec.values[i], s, spec.initial, spec.solver,
                        {true, true});
  });
  table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  return table;
}

SweepTable sweep_lambda(const SweepSpec& spec) {
  check_sweep_spec(spec);
  SweepTable table;
  table.rows.resize(spec.values.size());
  parallel_for(spec.values.size(), [&](std::size_t i) {
    Scenario s = spec.base;
    for (int n = 0; n < s.n_players(); ++n) {
      ProspectParams p = framing_for(spec.base, n);
      p.lambda = spec.values[i];
      s.set_prospect(n, p);
    }
    table.rows[i] = solve_row("lambda", spec.values[i], s, spec.initial, spec.solver, {true, true});
  });
  return table;
}

SweepTable sweep_emergency_price(const SweepSpec& spec) {
  check_sweep_spec(spec);
  if (spec.rho_c_values.empty()) throw std::invalid_argument("no emergency prices to sweep");

  const std::size_t per_price = spec.values.size();
  SweepTable table;
  table.extra_columns = {"rho_c", "pct_deviation_from_r_min"};
  table.rows.resize(spec.rho_c_values.size() * per_price);

  parallel_for(table.rows.size(), [&](std::size_t idx) {
    const double rho_c = spec.rho_c_values[idx / per_price];
    const double r = spec.values[idx % per_price];
    Scenario s = spec.base;
    s.grid.rho_c = rho_c;
    for (int n = 0; n < s.n_players(); ++n) {
      ProspectParams p = framing_for(spec.base, n);
      p.r = r;
      p.lambda = spec.lambda;
      s.set_prospect(n, p);
    }
    table.rows[idx] = solve_row("reference_point", r, s, spec.initial, spec.solver, {true, true});
  });

  for (std::size_t j = 0; j < spec.rho_c_values.size(); ++j) {
    const double first = table.rows[j * per_price].total_stored_kwh;
    for (std::size_t i = 0; i < per_price; ++i) {
      SweepRow& row = table.rows[j * per_price + i];
      row.extra = {spec.rho_c_values[j], 100.0 * (row.total_stored_kwh - first) / first};
    }
  }
  return table;
}

double max_relative_deviation(const SweepTable& table, double rho_c) {
  double worst = 0.0;
  bool seen = false;
  for (const auto& row : table.rows) {
    if (row.extra.size() < 2 || row.extra[0] != rho_c) continue;
    seen = true;
    worst = std::max(worst, std::abs(row.extra[1]) / 100.0);
  }
  if (!seen) throw std::invalid_argument(fmt::format("no rows for rho_c = {}", rho_c));
  return worst;
}

SweepTable asymmetric_equilibrium(const SweepSpec& spec) {
  check_sweep_spec(spec);
  SweepTable table;
  table.rows.resize(spec.values.size());
  parallel_for(spec.values.size(), [&](std::size_t i) {
    Scenario s = spec.base;
    ProspectParams p = framing_for(spec.base, 0);
    p.r = spec.values[i];
    s.prospect = {p, std::nullopt};
    table.rows[i] = solve_row("reference_point_asymmetric", spec.values[i], s, spec.initial,
                              spec.solver, {true, false});
  });
  return table;
}

PriceSearchResult required_emergency_price_for(const Scenario& base, double lambda, double r,
                                               const SolverSettings& settings,
                                               const PriceSearchOptions& options) {
  const double target = options.coverage_target.value_or(base.grid.l_c);
  const double unit = options.resolution;

  Scenario framed = base;
  for (int n = 0; n < framed.n_players(); ++n) {
    ProspectParams p = framing_for(base, n);
    p.r = r;
    p.lambda = lambda;
    framed.set_prospect(n, p);
  }

  // Prices are searched on the integer lattice k * resolution.
  const double floor_price = base.grid.rho / base.grid.theta * (1.0 + 1e-6);
  const long k_lo = static_cast<long>(std::ceil(floor_price / unit - 1e-9));
  const long k_hi = static_cast<long>(std::floor(options.rho_c_hi / unit + 1e-9));
  const long coarse = std::max(1L, std::lround(options.coarse_step / unit));

  std::map<long, SweepRow> solved;
  const auto solve_at = [&](long k) -> const SweepRow& {
    auto it = solved.find(k);
    if (it != solved.end()) return it->second;
    Scenario s = framed;
    s.grid.rho_c = static_cast<double>(k) * unit;
    return solved
        .emplace(k, solve_row("lambda", lambda, s, make_profile(1.0, 1.0), settings, {true, true}))
        .first->second;
  };
  const auto covers = [&](long k) { return solve_at(k).total_stored_kwh >= target; };

  PriceSearchResult out;
  out.lambda = lambda;
  if (k_hi < k_lo || !covers(k_hi))
    throw NoCoveragePrice(fmt::format("no emergency price up to {} covers {} kWh at lambda {}",
                                      options.rho_c_hi, target, lambda),
                          options.rho_c_hi);

  long lo = k_lo - 1, hi = k_hi;  // lo never covers (or is below range), hi covers
  if (covers(k_lo)) hi = k_lo;
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (covers(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  // Coverage must not occur below the bisection result; otherwise the search
  // bracket was not monotone and the first crossing comes from a scan.
  long first_coarse = -1;
  for (long k = k_lo; k < hi; k += coarse) {
    if (covers(k)) {
      first_coarse = k;
      break;
    }
  }
  if (first_coarse >= 0) {
    out.used_scan = true;
    hi = first_coarse;
    for (long k = std::max(k_lo, first_coarse - coarse + 1); k < first_coarse; ++k) {
      if (covers(k)) {
        hi = k;
        break;
      }
    }
  }

  out.rho_c = static_cast<double>(hi) * unit;
  out.row = solve_at(hi);
  return out;
}

SweepTable required_emergency_price(const Scenario& base, std::span<const double> lambdas, double r,
                                    const SolverSettings& settings,
                                    const PriceSearchOptions& options) {
  SweepSpec spec;
  spec.values.assign(lambdas.begin(), lambdas.end());
  spec.solver = settings;
  check_sweep_spec(spec);

  SweepTable table;
  table.extra_columns = {"reference_point", "rho_c_required"};
  table.rows.resize(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    SweepRow row;
    try {
      const PriceSearchResult res = required_emergency_price_for(base, lambdas[i], r, settings, options);
      row = res.row;
      row.extra = {r, res.rho_c};
    } catch (const NoCoveragePrice&) {
      row.alpha = make_profile(std::nan(""), std::nan(""));
      row.total_stored_kwh = std::nan("");
      row.expected_utility = Eigen::Vector2d::Constant(std::nan(""));
      row.classification = "NoCoveragePrice";
      row.converged = false;
      row.extra = {r, std::nan("")};
    }
    row.sweep_param = "lambda";
    row.value = lambdas[i];
    table.rows[i] = row;
  });
  return table;
}

namespace {

std::string number(double v) { return fmt::format("{:.9g}", v); }

}  // namespace

void write_csv(const SweepTable& table, std::ostream& out) {
  out << "sweep_param,value,alpha_1,alpha_2,total_stored_kwh,expected_utility_1,"
         "expected_utility_2,classification,converged,iterations";
  for (const auto& c : table.extra_columns) out << ',' << c;
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.sweep_param << ',' << (row.value ? number(*row.value) : "") << ','
        << number(row.alpha[0]) << ',' << number(row.alpha[1]) << ','
        << number(row.total_stored_kwh) << ',' << number(row.expected_utility[0]) << ','
        << number(row.expected_utility[1]) << ',' << row.classification << ','
        << (row.converged ? "true" : "false") << ',' << row.iterations;
    for (double e : row.extra) out << ',' << number(e);
    out << '\n';
  }
}

void write_sweep_files(const SweepTable& table, const std::string& path,
                       const nlohmann::json& metadata) {
  std::ofstream csv(path);
  if (!csv) throw Error(fmt::format("cannot write '{}'", path));
  write_csv(table, csv);
  std::ofstream meta(path + ".meta.json");
  if (!meta) throw Error(fmt::format("cannot write '{}.meta.json'", path));
  meta << metadata.dump(2) << '\n';
}

}  // namespace gridstore
