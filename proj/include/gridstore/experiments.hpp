#pragma once

#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridstore/core_model.hpp"
#include "gridstore/solver_oracles.hpp"

namespace gridstore {

enum class SweptParameter { ReferencePoint, EmergencyPrice, Lambda, ReferencePointAsymmetric };

std::string to_string(SweptParameter p);

struct SweepSpec {
  Scenario base;
  SweptParameter swept_parameter = SweptParameter::ReferencePoint;
  std::vector<double> values;  // strictly increasing
  SolverSettings solver;
  std::string output_path;
  std::vector<double> rho_c_values;  // EmergencyPrice only
  double lambda = 4.0;               // EmergencyPrice only
  StrategyProfile initial = make_profile(1.0, 1.0);
};

/// Throws std::invalid_argument unless values are nonempty and strictly increasing.
void check_sweep_spec(const SweepSpec& spec);

/// from, from + step, ..., up to `to` inclusive (with a 1e-9 relative slack).
std::vector<double> step_values(double from, double to, double step);

struct SweepRow {
  std::string sweep_param;
  std::optional<double> value;  // empty for baseline rows
  StrategyProfile alpha = make_profile(0.0, 0.0);
  double total_stored_kwh = 0.0;
  Eigen::Vector2d expected_utility = Eigen::Vector2d::Zero();
  std::string classification;
  bool converged = true;
  int iterations = 0;
  std::vector<double> extra;  // one per SweepTable::extra_columns
};

struct SweepTable {
  std::vector<std::string> extra_columns;
  std::vector<SweepRow> rows;
};

/// Copy of `base` where every player frames payoffs with reference point r.
/// Players without parameters get the default framing parameters.
Scenario with_reference_point(const Scenario& base, double r);

/// One row per reference point with both players framed, preceded by one row
/// per classical equilibrium of the base scenario ("cgt_baseline").
SweepTable sweep_reference_point(const SweepSpec& spec);

/// Both players framed, loss multiplier swept; reference points from base.
SweepTable sweep_lambda(const SweepSpec& spec);

/// Reference-point sweep repeated for every emergency price in
/// spec.rho_c_values at loss multiplier spec.lambda. Extra columns: rho_c and
/// the percent deviation of total storage from the lowest reference point.
SweepTable sweep_emergency_price(const SweepSpec& spec);

/// Largest |total - total at the lowest R| / total at the lowest R among rows
/// of an emergency-price sweep with the given rho_c.
double max_relative_deviation(const SweepTable& table, double rho_c);

/// Player 0 framed with the swept reference point, player 1 rational.
SweepTable asymmetric_equilibrium(const SweepSpec& spec);

struct PriceSearchOptions {
  std::optional<double> coverage_target;  // defaults to the scenario's L_c
  double rho_c_hi = 30.0;
  double resolution = 0.01;
  double coarse_step = 0.1;
};

struct PriceSearchResult {
  double lambda = 1.0;
  double rho_c = std::numeric_limits<double>::quiet_NaN();
  SweepRow row;
  bool used_scan = false;  // monotonicity failed, ascending scan used
};

/// Smallest emergency price on the resolution grid at which both framed
/// players (reference r, loss multiplier lambda) store at least the coverage
/// target at equilibrium. Throws NoCoveragePrice if rho_c_hi falls short.
PriceSearchResult required_emergency_price_for(const Scenario& base, double lambda, double r,
                                               const SolverSettings& settings,
                                               const PriceSearchOptions& options = {});

/// One row per lambda; extra columns reference_point and rho_c_required
/// (NaN with classification NoCoveragePrice when no price suffices).
SweepTable required_emergency_price(const Scenario& base, std::span<const double> lambdas, double r,
                                    const SolverSettings& settings,
                                    const PriceSearchOptions& options = {});

/// CSV with header sweep_param,value,alpha_1,alpha_2,total_stored_kwh,
/// expected_utility_1,expected_utility_2,classification,converged,iterations
/// followed by the table's extra columns. Numbers use 9 significant digits.
void write_csv(const SweepTable& table, std::ostream& out);

/// Writes the CSV to `path` and a metadata sidecar to `path + ".meta.json"`.
void write_sweep_files(const SweepTable& table, const std::string& path,
                       const nlohmann::json& metadata);

/// Worker count for sweeps: GRIDSTORE_THREADS if set and positive, else the
/// hardware concurrency.
unsigned sweep_threads();

}  // namespace gridstore
