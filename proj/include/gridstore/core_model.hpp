#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gridstore/errors.hpp"

namespace gridstore {

/// Storage fractions, one per microgrid operator, each in [0, 1].
using StrategyProfile = Eigen::VectorXd;
/// Energy amounts in kWh, one per microgrid.
using EnergyVector = Eigen::VectorXd;

/// Market-wide parameters. Prices in $/kWh, energy in kWh.
struct GridParams {
  double rho = 0.1;      // market price
  double rho_c = 11.6;   // emergency price
  double theta = 0.01;   // emergency probability
  double l_c = 200.0;    // critical load
  int n_players = 2;

  /// Expected emergency revenue per stored kWh, theta * rho_c.
  double emergency_value() const { return theta * rho_c; }
};

/// One microgrid's realized surplus (its type) and its storage capacity.
struct MicrogridConfig {
  double q = 120.0;
  double q_max = 150.0;
};

/// Uniform belief over an opponent's surplus on [0, upper].
struct Belief {
  double upper = 1.0;

  double density(double x) const {
    return (x >= 0.0 && x <= upper) ? 1.0 / upper : 0.0;
  }
};

/// Framing parameters of a prospect-theoretic operator. Defaults are the
/// commonly used experimental estimates (lambda 2.25, exponents 0.88).
struct ProspectParams {
  double r = 0.0;
  double lambda = 2.25;
  double beta_plus = 0.88;
  double beta_minus = 0.88;
};

struct Scenario {
  GridParams grid;
  std::vector<MicrogridConfig> microgrids;
  // Empty, or one entry per player. An empty optional marks a rational player.
  std::vector<std::optional<ProspectParams>> prospect;

  int n_players() const { return static_cast<int>(microgrids.size()); }
  EnergyVector surpluses() const;
  Belief belief(int player, int opponent) const;
  const std::optional<ProspectParams>& prospect_of(int player) const;
  bool is_prospect(int player) const { return prospect_of(player).has_value(); }
  void set_prospect(int player, std::optional<ProspectParams> p);
};

/// Two identical microgrids with Q = 120 kWh, Q_max = 150 kWh under the
/// reference market (rho 0.1, rho_c 11.6, theta 0.01, L_c 200). No framing.
Scenario reference_scenario();

StrategyProfile make_profile(double alpha_1, double alpha_2);

enum class ViolationKind {
  IncentiveViolation,
  CapacityExceedsCriticalLoad,
  SurplusOutOfRange,
  BadProbability,
  NonPositiveParameter,
  PlayerCountMismatch,
  BadProspectParams,
  NonFinite,
};

std::string to_string(ViolationKind kind);

struct InvariantCheck {
  std::string name;   // e.g. "grid.theta*grid.rho_c > grid.rho"
  ViolationKind kind;
  bool passed = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<InvariantCheck> checks;

  bool ok() const;
  std::vector<InvariantCheck> violations() const;
  bool has(ViolationKind kind) const;
};

/// Checks every invariant of the scenario types. The report lists each check
/// with its outcome, so callers can print a full pass/fail table.
ValidationReport validate_scenario(const Scenario& s);

class InvalidScenario : public Error {
 public:
  explicit InvalidScenario(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Throws InvalidScenario unless validate_scenario passes.
const Scenario& require_valid(const Scenario& s);

/// Energy bought from each microgrid during an emergency. When total stored
/// energy exceeds L_c the excess is split evenly and removed from every
/// player's stored amount, clamped at zero.
EnergyVector purchased_energy(const StrategyProfile& profile,
                              const EnergyVector& surpluses,
                              const GridParams& grid);

/// Ex-post payoff of one operator for realized surpluses.
double realized_utility(int player, const StrategyProfile& profile,
                        const EnergyVector& surpluses, const GridParams& grid);

}  // namespace gridstore
