#include "gridstore/core_model.hpp"

#include <cmath>
#include <fmt/format.h>

namespace gridstore {

EnergyVector Scenario::surpluses() const {
  EnergyVector q(n_players());
  for (int i = 0; i < n_players(); ++i) q[i] = microgrids[i].q;
  return q;
}

Belief Scenario::belief(int /*player*/, int opponent) const {
  return Belief{microgrids.at(opponent).q_max};
}

const std::optional<ProspectParams>& Scenario::prospect_of(int player) const {
  static const std::optional<ProspectParams> rational;
  if (player < 0 || player >= static_cast<int>(prospect.size())) return rational;
  return prospect[player];
}

void Scenario::set_prospect(int player, std::optional<ProspectParams> p) {
  if (prospect.size() < microgrids.size()) prospect.resize(microgrids.size());
  prospect.at(player) = p;
}

Scenario reference_scenario() {
  Scenario s;
  s.grid = GridParams{};
  s.microgrids = {MicrogridConfig{120.0, 150.0}, MicrogridConfig{120.0, 150.0}};
  return s;
}

StrategyProfile make_profile(double alpha_1, double alpha_2) {
  StrategyProfile p(2);
  p << alpha_1, alpha_2;
  return p;
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::IncentiveViolation: return "IncentiveViolation";
    case ViolationKind::CapacityExceedsCriticalLoad: return "CapacityExceedsCriticalLoad";
    case ViolationKind::SurplusOutOfRange: return "SurplusOutOfRange";
    case ViolationKind::BadProbability: return "BadProbability";
    case ViolationKind::NonPositiveParameter: return "NonPositiveParameter";
    case ViolationKind::PlayerCountMismatch: return "PlayerCountMismatch";
    case ViolationKind::BadProspectParams: return "BadProspectParams";
    case ViolationKind::NonFinite: return "NonFinite";
  }
  return "Unknown";
}

bool ValidationReport::ok() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

std::vector<InvariantCheck> ValidationReport::violations() const {
  std::vector<InvariantCheck> out;
  for (const auto& c : checks)
    if (!c.passed) out.push_back(c);
  return out;
}

bool ValidationReport::has(ViolationKind kind) const {
  for (const auto& c : checks)
    if (!c.passed && c.kind == kind) return true;
  return false;
}

namespace {

class Checker {
 public:
  void expect(bool cond, ViolationKind kind, std::string name, std::string detail) {
    report_.checks.push_back({std::move(name), kind, cond, cond ? "" : std::move(detail)});
  }
  ValidationReport take() { return std::move(report_); }

 private:
  ValidationReport report_;
};

}  // namespace

ValidationReport validate_scenario(const Scenario& s) {
  Checker c;
  const GridParams& g = s.grid;

  const bool finite = std::isfinite(g.rho) && std::isfinite(g.rho_c) &&
                      std::isfinite(g.theta) && std::isfinite(g.l_c);
  c.expect(finite, ViolationKind::NonFinite, "grid values finite",
           "grid contains a non-finite value");
  c.expect(g.rho > 0.0, ViolationKind::NonPositiveParameter, "grid.rho > 0",
           fmt::format("grid.rho = {} must be > 0", g.rho));
  c.expect(g.rho_c > 0.0, ViolationKind::NonPositiveParameter, "grid.rho_c > 0",
           fmt::format("grid.rho_c = {} must be > 0", g.rho_c));
  c.expect(g.l_c > 0.0, ViolationKind::NonPositiveParameter, "grid.l_c > 0",
           fmt::format("grid.l_c = {} must be > 0", g.l_c));
  c.expect(g.theta >= 0.0 && g.theta <= 1.0, ViolationKind::BadProbability,
           "grid.theta in [0,1]", fmt::format("grid.theta = {} outside [0, 1]", g.theta));
  c.expect(g.emergency_value() > g.rho, ViolationKind::IncentiveViolation,
           "grid.theta*grid.rho_c > grid.rho",
           fmt::format("grid.theta*grid.rho_c = {} must exceed grid.rho = {}",
                       g.emergency_value(), g.rho));
  c.expect(g.n_players >= 2, ViolationKind::PlayerCountMismatch, "grid.n_players >= 2",
           fmt::format("grid.n_players = {} must be >= 2", g.n_players));
  c.expect(s.n_players() == g.n_players, ViolationKind::PlayerCountMismatch,
           "len(microgrids) == grid.n_players",
           fmt::format("{} microgrids for n_players = {}", s.n_players(), g.n_players));
  c.expect(s.prospect.empty() || s.prospect.size() == s.microgrids.size(),
           ViolationKind::PlayerCountMismatch, "len(prospect) == len(microgrids)",
           fmt::format("{} prospect entries for {} microgrids", s.prospect.size(),
                       s.microgrids.size()));

  for (int i = 0; i < s.n_players(); ++i) {
    const auto& mg = s.microgrids[i];
    const std::string at = fmt::format("microgrids[{}]", i);
    c.expect(std::isfinite(mg.q) && std::isfinite(mg.q_max), ViolationKind::NonFinite,
             at + " values finite", at + " contains a non-finite value");
    c.expect(mg.q >= 0.0 && mg.q <= mg.q_max, ViolationKind::SurplusOutOfRange,
             at + ".q in [0, q_max]",
             fmt::format("{}.q = {} outside [0, {}]", at, mg.q, mg.q_max));
    c.expect(mg.q_max < g.l_c, ViolationKind::CapacityExceedsCriticalLoad,
             at + ".q_max < grid.l_c",
             fmt::format("{}.q_max = {} must be below grid.l_c = {}", at, mg.q_max, g.l_c));
  }

  for (std::size_t i = 0; i < s.prospect.size(); ++i) {
    if (!s.prospect[i]) continue;
    const auto& p = *s.prospect[i];
    const std::string at = fmt::format("prospect[{}]", i);
    c.expect(std::isfinite(p.r), ViolationKind::NonFinite, at + ".r finite",
             at + ".r is not finite");
    c.expect(p.lambda >= 1.0, ViolationKind::BadProspectParams, at + ".lambda >= 1",
             fmt::format("{}.lambda = {} must be >= 1", at, p.lambda));
    c.expect(p.beta_plus > 0.0 && p.beta_plus <= 1.0, ViolationKind::BadProspectParams,
             at + ".beta_plus in (0,1]",
             fmt::format("{}.beta_plus = {} outside (0, 1]", at, p.beta_plus));
    c.expect(p.beta_minus > 0.0 && p.beta_minus <= 1.0, ViolationKind::BadProspectParams,
             at + ".beta_minus in (0,1]",
             fmt::format("{}.beta_minus = {} outside (0, 1]", at, p.beta_minus));
  }
  return c.take();
}

namespace {

std::string summarize(const ValidationReport& r) {
  std::string msg = "invalid scenario:";
  for (const auto& v : r.violations()) msg += " [" + to_string(v.kind) + "] " + v.detail + ";";
  return msg;
}

}  // namespace

InvalidScenario::InvalidScenario(ValidationReport report)
    : Error(summarize(report)), report_(std::move(report)) {}

const Scenario& require_valid(const Scenario& s) {
  auto report = validate_scenario(s);
  if (!report.ok()) throw InvalidScenario(std::move(report));
  return s;
}

namespace {

void check_dimensions(const StrategyProfile& profile, const EnergyVector& surpluses,
                      const GridParams& grid) {
  if (profile.size() != surpluses.size() || profile.size() != grid.n_players) {
    throw DimensionMismatch(fmt::format(
        "profile has {} entries, surpluses {}, grid.n_players {}", profile.size(),
        surpluses.size(), grid.n_players));
  }
}

}  // namespace

EnergyVector purchased_energy(const StrategyProfile& profile, const EnergyVector& surpluses,
                              const GridParams& grid) {
  check_dimensions(profile, surpluses, grid);
  const EnergyVector stored = profile.cwiseProduct(surpluses);
  const double total = stored.sum();
  if (total <= grid.l_c) return stored;
  const double cut = (total - grid.l_c) / static_cast<double>(grid.n_players);
  return (stored.array() - cut).max(0.0).matrix();
}

double realized_utility(int player, const StrategyProfile& profile,
                        const EnergyVector& surpluses, const GridParams& grid) {
  check_dimensions(profile, surpluses, grid);
  if (player < 0 || player >= grid.n_players)
    throw DimensionMismatch(fmt::format("player index {} out of range", player));
  const double q = surpluses[player];
  const double stored = profile[player] * q;
  const double market = grid.rho * (q - stored);
  // The first branch of the allocation returns `stored` unchanged, so one
  // expression covers both cases of the payoff.
  const double bought = purchased_energy(profile, surpluses, grid)[player];
  return market + grid.emergency_value() * bought;
}

}  // namespace gridstore
