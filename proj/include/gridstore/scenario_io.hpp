#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gridstore/core_model.hpp"

namespace gridstore {

// Scenario file layout:
//   {"grid": {"rho", "rho_c", "theta", "l_c"},
//    "microgrids": [{"q", "q_max"}, ...],
//    "prospect": [{"r", "lambda", "beta_plus", "beta_minus"} | null, ...]}
// "prospect" is optional; n_players is the number of microgrids.

Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& s);

/// Applies "dotted.path=value" overrides to a scenario document. Only the
/// documented scalar fields are accepted, e.g. grid.rho_c=12,
/// microgrids.0.q=100, prospect.1.r=13. Setting a field of a null prospect
/// entry creates it with default framing parameters.
void apply_overrides(nlohmann::json& doc, const std::vector<std::string>& overrides);

/// Reads and parses a scenario file, applying overrides. Throws ConfigError
/// on unreadable files, malformed JSON, or schema mismatches.
Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

Scenario parse_scenario(const std::string& text, const std::vector<std::string>& overrides = {});

}  // namespace gridstore
