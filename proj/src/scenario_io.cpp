#include "gridstore/scenario_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace gridstore {

using nlohmann::json;

namespace {

double number_at(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(fmt::format("{}: missing field '{}'", where, key));
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(fmt::format("{}.{}: expected a number", where, key));
  return v.get<double>();
}

ProspectParams prospect_from_json(const json& obj, const std::string& where) {
  ProspectParams p;
  p.r = number_at(obj, "r", where);
  if (obj.contains("lambda")) p.lambda = number_at(obj, "lambda", where);
  if (obj.contains("beta_plus")) p.beta_plus = number_at(obj, "beta_plus", where);
  if (obj.contains("beta_minus")) p.beta_minus = number_at(obj, "beta_minus", where);
  return p;
}

json prospect_to_json(const ProspectParams& p) {
  return json{{"r", p.r}, {"lambda", p.lambda}, {"beta_plus", p.beta_plus},
              {"beta_minus", p.beta_minus}};
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("scenario: expected a JSON object");
  if (!doc.contains("grid") || !doc.at("grid").is_object())
    throw ConfigError("scenario: missing object 'grid'");
  if (!doc.contains("microgrids") || !doc.at("microgrids").is_array())
    throw ConfigError("scenario: missing array 'microgrids'");

  Scenario s;
  const json& g = doc.at("grid");
  s.grid.rho = number_at(g, "rho", "grid");
  s.grid.rho_c = number_at(g, "rho_c", "grid");
  s.grid.theta = number_at(g, "theta", "grid");
  s.grid.l_c = number_at(g, "l_c", "grid");

  const json& mgs = doc.at("microgrids");
  for (std::size_t i = 0; i < mgs.size(); ++i) {
    const std::string where = fmt::format("microgrids[{}]", i);
    if (!mgs[i].is_object()) throw ConfigError(where + ": expected an object");
    s.microgrids.push_back({number_at(mgs[i], "q", where), number_at(mgs[i], "q_max", where)});
  }
  s.grid.n_players = s.n_players();

  if (doc.contains("prospect") && !doc.at("prospect").is_null()) {
    const json& pts = doc.at("prospect");
    if (!pts.is_array()) throw ConfigError("prospect: expected an array");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string where = fmt::format("prospect[{}]", i);
      if (pts[i].is_null()) {
        s.prospect.emplace_back(std::nullopt);
      } else if (pts[i].is_object()) {
        s.prospect.emplace_back(prospect_from_json(pts[i], where));
      } else {
        throw ConfigError(where + ": expected an object or null");
      }
    }
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["grid"] = {{"rho", s.grid.rho}, {"rho_c", s.grid.rho_c}, {"theta", s.grid.theta},
                 {"l_c", s.grid.l_c}};
  doc["microgrids"] = json::array();
  for (const auto& mg : s.microgrids) doc["microgrids"].push_back({{"q", mg.q}, {"q_max", mg.q_max}});
  if (!s.prospect.empty()) {
    doc["prospect"] = json::array();
    for (const auto& p : s.prospect) doc["prospect"].push_back(p ? prospect_to_json(*p) : json(nullptr));
  }
  return doc;
}

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  return parts;
}

std::size_t parse_index(const std::string& text, const std::string& override_text) {
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), idx);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError(fmt::format("override '{}': '{}' is not an index", override_text, text));
  return idx;
}

double parse_value(const std::string& text, const std::string& override_text) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("override '{}': '{}' is not a number", override_text, text));
}

bool is_one_of(const std::string& key, std::initializer_list<const char*> keys) {
  for (const char* k : keys)
    if (key == k) return true;
  return false;
}

}  // namespace

void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("override '{}': expected key=value", ov));
    const auto parts = split_path(ov.substr(0, eq));
    const double value = parse_value(ov.substr(eq + 1), ov);

    if (parts.size() == 2 && parts[0] == "grid" &&
        is_one_of(parts[1], {"rho", "rho_c", "theta", "l_c"})) {
      doc["grid"][parts[1]] = value;
    } else if (parts.size() == 3 && parts[0] == "microgrids" &&
               is_one_of(parts[2], {"q", "q_max"})) {
      const auto idx = parse_index(parts[1], ov);
      if (!doc.contains("microgrids") || idx >= doc["microgrids"].size())
        throw ConfigError(fmt::format("override '{}': no microgrid {}", ov, idx));
      doc["microgrids"][idx][parts[2]] = value;
    } else if (parts.size() == 3 && parts[0] == "prospect" &&
               is_one_of(parts[2], {"r", "lambda", "beta_plus", "beta_minus"})) {
      const auto idx = parse_index(parts[1], ov);
      const std::size_t n = doc.contains("microgrids") ? doc["microgrids"].size() : 0;
      if (idx >= n) throw ConfigError(fmt::format("override '{}': no player {}", ov, idx));
      if (!doc.contains("prospect") || doc["prospect"].is_null()) doc["prospect"] = json::array();
      while (doc["prospect"].size() < n) doc["prospect"].push_back(nullptr);
      if (doc["prospect"][idx].is_null()) doc["prospect"][idx] = prospect_to_json(ProspectParams{});
      doc["prospect"][idx][parts[2]] = value;
    } else {
      throw ConfigError(fmt::format("override '{}': unknown field", ov));
    }
  }
}

Scenario parse_scenario(const std::string& text, const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("malformed JSON: {}", e.what()));
  }
  apply_overrides(doc, overrides);
  return scenario_from_json(doc);
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), overrides);
}

}  // namespace gridstore
