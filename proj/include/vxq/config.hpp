#pragma once

// Experiment configuration: JSON document merged over defaults, then dotted
// key overrides, then validated into ExperimentConfig. Unknown keys and type
// mismatches raise InvalidArgument naming the offending key.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "vxq/domain_grid.hpp"
#include "vxq/modular_norms.hpp"
#include "vxq/rayleigh_solver.hpp"

namespace vxq {

struct SolverConfig {
  int max_iter = 500;
  double tol = 1e-6;
  int restarts = 1;
  std::uint64_t seed = 0;
  InitKind init = InitKind::Distance;
};

struct ExperimentConfig {
  DomainSpec domain;
  std::string p_expr = "2";
  std::string q_expr = "2";
  NormVariant norm_variant = NormVariant::Weighted;
  SolverConfig solver;
  int l = 4;
  std::vector<int> j_list{1, 2, 4, 8, 16, 32, 64};
  std::vector<int> l_list{4, 8, 16, 32};
  std::string u_expr = "distance";  // field for `norm`: "distance" or an expression
  int scale = 1;                    // exponent multiplier for `norm`
  double angle_tol = kDefaultAngleTol;
  double dist_tol = kDefaultDistTol;
  double exclusion_radius = -1.0;  // < 0: default
  double smoothing_width = -1.0;   // < 0: default
  std::string output_dir = "vxq_out";
};

/// The default document; its key set is the schema.
inline nlohmann::json default_config_json() {
  return {
      {"domain",
       {{"shape", "rectangle"},
        {"n", 64},
        {"w", 1.0},
        {"h", 1.0},
        {"r", 1.0},
        {"a", 1.0},
        {"b", 0.5},
        {"notch_w", 0.5},
        {"notch_h", 0.5},
        {"r_in", 0.5},
        {"r_out", 1.0}}},
      {"p_expr", "2"},
      {"q_expr", "2"},
      {"norm_variant", "weighted"},
      {"solver", {{"max_iter", 500}, {"tol", 1e-6}, {"restarts", 1}, {"seed", 0}, {"init", "distance"}}},
      {"l", 4},
      {"j_list", {1, 2, 4, 8, 16, 32, 64}},
      {"l_list", {4, 8, 16, 32}},
      {"u_expr", "distance"},
      {"scale", 1},
      {"ridge", {{"angle_tol", kDefaultAngleTol}, {"dist_tol", kDefaultDistTol}}},
      {"limit", {{"exclusion_radius", -1.0}, {"smoothing_width", -1.0}}},
      {"output_dir", "vxq_out"},
  };
}

namespace detail {

inline void merge_checked(nlohmann::json& base, const nlohmann::json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw InvalidArgument("config section '" + prefix + "' must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw InvalidArgument("unknown config key '" + key + "'");
    nlohmann::json& slot = base[it.key()];
    if (slot.is_object()) merge_checked(slot, it.value(), key);
    else slot = it.value();
  }
}

inline const nlohmann::json& at_key(const nlohmann::json& j, const std::string& section, const std::string& key) {
  return section.empty() ? j.at(key) : j.at(section).at(key);
}

inline std::string key_name(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

inline double get_number(const nlohmann::json& j, const std::string& section, const std::string& key) {
  const auto& v = at_key(j, section, key);
  if (!v.is_number()) throw InvalidArgument("config key '" + key_name(section, key) + "' must be a number");
  return v.get<double>();
}

inline long long get_integer(const nlohmann::json& j, const std::string& section, const std::string& key) {
  const auto& v = at_key(j, section, key);
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
  }
  throw InvalidArgument("config key '" + key_name(section, key) + "' must be an integer");
}

inline std::string get_string(const nlohmann::json& j, const std::string& section, const std::string& key) {
  const auto& v = at_key(j, section, key);
  if (!v.is_string()) throw InvalidArgument("config key '" + key_name(section, key) + "' must be a string");
  return v.get<std::string>();
}

inline std::vector<int> get_int_list(const nlohmann::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_array()) throw InvalidArgument("config key '" + key + "' must be a list of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw InvalidArgument("config key '" + key + "' must be a list of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

}  // namespace detail

/// Applies `dotted.path=value`. The value is read as JSON when it parses
/// (numbers, lists, booleans), a comma list becomes a JSON list, anything
/// else is a string.
inline void apply_override(nlohmann::json& doc, const std::string& path, const std::string& value) {
  nlohmann::json* slot = &doc;
  std::size_t start = 0;
  std::string walked;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    walked += (walked.empty() ? "" : ".") + part;
    if (!slot->is_object() || !slot->contains(part)) throw InvalidArgument("unknown config key '" + walked + "'");
    slot = &(*slot)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (slot->is_object()) throw InvalidArgument("config key '" + path + "' is a section, not a value");
  nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
  if (parsed.is_discarded() && value.find(',') != std::string::npos)
    parsed = nlohmann::json::parse("[" + value + "]", nullptr, false);
  if (parsed.is_discarded() || (slot->is_string() && !parsed.is_string())) parsed = value;
  *slot = parsed;
}

/// Validates a fully merged document into an ExperimentConfig.
inline ExperimentConfig config_from_json(const nlohmann::json& doc) {
  using namespace detail;
  ExperimentConfig c;
  const std::string shape = get_string(doc, "domain", "shape");
  auto num = [&](const char* k) { return get_number(doc, "domain", k); };
  if (shape == "rectangle") c.domain.shape = Rectangle{num("w"), num("h")};
  else if (shape == "disk") c.domain.shape = Disk{num("r")};
  else if (shape == "ellipse") c.domain.shape = Ellipse{num("a"), num("b")};
  else if (shape == "lshape") c.domain.shape = LShape{num("w"), num("h"), num("notch_w"), num("notch_h")};
  else if (shape == "annulus") c.domain.shape = Annulus{num("r_in"), num("r_out")};
  else throw InvalidArgument("config key 'domain.shape' must be one of rectangle, disk, ellipse, lshape, annulus");
  const long long n = get_integer(doc, "domain", "n");
  if (n < 8 || n > 4096) throw InvalidArgument("config key 'domain.n' must be in [8, 4096]");
  c.domain.resolution = static_cast<int>(n);
  validate(c.domain);

  c.p_expr = get_string(doc, "", "p_expr");
  c.q_expr = get_string(doc, "", "q_expr");
  (void)parse_expression(c.p_expr);
  (void)parse_expression(c.q_expr);
  const std::string variant = get_string(doc, "", "norm_variant");
  if (variant == "weighted") c.norm_variant = NormVariant::Weighted;
  else if (variant == "classical") c.norm_variant = NormVariant::Classical;
  else throw InvalidArgument("config key 'norm_variant' must be 'weighted' or 'classical'");

  const long long max_iter = get_integer(doc, "solver", "max_iter");
  if (max_iter < 1 || max_iter > 1000000) throw InvalidArgument("config key 'solver.max_iter' must be in [1, 1e6]");
  c.solver.max_iter = static_cast<int>(max_iter);
  c.solver.tol = get_number(doc, "solver", "tol");
  if (!(c.solver.tol > 0.0)) throw InvalidArgument("config key 'solver.tol' must be positive");
  const long long restarts = get_integer(doc, "solver", "restarts");
  if (restarts < 1 || restarts > 1000) throw InvalidArgument("config key 'solver.restarts' must be in [1, 1000]");
  c.solver.restarts = static_cast<int>(restarts);
  const long long seed = get_integer(doc, "solver", "seed");
  if (seed < 0) throw InvalidArgument("config key 'solver.seed' must be nonnegative");
  c.solver.seed = static_cast<std::uint64_t>(seed);
  const std::string init = get_string(doc, "solver", "init");
  if (init == "distance") c.solver.init = InitKind::Distance;
  else if (init == "random") c.solver.init = InitKind::Random;
  else throw InvalidArgument("config key 'solver.init' must be 'distance' or 'random'");

  const long long l = get_integer(doc, "", "l");
  if (l < 2 || l > 1000) throw InvalidArgument("config key 'l' must be in [2, 1000]");
  c.l = static_cast<int>(l);
  c.j_list = get_int_list(doc, "j_list");
  c.l_list = get_int_list(doc, "l_list");
  auto increasing = [](const std::vector<int>& v, int lo, const char* key) {
    if (v.empty()) throw InvalidArgument(std::string("config key '") + key + "' must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < lo) throw InvalidArgument(std::string("config key '") + key + "' entries must be >= " + std::to_string(lo));
      if (i > 0 && v[i] <= v[i - 1]) throw InvalidArgument(std::string("config key '") + key + "' must be increasing");
    }
  };
  increasing(c.j_list, 1, "j_list");
  increasing(c.l_list, 2, "l_list");
  c.u_expr = get_string(doc, "", "u_expr");
  if (c.u_expr != "distance") (void)parse_expression(c.u_expr);
  const long long scale = get_integer(doc, "", "scale");
  if (scale < 1 || scale > 1000) throw InvalidArgument("config key 'scale' must be in [1, 1000]");
  c.scale = static_cast<int>(scale);
  c.angle_tol = get_number(doc, "ridge", "angle_tol");
  c.dist_tol = get_number(doc, "ridge", "dist_tol");
  if (!(c.angle_tol > 0.0) || !(c.dist_tol > 0.0)) throw InvalidArgument("ridge tolerances must be positive");
  c.exclusion_radius = get_number(doc, "limit", "exclusion_radius");
  c.smoothing_width = get_number(doc, "limit", "smoothing_width");
  c.output_dir = get_string(doc, "", "output_dir");
  if (c.output_dir.empty()) throw InvalidArgument("config key 'output_dir' must not be empty");
  return c;
}

/// defaults <- document <- overrides, then validation.
inline ExperimentConfig load_config(const nlohmann::json* document,
                                    const std::vector<std::pair<std::string, std::string>>& overrides,
                                    nlohmann::json* merged_out = nullptr) {
  nlohmann::json doc = default_config_json();
  if (document) detail::merge_checked(doc, *document, "");
  for (const auto& [k, v] : overrides) apply_override(doc, k, v);
  ExperimentConfig c = config_from_json(doc);
  if (merged_out) *merged_out = doc;
  return c;
}

}  // namespace vxq
