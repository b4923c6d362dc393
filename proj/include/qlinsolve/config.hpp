#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qlinsolve/codec.hpp"
#include "qlinsolve/error.hpp"
#include "qlinsolve/format.hpp"

namespace qls {

struct ExperimentConfig {
  std::string mode = "exact";  // exact | ls | robust | baseline
  std::uint64_t seed = 1;
  std::uint64_t max_rounds = 2000;

  std::string problem_source = "builtin";  // builtin | file | inline | random
  std::string problem_name = "ex1";
  std::string problem_file;
  std::string problem_data;  // rows "h_i^T z_i" separated by ';'
  std::uint64_t problem_n = 10;
  std::uint64_t problem_m = 2;
  std::string problem_kind = "exact";      // random: exact | ls
  std::string problem_entries = "normal";  // random: normal | uniform01
  std::uint64_t problem_seed = 1;

  std::string graph_source = "builtin";  // builtin | file | inline | generate
  std::string graph_name = "fig1";
  std::string graph_file;
  std::string graph_edges;  // inline: "1-2 2-3 ..."
  std::uint64_t graph_n = 10;
  std::string graph_kind = "cycle";
  double graph_p = 0.5;
  std::uint64_t graph_seed = 1;

  std::string solver_params = "explicit";  // explicit | planned
  double solver_h = 0.0;
  double solver_alpha = 0.0;
  double solver_s0 = 1.0;
  double solver_sr = 1.0;
  std::int64_t solver_K = 0;
  std::string solver_x0 = "zero";  // zero | random
  double solver_x0_cx = 1.0;
  bool solver_strict_saturation = false;
  bool solver_strict_config = false;
  double solver_stop_err2 = 1e-12;

  double gamma_k0 = 1.0;
  double gamma_delta = 1.0;

  double noise_damping = 1.0;
  bool noise_init_errors = false;
  double noise_init_lo = 0.0;
  double noise_init_hi = 0.0;
  bool noise_roundoff = false;
  double noise_roundoff_amp = 0.0;
  std::uint64_t noise_seed = 1;
  bool noise_damped_predictor = true;

  std::int64_t planner_K = 1;
  double planner_eps = 0.5;
  double planner_delta = 0.85;
  double planner_pick_fraction = 0.5;

  std::string output_trace = "trace.csv";
  std::string output_summary = "summary.txt";
  std::string output_plan = "plan.csv";

  // Directory of the loaded file; relative problem/graph paths resolve here.
  std::filesystem::path base_dir;

  NoiseModel noise() const {
    NoiseModel n;
    n.damping = noise_damping;
    n.init_errors = noise_init_errors;
    n.init_lo = noise_init_lo;
    n.init_hi = noise_init_hi;
    n.roundoff = noise_roundoff;
    n.roundoff_amp = noise_roundoff_amp;
    n.seed = noise_seed;
    n.damped_predictor = noise_damped_predictor;
    return n;
  }

  std::filesystem::path resolve(const std::string& p) const {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_integer(const std::string& s) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error("not an integer: '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error("not a boolean: '" + s + "'");
}

struct ConfigField {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
ConfigField field(T ExperimentConfig::*member) {
  ConfigField f;
  if constexpr (std::is_same_v<T, std::string>) {
    f.set = [member](ExperimentConfig& c, const std::string& v) { c.*member = v; };
    f.get = [member](const ExperimentConfig& c) { return c.*member; };
  } else if constexpr (std::is_same_v<T, double>) {
    f.set = [member](ExperimentConfig& c, const std::string& v) { c.*member = parse_double(v); };
    f.get = [member](const ExperimentConfig& c) { return format_double(c.*member); };
  } else if constexpr (std::is_same_v<T, bool>) {
    f.set = [member](ExperimentConfig& c, const std::string& v) { c.*member = parse_bool(v); };
    f.get = [member](const ExperimentConfig& c) {
      return std::string(c.*member ? "true" : "false");
    };
  } else {
    f.set = [member](ExperimentConfig& c, const std::string& v) {
      c.*member = parse_integer<T>(v);
    };
    f.get = [member](const ExperimentConfig& c) { return std::to_string(c.*member); };
  }
  return f;
}

inline const std::map<std::string, ConfigField>& config_fields() {
  using C = ExperimentConfig;
  static const std::map<std::string, ConfigField> fields = {
      {"mode", field(&C::mode)},
      {"seed", field(&C::seed)},
      {"max_rounds", field(&C::max_rounds)},
      {"problem.source", field(&C::problem_source)},
      {"problem.name", field(&C::problem_name)},
      {"problem.file", field(&C::problem_file)},
      {"problem.data", field(&C::problem_data)},
      {"problem.n", field(&C::problem_n)},
      {"problem.m", field(&C::problem_m)},
      {"problem.kind", field(&C::problem_kind)},
      {"problem.entries", field(&C::problem_entries)},
      {"problem.seed", field(&C::problem_seed)},
      {"graph.source", field(&C::graph_source)},
      {"graph.name", field(&C::graph_name)},
      {"graph.file", field(&C::graph_file)},
      {"graph.edges", field(&C::graph_edges)},
      {"graph.n", field(&C::graph_n)},
      {"graph.kind", field(&C::graph_kind)},
      {"graph.p", field(&C::graph_p)},
      {"graph.seed", field(&C::graph_seed)},
      {"solver.params", field(&C::solver_params)},
      {"solver.h", field(&C::solver_h)},
      {"solver.alpha", field(&C::solver_alpha)},
      {"solver.s0", field(&C::solver_s0)},
      {"solver.sr", field(&C::solver_sr)},
      {"solver.K", field(&C::solver_K)},
      {"solver.x0", field(&C::solver_x0)},
      {"solver.x0_cx", field(&C::solver_x0_cx)},
      {"solver.strict_saturation", field(&C::solver_strict_saturation)},
      {"solver.strict_config", field(&C::solver_strict_config)},
      {"solver.stop_err2", field(&C::solver_stop_err2)},
      {"gamma.k0", field(&C::gamma_k0)},
      {"gamma.delta", field(&C::gamma_delta)},
      {"noise.damping", field(&C::noise_damping)},
      {"noise.init_errors", field(&C::noise_init_errors)},
      {"noise.init_lo", field(&C::noise_init_lo)},
      {"noise.init_hi", field(&C::noise_init_hi)},
      {"noise.roundoff", field(&C::noise_roundoff)},
      {"noise.roundoff_amp", field(&C::noise_roundoff_amp)},
      {"noise.seed", field(&C::noise_seed)},
      {"noise.damped_predictor", field(&C::noise_damped_predictor)},
      {"planner.K", field(&C::planner_K)},
      {"planner.eps", field(&C::planner_eps)},
      {"planner.delta", field(&C::planner_delta)},
      {"planner.pick_fraction", field(&C::planner_pick_fraction)},
      {"output.trace", field(&C::output_trace)},
      {"output.summary", field(&C::output_summary)},
      {"output.plan", field(&C::output_plan)},
  };
  return fields;
}

inline void require_one_of(const std::string& key, const std::string& value,
                           std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (value == a) return;
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw Error(key + ": '" + value + "' is not one of " + list);
}

}  // namespace detail

// Semantic checks; messages start with the offending key.
inline void validate(const ExperimentConfig& c) {
  using detail::require_one_of;
  auto fail = [](const std::string& key, const std::string& why) { throw Error(key + ": " + why); };
  require_one_of("mode", c.mode, {"exact", "ls", "robust", "baseline"});
  if (c.max_rounds == 0) fail("max_rounds", "must be >= 1");
  require_one_of("problem.source", c.problem_source, {"builtin", "file", "inline", "random"});
  if (c.problem_source == "file" && c.problem_file.empty()) fail("problem.file", "required");
  if (c.problem_source == "inline" && c.problem_data.empty()) fail("problem.data", "required");
  if (c.problem_source == "random") {
    require_one_of("problem.kind", c.problem_kind, {"exact", "ls"});
    require_one_of("problem.entries", c.problem_entries, {"normal", "uniform01"});
    if (c.problem_m < 1) fail("problem.m", "must be >= 1");
    if (c.problem_n <= c.problem_m) fail("problem.n", "must exceed problem.m");
  }
  require_one_of("graph.source", c.graph_source, {"builtin", "file", "inline", "generate"});
  if (c.graph_source == "file" && c.graph_file.empty()) fail("graph.file", "required");
  if (c.graph_source == "generate") {
    require_one_of("graph.kind", c.graph_kind, {"cycle", "star", "complete", "erdos_renyi"});
    if (c.graph_n < 2) fail("graph.n", "must be >= 2");
    if (c.graph_kind == "erdos_renyi" && !(c.graph_p > 0.0 && c.graph_p <= 1.0))
      fail("graph.p", "must lie in (0, 1]");
  }
  if (c.graph_source == "inline" && c.graph_n < 1) fail("graph.n", "must be >= 1");
  require_one_of("solver.params", c.solver_params, {"explicit", "planned"});
  require_one_of("solver.x0", c.solver_x0, {"zero", "random"});
  if (!(c.solver_x0_cx >= 0.0)) fail("solver.x0_cx", "must be >= 0");
  if (!(c.solver_stop_err2 >= 0.0)) fail("solver.stop_err2", "must be >= 0");

  const bool planned = c.solver_params == "planned";
  if (planned && c.mode == "baseline") fail("solver.params", "baseline runs take an explicit h");
  if (!planned) {
    if (!(c.solver_h > 0.0)) fail("solver.h", "must be positive");
    if (c.mode != "baseline" && c.solver_K < 1) fail("solver.K", "must be >= 1");
  }
  if (c.mode == "exact" || c.mode == "robust") {
    if (!planned && !(c.solver_alpha > 0.0 && c.solver_alpha <= 1.0))
      fail("solver.alpha", "must lie in (0, 1]");
    if (!(c.solver_s0 > 0.0)) fail("solver.s0", "must be positive");
  }
  if (c.mode == "ls") {
    if (!(c.solver_sr > 0.0)) fail("solver.sr", "must be positive");
    if (!planned && !(c.gamma_k0 > 0.0)) fail("gamma.k0", "must be positive");
    if (!planned && !(c.gamma_delta > 0.5 && c.gamma_delta <= 1.0))
      fail("gamma.delta", "must lie in (1/2, 1]");
  }
  if (!(c.noise_damping > 0.0 && c.noise_damping <= 1.0)) fail("noise.damping", "must lie in (0, 1]");
  if (c.noise_init_errors && !(c.noise_init_lo <= c.noise_init_hi))
    fail("noise.init_lo", "must not exceed noise.init_hi");
  if (!(c.noise_roundoff_amp >= 0.0)) fail("noise.roundoff_amp", "must be >= 0");
  if (planned) {
    if (c.planner_K < 1) fail("planner.K", "must be >= 1");
    if (!(c.planner_eps > 0.0 && c.planner_eps < 1.0)) fail("planner.eps", "must lie in (0, 1)");
    if (!(c.planner_pick_fraction > 0.0 && c.planner_pick_fraction < 1.0))
      fail("planner.pick_fraction", "must lie in (0, 1)");
    if (c.mode == "ls" && !(c.planner_delta > 0.5 && c.planner_delta <= 1.0))
      fail("planner.delta", "must lie in (1/2, 1]");
  }
  for (const auto* key : {&c.output_trace, &c.output_summary, &c.output_plan})
    if (key->empty()) fail("output", "file names must be non-empty");
}

inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const auto& fields = detail::config_fields();
  auto it = fields.find(key);
  if (it == fields.end()) throw Error("unknown key '" + key + "'");
  try {
    it->second.set(c, value);
  } catch (const Error& e) {
    throw Error(key + ": " + e.what());
  }
}

inline ExperimentConfig parse_config(std::istream& in, std::filesystem::path base_dir = {}) {
  ExperimentConfig c;
  c.base_dir = std::move(base_dir);
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw Error("config line " + std::to_string(lineno) + ": empty key");
    if (auto prev = seen.find(key); prev != seen.end())
      throw Error("config line " + std::to_string(lineno) + ": key '" + key +
                  "' already set on line " + std::to_string(prev->second));
    seen[key] = lineno;
    try {
      set_config_value(c, key, value);
    } catch (const Error& e) {
      throw Error("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  validate(c);
  return c;
}

inline ExperimentConfig parse_config_string(const std::string& text,
                                            std::filesystem::path base_dir = {}) {
  std::istringstream in(text);
  return parse_config(in, std::move(base_dir));
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path.string() + "'");
  return parse_config(in, path.parent_path());
}

// Every key, sorted, one per line.
inline std::string serialize_config(const ExperimentConfig& c) {
  std::string out;
  for (const auto& [key, f] : detail::config_fields()) out += key + " = " + f.get(c) + "\n";
  return out;
}

inline bool same_config(const ExperimentConfig& a, const ExperimentConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace qls
