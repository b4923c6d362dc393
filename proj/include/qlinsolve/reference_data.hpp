#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "qlinsolve/error.hpp"
#include "qlinsolve/graph.hpp"
#include "qlinsolve/problem.hpp"

// Published example constants. Each entry names where it was taken from;
// data/constants_manifest.tsv mirrors this table for the audit test.
namespace qls::reference {

struct Constant {
  std::string_view key;
  double value;
  std::string_view provenance;
};

inline constexpr Constant kConstants[] = {
    // Five-node exact system and its solution.
    {"ex1.H.1.1", 0.5, "example 1: system matrix"},
    {"ex1.H.1.2", -0.1, "example 1: system matrix"},
    {"ex1.H.2.1", -0.4, "example 1: system matrix"},
    {"ex1.H.2.2", 0.2, "example 1: system matrix"},
    {"ex1.H.3.1", 0.3, "example 1: system matrix"},
    {"ex1.H.3.2", -0.7, "example 1: system matrix"},
    {"ex1.H.4.1", 0.6, "example 1: system matrix"},
    {"ex1.H.4.2", 0.3, "example 1: system matrix"},
    {"ex1.H.5.1", -0.3, "example 1: system matrix"},
    {"ex1.H.5.2", 0.5, "example 1: system matrix"},
    {"ex1.z.1", 0.2, "example 1: right-hand side"},
    {"ex1.z.2", 0.2, "example 1: right-hand side"},
    {"ex1.z.3", -1.8, "example 1: right-hand side"},
    {"ex1.z.4", 1.5, "example 1: right-hand side"},
    {"ex1.z.5", 1.2, "example 1: right-hand side"},
    {"ex1.y.1", 1.0, "example 1: stated exact solution"},
    {"ex1.y.2", 3.0, "example 1: stated exact solution"},
    // Rate-bound validation run.
    {"ex1.thm1.h_numerator", 1.98, "example 1 rate-bound run: h = 1.98/(fd_min+fd_max)"},
    {"ex1.thm1.h", 0.4215, "example 1 rate-bound run: stated h"},
    {"ex1.thm1.rho_h", 0.9554, "example 1 rate-bound run: stated rho_h"},
    {"ex1.thm1.alpha", 0.98, "example 1 rate-bound run: alpha"},
    {"ex1.thm1.Kmin", 225, "example 1 rate-bound run: stated level requirement"},
    {"ex1.thm1.s0", 1.0, "example 1 rate-bound run: s(0)"},
    {"ex1.thm1.K.1", 100, "example 1 rate-bound run: first K"},
    {"ex1.thm1.K.2", 300, "example 1 rate-bound run: second K"},
    {"ex1.thm1.K.3", 1000, "example 1 rate-bound run: third K"},
    // Low-data-rate validation runs.
    {"ex1.thm2.eps", 0.5, "example 1 low-rate runs: epsilon"},
    {"ex1.thm2.K.1", 3, "example 1 low-rate runs: K_1"},
    {"ex1.thm2.K.2", 6, "example 1 low-rate runs: K_2"},
    {"ex1.thm2.K.3", 12, "example 1 low-rate runs: K_3"},
    {"ex1.thm2.alpha.1", 0.9998, "example 1 low-rate runs: alpha_1"},
    {"ex1.thm2.alpha.2", 0.9996, "example 1 low-rate runs: alpha_2"},
    {"ex1.thm2.alpha.3", 0.9992, "example 1 low-rate runs: alpha_3"},
    {"ex1.thm2.h.1", 0.0038, "example 1 low-rate runs: h_1"},
    {"ex1.thm2.h.2", 0.0077, "example 1 low-rate runs: h_2"},
    {"ex1.thm2.h.3", 0.0154, "example 1 low-rate runs: h_3"},
    {"ex1.thm2.s0.1", 1500, "example 1 low-rate runs: s_1(0)"},
    {"ex1.thm2.s0.2", 1200, "example 1 low-rate runs: s_2(0)"},
    {"ex1.thm2.s0.3", 1000, "example 1 low-rate runs: s_3(0)"},
    // Scalability study.
    {"ex2.N", 100, "example 2: network size"},
    {"ex2.m", 5, "example 2: unknowns"},
    {"ex2.theta", 2.4910e-9, "example 2: stated Theta_N (unpublished random H)"},
    {"ex2.K_first", 40000, "example 2: first K of the sweep"},
    {"ex2.K_last", 150000, "example 2: last K of the sweep"},
    {"ex2.K_step", 1000, "example 2: K step"},
    // Topology study.
    {"ex3.N", 100, "example 3: network size"},
    {"ex3.m", 10, "example 3: unknowns"},
    {"ex3.theta.complete", 6.9199e-9, "example 3: stated Theta_N, complete graph"},
    {"ex3.theta.star", 1.8553e-9, "example 3: stated Theta_N, star graph"},
    {"ex3.theta.cycle", 8.2899e-8, "example 3: stated Theta_N, cycle graph"},
    {"ex3.p_first", 0.1, "example 3: first edge probability"},
    {"ex3.p_last", 0.9, "example 3: last edge probability"},
    {"ex3.p_step", 0.05, "example 3: probability step"},
    {"ex3.graphs_per_p", 1000, "example 3: graphs drawn per probability"},
    // Damped codec study.
    {"robust.h", 0.0213, "damping study: h"},
    {"robust.alpha", 0.998, "damping study: alpha"},
    {"robust.K", 300, "damping study: K"},
    {"robust.s0", 10, "damping study: s(0)"},
    {"robust.init_lo", 0.0, "damping study: initialization errors U[0, 0.5]"},
    {"robust.init_hi", 0.5, "damping study: initialization errors U[0, 0.5]"},
    {"robust.roundoff_amp", 1e-4, "damping study: round-off noise U[-1e-4, 1e-4]"},
    {"robust.damping", 0.95, "damping study: damping factor"},
    // Least-squares system.
    {"ex4.H.1.1", 1.7889, "example 4: system matrix"},
    {"ex4.H.1.2", -1.0764, "example 4: system matrix"},
    {"ex4.H.2.1", -1.0764, "example 4: system matrix"},
    {"ex4.H.2.2", 0.1903, "example 4: system matrix"},
    {"ex4.H.3.1", 0.4707, "example 4: system matrix"},
    {"ex4.H.3.2", 0.1008, "example 4: system matrix"},
    {"ex4.H.4.1", 0.8356, "example 4: system matrix"},
    {"ex4.H.4.2", -0.1716, "example 4: system matrix"},
    {"ex4.H.5.1", 0.5978, "example 4: system matrix"},
    {"ex4.H.5.2", -1.6668, "example 4: system matrix"},
    {"ex4.z.1", -0.2854, "example 4: right-hand side"},
    {"ex4.z.2", 1.2038, "example 4: right-hand side"},
    {"ex4.z.3", 1.1032, "example 4: right-hand side"},
    {"ex4.z.4", 0.7088, "example 4: right-hand side"},
    {"ex4.z.5", -0.9495, "example 4: right-hand side"},
    {"ex4.y.1", 0.1415, "example 4: stated least-squares solution (4 decimals)"},
    {"ex4.y.2", 0.6391, "example 4: stated least-squares solution (4 decimals)"},
    // Least-squares rate run.
    {"ex4.thm3.h", 0.0853, "example 4 rate run: h"},
    {"ex4.thm3.k0", 26, "example 4 rate run: gamma(k) = (26/(k+26))^0.85"},
    {"ex4.thm3.delta", 0.85, "example 4 rate run: gamma(k) = (26/(k+26))^0.85"},
    {"ex4.thm3.Kmin", 870, "example 4 rate run: stated level requirement"},
    {"ex4.thm3.K.1", 900, "example 4 rate run: K_1"},
    {"ex4.thm3.K.2", 300, "example 4 rate run: K_2"},
    {"ex4.thm3.K.3", 1800, "example 4 rate run: K_3"},
    {"ex4.thm3.sr", 0.82, "example 4 rate run: s_r"},
    // Least-squares low-rate parameter table.
    {"ex4.table.eps", 0.5, "example 4 parameter table: epsilon"},
    {"ex4.table.K.1", 10, "example 4 parameter table, row 1: K"},
    {"ex4.table.k0.1", 120, "example 4 parameter table, row 1: k0"},
    {"ex4.table.delta.1", 0.85, "example 4 parameter table, row 1: delta"},
    {"ex4.table.h.1", 0.0055, "example 4 parameter table, row 1: h"},
    {"ex4.table.sr.1", 0.9583, "example 4 parameter table, row 1: s_r"},
    {"ex4.table.K.2", 30, "example 4 parameter table, row 2: K"},
    {"ex4.table.k0.2", 36, "example 4 parameter table, row 2: k0"},
    {"ex4.table.delta.2", 0.75, "example 4 parameter table, row 2: delta"},
    {"ex4.table.h.2", 0.0164, "example 4 parameter table, row 2: h"},
    {"ex4.table.sr.2", 0.6934, "example 4 parameter table, row 2: s_r"},
    {"ex4.table.K.3", 90, "example 4 parameter table, row 3: K"},
    {"ex4.table.k0.3", 9, "example 4 parameter table, row 3: k0"},
    {"ex4.table.delta.3", 0.55, "example 4 parameter table, row 3: delta"},
    {"ex4.table.h.3", 0.0492, "example 4 parameter table, row 3: h"},
    {"ex4.table.sr.3", 0.6968, "example 4 parameter table, row 3: s_r"},
};

inline std::span<const Constant> constants() { return kConstants; }

inline std::optional<double> find(std::string_view key) {
  for (const auto& c : kConstants)
    if (c.key == key) return c.value;
  return std::nullopt;
}

inline double get(std::string_view key) {
  if (auto v = find(key)) return *v;
  throw Error("no reference constant '" + std::string(key) + "'");
}

inline double get(std::string_view prefix, int index) {
  return get(std::string(prefix) + "." + std::to_string(index));
}

inline LinearProblem embedded_problem(std::string_view tag, Index n, Index m) {
  Matrix H(n, m);
  Vector z(n);
  const std::string t(tag);
  for (Index i = 0; i < n; ++i) {
    for (Index a = 0; a < m; ++a)
      H(i, a) = get(t + ".H." + std::to_string(i + 1) + "." + std::to_string(a + 1));
    z(i) = get(t + ".z." + std::to_string(i + 1));
  }
  return LinearProblem(std::move(H), std::move(z));
}

inline LinearProblem example1_problem() { return embedded_problem("ex1", 5, 2); }
inline LinearProblem example4_problem() { return embedded_problem("ex4", 5, 2); }

// Five nodes, edges 1-2, 1-3, 2-3, 3-4, 4-5.
inline Graph fig1_graph() { return Graph::from_one_based(5, {{1, 2}, {1, 3}, {2, 3}, {3, 4}, {4, 5}}); }

inline LinearProblem builtin_problem(std::string_view name) {
  if (name == "ex1") return example1_problem();
  if (name == "ex4") return example4_problem();
  throw Error("unknown built-in problem '" + std::string(name) + "' (known: ex1, ex4)");
}

inline Graph builtin_graph(std::string_view name) {
  if (name == "fig1") return fig1_graph();
  throw Error("unknown built-in graph '" + std::string(name) + "' (known: fig1)");
}

}  // namespace qls::reference
