#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qlinsolve/codec.hpp"
#include "qlinsolve/config.hpp"
#include "qlinsolve/error.hpp"
#include "qlinsolve/format.hpp"
#include "qlinsolve/graph.hpp"
#include "qlinsolve/oracle.hpp"
#include "qlinsolve/planner.hpp"
#include "qlinsolve/problem.hpp"
#include "qlinsolve/reference_data.hpp"
#include "qlinsolve/rng.hpp"
#include "qlinsolve/solver.hpp"

namespace qls {

// ---------------------------------------------------------------- problems

enum class EntryDistribution { normal, uniform01 };

inline EntryDistribution parse_entry_distribution(std::string_view s) {
  if (s == "normal") return EntryDistribution::normal;
  if (s == "uniform01") return EntryDistribution::uniform01;
  throw Error("unknown entry distribution '" + std::string(s) + "'");
}

struct RandomProblem {
  LinearProblem problem;
  Vector y_true;
  std::uint64_t seed_used = 0;
};

// Draw order per attempt: H row by row, then y_true, then (ls only) the
// residual direction. Attempt a uses seed + a.
inline RandomProblem random_problem(std::size_t n, std::size_t m, SolutionKind kind,
                                    std::uint64_t seed,
                                    EntryDistribution entries = EntryDistribution::normal) {
  if (!(m >= 1 && n > m)) throw Error("random_problem needs n > m >= 1");
  if (kind == SolutionKind::unsupported) throw Error("random_problem kind must be exact or ls");
  const auto rows = static_cast<Index>(n);
  const auto cols = static_cast<Index>(m);
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    Rng rng(seed + attempt);
    Matrix H(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index a = 0; a < cols; ++a)
        H(i, a) = entries == EntryDistribution::normal ? rng.normal() : rng.uniform01();
    Vector y(cols);
    for (Index a = 0; a < cols; ++a) y(a) = rng.normal();
    LinearProblem probe(H, Vector::Zero(rows));
    if (!full_column_rank(probe)) continue;
    Vector z = H * y;
    if (kind == SolutionKind::unique_least_squares) {
      Vector r(rows);
      for (Index i = 0; i < rows; ++i) r(i) = rng.normal();
      const Matrix gram = H.transpose() * H;
      r -= H * gram.llt().solve(H.transpose() * r);
      const double norm = r.norm();
      if (!(norm > 1e-6)) continue;
      z += r / norm;
    }
    return {LinearProblem(std::move(H), std::move(z)), std::move(y), seed + attempt};
  }
  throw Error("random_problem: rank(H) < m after 100 redraws");
}

// ---------------------------------------------------------------- config

inline LinearProblem parse_inline_problem(const std::string& data) {
  std::vector<std::vector<double>> rows;
  std::stringstream all(data);
  std::string row;
  while (std::getline(all, row, ';')) {
    std::istringstream ls(row);
    std::vector<double> vals;
    std::string tok;
    while (ls >> tok) vals.push_back(parse_double(tok));
    if (!vals.empty()) rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw Error("problem.data: no rows");
  const auto width = rows.front().size();
  if (width < 2) throw Error("problem.data: each row needs h_i and z_i");
  Matrix H(static_cast<Index>(rows.size()), static_cast<Index>(width - 1));
  Vector z(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) throw Error("problem.data: row " + std::to_string(i + 1) +
                                             " has a different width");
    for (std::size_t a = 0; a + 1 < width; ++a)
      H(static_cast<Index>(i), static_cast<Index>(a)) = rows[i][a];
    z(static_cast<Index>(i)) = rows[i][width - 1];
  }
  return LinearProblem(std::move(H), std::move(z));
}

inline Graph parse_inline_graph(std::size_t n, const std::string& edges) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::istringstream ls(edges);
  std::string tok;
  while (ls >> tok) {
    const auto dash = tok.find('-');
    if (dash == std::string::npos) throw Error("graph.edges: expected 'i-j', got '" + tok + "'");
    pairs.emplace_back(detail::parse_integer<std::size_t>(tok.substr(0, dash)),
                       detail::parse_integer<std::size_t>(tok.substr(dash + 1)));
  }
  return Graph::from_one_based(n, pairs);
}

inline LinearProblem problem_from_config(const ExperimentConfig& c) {
  if (c.problem_source == "builtin") return reference::builtin_problem(c.problem_name);
  if (c.problem_source == "file") return load_problem(c.resolve(c.problem_file).string());
  if (c.problem_source == "inline") return parse_inline_problem(c.problem_data);
  const auto kind = c.problem_kind == "ls" ? SolutionKind::unique_least_squares
                                           : SolutionKind::unique_exact;
  return random_problem(c.problem_n, c.problem_m, kind, c.problem_seed,
                        parse_entry_distribution(c.problem_entries))
      .problem;
}

inline Graph graph_from_config(const ExperimentConfig& c) {
  if (c.graph_source == "builtin") return reference::builtin_graph(c.graph_name);
  if (c.graph_source == "file") return load_graph(c.resolve(c.graph_file).string());
  if (c.graph_source == "inline") return parse_inline_graph(c.graph_n, c.graph_edges);
  return generate_graph(parse_graph_kind(c.graph_kind), c.graph_n, c.graph_p, c.graph_seed).graph;
}

// ---------------------------------------------------------------- traces

inline constexpr const char* kTraceHeader =
    "k,err2,bound_Bk,ratio_err_gamma,max_quant_input,saturation_count,bits_cum";

inline std::string optional_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

inline void write_trace_csv(std::ostream& out, const Trace& tr) {
  out << kTraceHeader << "\n";
  for (const auto& r : tr.rounds)
    out << r.k << "," << format_double(r.err2) << "," << optional_cell(r.bound_Bk) << ","
        << optional_cell(r.ratio_err_gamma) << "," << format_double(r.max_quant_input) << ","
        << r.saturation_count << "," << r.bits_cum << "\n";
}

inline void write_trace_csv(const std::filesystem::path& path, const Trace& tr) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_trace_csv(out, tr);
}

struct TraceRow {
  std::size_t k = 0;
  double err2 = 0.0;
  std::optional<double> bound_Bk;
  std::optional<double> ratio_err_gamma;
  double max_quant_input = 0.0;
  std::size_t saturation_count = 0;
  std::uint64_t bits_cum = 0;
};

inline std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw Error("trace CSV header mismatch");
  std::vector<TraceRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 7)
      throw Error("trace CSV line " + std::to_string(lineno) + ": expected 7 columns");
    TraceRow r;
    r.k = detail::parse_integer<std::size_t>(cells[0]);
    r.err2 = parse_double(cells[1]);
    if (!cells[2].empty()) r.bound_Bk = parse_double(cells[2]);
    if (!cells[3].empty()) r.ratio_err_gamma = parse_double(cells[3]);
    r.max_quant_input = parse_double(cells[4]);
    r.saturation_count = detail::parse_integer<std::size_t>(cells[5]);
    r.bits_cum = detail::parse_integer<std::uint64_t>(cells[6]);
    rows.push_back(r);
  }
  return rows;
}

// Quantities of a run that can be recomputed from its trace CSV alone.
struct TraceSummary {
  std::size_t rounds = 0;
  double final_err2 = 0.0;
  double min_err2 = 0.0;
  std::optional<double> final_bound_Bk;
  std::optional<double> final_ratio_err_gamma;
  double max_quant_input = 0.0;
  std::size_t saturation_total = 0;
  std::uint64_t bits_total = 0;

  bool operator==(const TraceSummary&) const = default;
};

inline TraceSummary summarize_rows(const std::vector<TraceRow>& rows) {
  if (rows.empty()) throw Error("empty trace");
  TraceSummary s;
  s.rounds = rows.back().k;
  s.final_err2 = rows.back().err2;
  s.min_err2 = rows.front().err2;
  s.final_bound_Bk = rows.back().bound_Bk;
  s.final_ratio_err_gamma = rows.back().ratio_err_gamma;
  s.bits_total = rows.back().bits_cum;
  for (const auto& r : rows) {
    s.min_err2 = std::min(s.min_err2, r.err2);
    s.max_quant_input = std::max(s.max_quant_input, r.max_quant_input);
    s.saturation_total += r.saturation_count;
  }
  return s;
}

inline std::vector<TraceRow> trace_rows(const Trace& tr) {
  std::vector<TraceRow> rows;
  rows.reserve(tr.rounds.size());
  for (const auto& r : tr.rounds)
    rows.push_back({r.k, r.err2, r.bound_Bk, r.ratio_err_gamma, r.max_quant_input,
                    r.saturation_count, r.bits_cum});
  return rows;
}

inline TraceSummary summarize(const Trace& tr) { return summarize_rows(trace_rows(tr)); }

inline void write_summary(std::ostream& out, const TraceSummary& s,
                          const std::vector<std::pair<std::string, std::string>>& extra) {
  for (const auto& [k, v] : extra) out << k << " = " << v << "\n";
  out << "rounds = " << s.rounds << "\n";
  out << "final_err2 = " << format_double(s.final_err2) << "\n";
  out << "min_err2 = " << format_double(s.min_err2) << "\n";
  out << "final_bound_Bk = " << optional_cell(s.final_bound_Bk) << "\n";
  out << "final_ratio_err_gamma = " << optional_cell(s.final_ratio_err_gamma) << "\n";
  out << "max_quant_input = " << format_double(s.max_quant_input) << "\n";
  out << "saturation_total = " << s.saturation_total << "\n";
  out << "bits_total = " << s.bits_total << "\n";
}

inline std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  return kv;
}

inline TraceSummary parse_summary(std::istream& in) {
  auto kv = read_key_values(in);
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error("summary is missing '" + key + "'");
    return it->second;
  };
  auto opt = [&](const std::string& key) -> std::optional<double> {
    const auto& v = need(key);
    return v.empty() ? std::nullopt : std::optional<double>(parse_double(v));
  };
  TraceSummary s;
  s.rounds = detail::parse_integer<std::size_t>(need("rounds"));
  s.final_err2 = parse_double(need("final_err2"));
  s.min_err2 = parse_double(need("min_err2"));
  s.final_bound_Bk = opt("final_bound_Bk");
  s.final_ratio_err_gamma = opt("final_ratio_err_gamma");
  s.max_quant_input = parse_double(need("max_quant_input"));
  s.saturation_total = detail::parse_integer<std::size_t>(need("saturation_total"));
  s.bits_total = detail::parse_integer<std::uint64_t>(need("bits_total"));
  return s;
}

// Same trajectory: every per-round quantity except the bit counters.
inline bool same_trajectory(const Trace& a, const Trace& b) {
  if (a.rounds.size() != b.rounds.size()) return false;
  for (std::size_t i = 0; i < a.rounds.size(); ++i) {
    const auto& x = a.rounds[i];
    const auto& y = b.rounds[i];
    if (x.k != y.k || x.err2 != y.err2 || x.err_inf_per_node != y.err_inf_per_node ||
        x.bound_Bk != y.bound_Bk || x.ratio_err_gamma != y.ratio_err_gamma ||
        x.max_quant_input != y.max_quant_input || x.saturation_count != y.saturation_count ||
        x.drift != y.drift)
      return false;
  }
  if (a.states.size() != b.states.size()) return false;
  for (std::size_t i = 0; i < a.states.size(); ++i)
    if (a.states[i] != b.states[i]) return false;
  return true;
}

// ---------------------------------------------------------------- planner rows

inline constexpr const char* kPlanHeader =
    "case,K,eps,h,alpha_or_beta0,M,Kmin_raw,Kmin,s_bound,member";

struct PlanRow {
  std::string label;
  int K = 0;
  std::optional<double> eps;
  double h = 0.0;
  double alpha_or_beta0 = 0.0;
  double M = 0.0;
  LevelRequirement Kmin;
  std::optional<double> s_bound;
  bool member = false;
};

inline void write_plan_csv(std::ostream& out, const std::vector<PlanRow>& rows) {
  out << kPlanHeader << "\n";
  for (const auto& r : rows)
    out << r.label << "," << r.K << "," << optional_cell(r.eps) << "," << format_double(r.h)
        << "," << format_double(r.alpha_or_beta0) << "," << format_double(r.M) << ","
        << r.Kmin.raw << "," << r.Kmin.clamped << "," << optional_cell(r.s_bound) << ","
        << (r.member ? "true" : "false") << "\n";
}

inline PlanRow plan_row(const ExactPlan& p, const std::string& label) {
  return {label, p.K, p.eps, p.h, p.alpha, p.M, p.Kmin,
          p.s0_min ? std::optional<double>(p.s0_min->value()) : std::nullopt, p.member};
}

inline PlanRow plan_row(const LSPlan& p, const std::string& label) {
  return {label, p.K, p.eps, p.h, p.beta0, p.m.Mprime, p.m.Kmin, p.sr_min.value(), p.member};
}

inline PlanRow evaluate_exact_pair(double alpha, double h, int K, double cx, double cw,
                                   const NetworkSpectra& s, const std::string& label) {
  PlanRow r{label, K, std::nullopt, h, alpha};
  r.member = xi_membership(alpha, h, K, s);
  if (alpha > s.rho_h(h)) {
    r.M = m_value(alpha, h, s);
    r.Kmin = level_from_m(r.M);
    if (s.lambdaN > 0.0) r.s_bound = s0_lower_bound(alpha, h, cx, cw, K, s).value();
  } else {
    r.M = std::numeric_limits<double>::infinity();
  }
  return r;
}

inline PlanRow evaluate_ls_pair(double h, double beta0, int K, double cx, const NetworkSpectra& s,
                                const std::string& label) {
  PlanRow r{label, K, std::nullopt, h, beta0};
  r.member = xi_prime_membership(h, beta0, K, s);
  if (1.0 / beta0 > rho_hat(h, s)) {
    const auto mp = m_prime(h, beta0, s, cx);
    r.M = mp.Mprime;
    r.Kmin = mp.Kmin;
    r.s_bound = sr_lower_bound(h, K, cx, s, mp.M1, mp.M2).value();
  } else {
    r.M = std::numeric_limits<double>::infinity();
  }
  return r;
}

// ---------------------------------------------------------------- runs

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> max_rounds;
  bool strict_saturation = false;
};

inline void apply_overrides(ExperimentConfig& c, const RunOverrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.max_rounds) c.max_rounds = *o.max_rounds;
  if (o.strict_saturation) c.solver_strict_saturation = true;
}

struct RunArtifacts {
  std::filesystem::path trace_path;
  std::filesystem::path summary_path;
  std::filesystem::path plan_path;
  TraceSummary summary;
  Trace trace;
  std::vector<PlanRow> plan;
};

inline InitialStates initial_from_config(const ExperimentConfig& c) {
  if (c.solver_x0 == "random") return RandomStates{c.solver_x0_cx, c.seed};
  return ZeroStates{};
}

inline RunArtifacts run_experiment(ExperimentConfig c, const std::filesystem::path& out_dir,
                                   const RunOverrides& overrides = {}) {
  apply_overrides(c, overrides);
  validate(c);
  const Network net(problem_from_config(c), graph_from_config(c));
  const auto& s = net.spectra;
  const bool planned = c.solver_params == "planned";
  RunArtifacts art;

  if (c.mode == "exact" || c.mode == "robust") {
    ExactConfig ec;
    ec.h = c.solver_h;
    ec.alpha = c.solver_alpha;
    ec.K = static_cast<int>(c.solver_K);
    ec.s0 = c.solver_s0;
    ec.max_rounds = c.max_rounds;
    ec.strict_saturation = c.solver_strict_saturation;
    ec.strict_config = c.solver_strict_config;
    ec.stop_err2 = c.solver_stop_err2;
    ec.x0 = initial_from_config(c);
    if (planned) {
      if (net.cls.kind != SolutionKind::unique_exact)
        throw Error("exact mode needs a unique exact solution");
      const Matrix x0 = initial_states(ec.x0, s.n, s.m);
      Trace probe;
      detail::initial_constants(probe, x0, net.cls.solution);
      const auto plan = plan_exact(static_cast<int>(c.planner_K), c.planner_eps, s,
                                   c.planner_pick_fraction, std::make_pair(probe.cx, probe.cw));
      ec.h = plan.h;
      ec.alpha = plan.alpha;
      ec.K = plan.K;
      art.plan.push_back(plan_row(plan, "planned"));
    }
    art.trace = c.mode == "robust" ? run_exact_on(net, ec, c.noise()) : run_exact_on(net, ec);
    if (!planned)
      art.plan.push_back(
          evaluate_exact_pair(ec.alpha, ec.h, ec.K, art.trace.cx, art.trace.cw, s, "configured"));
  } else if (c.mode == "ls") {
    LSConfig lc;
    lc.h = c.solver_h;
    lc.K = static_cast<int>(c.solver_K);
    lc.sr = c.solver_sr;
    lc.max_rounds = c.max_rounds;
    lc.strict_saturation = c.solver_strict_saturation;
    lc.strict_config = c.solver_strict_config;
    lc.stop_err2 = c.solver_stop_err2;
    lc.x0 = initial_from_config(c);
    if (planned) {
      const Matrix x0 = initial_states(lc.x0, s.n, s.m);
      const double cx = x0.size() ? x0.cwiseAbs().maxCoeff() : 0.0;
      const auto plan = plan_ls(static_cast<int>(c.planner_K), c.planner_eps, s, c.planner_delta,
                                c.planner_pick_fraction, cx);
      lc.h = plan.h;
      lc.K = plan.K;
      lc.gamma = plan.gamma;
      art.plan.push_back(plan_row(plan, "planned"));
    } else {
      lc.gamma = GammaSchedule(c.gamma_k0, c.gamma_delta);
    }
    art.trace = run_ls_on(net, lc);
    if (!planned)
      art.plan.push_back(
          evaluate_ls_pair(lc.h, lc.gamma.beta0(), lc.K, art.trace.cx, s, "configured"));
  } else {
    BaselineConfig bc;
    bc.h = c.solver_h;
    bc.max_rounds = c.max_rounds;
    bc.stop_err2 = c.solver_stop_err2;
    bc.x0 = initial_from_config(c);
    if (net.cls.kind == SolutionKind::unique_least_squares)
      bc.gamma = GammaSchedule(c.gamma_k0, c.gamma_delta);
    art.trace = run_baseline_on(net, bc);
  }

  std::filesystem::create_directories(out_dir);
  art.trace_path = out_dir / c.output_trace;
  art.summary_path = out_dir / c.output_summary;
  write_trace_csv(art.trace_path, art.trace);
  art.summary = summarize(art.trace);
  {
    std::ofstream out(art.summary_path, std::ios::binary);
    if (!out) throw Error("cannot write '" + art.summary_path.string() + "'");
    std::string y;
    for (Index a = 0; a < art.trace.y_ref.size(); ++a)
      y += (a ? " " : "") + format_double(art.trace.y_ref(a));
    write_summary(out, art.summary,
                  {{"mode", c.mode},
                   {"rng", std::string(Rng::kAlgorithm)},
                   {"seed", std::to_string(c.seed)},
                   {"solution_kind", std::string(to_string(net.cls.kind))},
                   {"y_ref", y},
                   {"bits_nonzero_total",
                    std::to_string(art.trace.rounds.empty() ? 0
                                                            : art.trace.last().nonzero_bits_cum)},
                   {"warnings", std::to_string(art.trace.warnings.size())}});
    for (std::size_t i = 0; i < art.trace.warnings.size(); ++i)
      out << "warning." << i + 1 << " = " << art.trace.warnings[i] << "\n";
  }
  if (!art.plan.empty()) {
    art.plan_path = out_dir / c.output_plan;
    std::ofstream out(art.plan_path, std::ios::binary);
    if (!out) throw Error("cannot write '" + art.plan_path.string() + "'");
    write_plan_csv(out, art.plan);
  }
  return art;
}

// ---------------------------------------------------------------- co-simulation

struct CoSimReport {
  std::size_t rounds = 0;
  double max_rel_dev = 0.0;
  std::size_t worst_round = 0;
  double max_theta = 0.0;         // max_k ||θ(k)||_inf from the compact form
  double max_theta_gap = 0.0;     // |max_quant_input - ||θ||_inf| over rounds
  std::size_t eps_violations = 0;  // rounds with ||ε(k)||_inf above its bound
  double max_eta_gap = 0.0;       // ls: propagated vs direct η, relative
  double max_eta_mean = 0.0;      // ls: ||(1^T ⊗ I) η||_inf
};

inline double rel_dev(const Vector& a, const Vector& b) {
  const double scale = std::max(inf_norm(a), std::numeric_limits<double>::min());
  return inf_norm(Vector(a - b)) / scale;
}

inline CoSimReport cosimulate_exact(const Network& net, ExactConfig cfg, std::size_t rounds) {
  cfg.max_rounds = rounds;
  cfg.stop_err2 = 0.0;
  cfg.record_states = true;
  const Trace tr = run_exact_on(net, cfg);
  const auto ops = oracle::make_operators(net.problem, net.lap);
  const Vector ystack = stack_copies(net.cls.solution, static_cast<Index>(net.spectra.n));
  auto st = oracle::compact_exact_init(tr.states.front(), ystack, cfg.s0);
  CoSimReport rep;
  rep.rounds = tr.rounds_executed();
  for (std::size_t k = 0; k < rep.rounds; ++k) {
    st = oracle::compact_exact_step(st, cfg.alpha, cfg.h, cfg.K, ops);
    const double s_next = cfg.s0 * std::pow(cfg.alpha, static_cast<double>(k + 1));
    const Vector x = oracle::reconstruct_exact(st, s_next, ystack);
    const double dev = rel_dev(tr.states[k + 1], x);
    if (dev > rep.max_rel_dev) {
      rep.max_rel_dev = dev;
      rep.worst_round = k + 1;
    }
    const double th = inf_norm(st.theta);
    rep.max_theta = std::max(rep.max_theta, th);
    rep.max_theta_gap =
        std::max(rep.max_theta_gap, std::abs(th - tr.rounds[k + 1].max_quant_input));
    if (th <= cfg.K + 0.5 && inf_norm(st.eps) > 1.0 / (2.0 * cfg.alpha) * (1.0 + 1e-12))
      ++rep.eps_violations;
  }
  return rep;
}

inline CoSimReport cosimulate_ls(const Network& net, LSConfig cfg, std::size_t rounds) {
  cfg.max_rounds = rounds;
  cfg.stop_err2 = 0.0;
  cfg.record_states = true;
  const Trace tr = run_ls_on(net, cfg);
  const auto ops = oracle::make_operators(net.problem, net.lap);
  auto st = oracle::compact_ls_init(tr.states.front(), cfg.sr, ops);
  CoSimReport rep;
  rep.rounds = tr.rounds_executed();
  const double beta0 = cfg.gamma.beta0();
  for (std::size_t k = 0; k < rep.rounds; ++k) {
    const double bk = cfg.gamma.beta(k);
    st = oracle::compact_ls_step(st, cfg.h, cfg.sr, cfg.gamma.value(k), cfg.gamma.value(k + 1), bk,
                                 cfg.K, ops);
    const double dev = rel_dev(tr.states[k + 1], st.x);
    if (dev > rep.max_rel_dev) {
      rep.max_rel_dev = dev;
      rep.worst_round = k + 1;
    }
    const double th = inf_norm(st.theta);
    rep.max_theta = std::max(rep.max_theta, th);
    rep.max_theta_gap =
        std::max(rep.max_theta_gap, std::abs(th - tr.rounds[k + 1].max_quant_input));
    if (th <= cfg.K + 0.5 && inf_norm(st.eps) > bk / 2.0 * (1.0 + 1e-12) && bk <= beta0)
      ++rep.eps_violations;
    rep.max_eta_gap = std::max(rep.max_eta_gap, rel_dev(st.eta_direct, st.eta));
    rep.max_eta_mean =
        std::max(rep.max_eta_mean, inf_norm(oracle::block_sum(st.eta, ops.m)));
  }
  return rep;
}

// ---------------------------------------------------------------- reports

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ReproReport {
  std::string id;
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
  void add(std::string name, bool pass, std::string detail) {
    checks.push_back({std::move(name), pass, std::move(detail)});
  }
};

inline void write_report(std::ostream& out, const ReproReport& r) {
  for (const auto& c : r.checks)
    out << (c.pass ? "PASS " : "FAIL ") << r.id << ": " << c.name << " -- " << c.detail << "\n";
  out << r.id << ": " << (r.passed() ? "all checks passed" : "some checks FAILED") << "\n";
}

struct ReproOptions {
  std::uint64_t seed = 1;
  std::optional<std::size_t> max_rounds;
  bool strict_saturation = false;
  std::size_t ex3_graphs_per_p = 100;
  std::size_t ex3_n = 100;
  std::size_t ex3_m = 10;
  EntryDistribution entries = EntryDistribution::normal;
  std::size_t robust_seeds = 10;
};

namespace detail {

inline std::string fmt(double v) { return format_double(v); }

inline std::string fmt_short(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline bool bound_dominates(const Trace& tr, std::size_t& first_bad) {
  for (const auto& r : tr.rounds)
    if (r.k >= 1 && r.bound_Bk && !(r.err2 <= *r.bound_Bk)) {
      first_bad = r.k;
      return false;
    }
  return true;
}

inline void write_csv_file(const std::filesystem::path& path, const std::string& text,
                           ReproReport& rep) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  rep.files.push_back(path);
}

inline void save_trace(const std::filesystem::path& path, const Trace& tr, ReproReport& rep) {
  write_trace_csv(path, tr);
  rep.files.push_back(path);
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::optional<std::size_t> first_round_below(const Trace& tr, double level) {
  for (const auto& r : tr.rounds)
    if (r.err2 <= level) return r.k;
  return std::nullopt;
}

}  // namespace detail

using detail::median;

// K grid for the scalability study: the published K range mapped through the
// published Θ_N to K·Θ_N values, then back to K with our Θ_N.
inline std::vector<int> scaled_k_grid(double theta) {
  const double tp = reference::get("ex2.theta");
  const double k_first = reference::get("ex2.K_first");
  const double k_last = reference::get("ex2.K_last");
  const double k_step = reference::get("ex2.K_step");
  std::vector<int> out;
  for (double K = k_first; K <= k_last + 0.5; K += k_step) {
    const int k = std::max(1, static_cast<int>(std::llround(K * tp / theta)));
    if (out.empty() || k != out.back()) out.push_back(k);
  }
  return out;
}

inline ReproReport reproduce_ex1_thm1(const std::filesystem::path& out, const ReproOptions& o) {
  using reference::get;
  ReproReport rep{"ex1_thm1"};
  const Network net(reference::example1_problem(), reference::fig1_graph());
  const auto& s = net.spectra;
  const double h_calc = get("ex1.thm1.h_numerator") / (s.fd_min + s.fd_max);
  rep.add("h = 1.98/(fd_min+fd_max) matches 0.4215 +-5e-4",
          std::abs(h_calc - get("ex1.thm1.h")) <= 5e-4, "h = " + detail::fmt(h_calc));
  const double rho = s.rho_h(h_calc);
  rep.add("rho_h matches 0.9554 +-5e-4", std::abs(rho - get("ex1.thm1.rho_h")) <= 5e-4,
          "rho_h = " + detail::fmt(rho));
  const double h = get("ex1.thm1.h");
  const double alpha = get("ex1.thm1.alpha");
  const auto need = level_from_m(m_value(alpha, h, s));
  rep.add("level requirement K(0.98, 0.4215) = 225 +-1",
          std::llabs(need.clamped - static_cast<long long>(get("ex1.thm1.Kmin"))) <= 1,
          "M = " + detail::fmt(m_value(alpha, h, s)) + ", K = " + std::to_string(need.clamped));

  std::vector<Trace> traces;
  for (int i = 1; i <= 3; ++i) {
    ExactConfig cfg;
    cfg.h = h;
    cfg.alpha = alpha;
    cfg.s0 = get("ex1.thm1.s0");
    cfg.K = static_cast<int>(get("ex1.thm1.K", i));
    cfg.max_rounds = o.max_rounds.value_or(2000);
    cfg.strict_saturation = o.strict_saturation;
    traces.push_back(run_exact_on(net, cfg));
    detail::save_trace(out / ("ex1_thm1_K" + std::to_string(cfg.K) + ".csv"), traces.back(), rep);
  }
  rep.add("K = 100, 300, 1000 trajectories identical",
          same_trajectory(traces[0], traces[1]) && same_trajectory(traces[1], traces[2]),
          std::to_string(traces[1].rounds_executed()) + " rounds each");
  std::size_t sat = 0;
  for (const auto& t : traces) sat += t.saturation_total;
  rep.add("no saturation at any K", sat == 0, std::to_string(sat) + " saturated encodings");
  std::size_t bad = 0;
  const bool dom = detail::bound_dominates(traces[1], bad);
  rep.add("B(k) dominates err2 for every k >= 1", dom,
          dom ? "ok" : "first violation at k = " + std::to_string(bad));
  const auto below = detail::first_round_below(traces[1], 1e-6);
  rep.add("err2 < 1e-6 within the run", below.has_value(),
          below ? "first at k = " + std::to_string(*below)
                : "final err2 = " + detail::fmt(traces[1].last().err2));
  return rep;
}

inline ReproReport reproduce_ex1_thm2(const std::filesystem::path& out, const ReproOptions& o) {
  using reference::get;
  ReproReport rep{"ex1_thm2"};
  const Network net(reference::example1_problem(), reference::fig1_graph());
  const auto& s = net.spectra;
  const double eps = get("ex1.thm2.eps");
  std::vector<PlanRow> rows;
  std::vector<double> finals;
  for (int i = 1; i <= 3; ++i) {
    const int K = static_cast<int>(get("ex1.thm2.K", i));
    const double alpha = get("ex1.thm2.alpha", i);
    const double h = get("ex1.thm2.h", i);
    const double s0 = get("ex1.thm2.s0", i);
    const std::string tag = "K=" + std::to_string(K);
    const bool member = xi_membership(alpha, h, K, s);
    rep.add(tag + ": published (alpha, h) in Xi_K", member,
            "(" + detail::fmt_short(alpha) + ", " + detail::fmt_short(h) + ")");
    const double cw = inf_norm(net.cls.solution);
    rows.push_back(evaluate_exact_pair(alpha, h, K, 0.0, cw, s, "published"));
    rows.push_back(plan_row(plan_exact(K, eps, s, 0.5, std::make_pair(0.0, cw)), "planned"));
    if (alpha > s.rho_h(h)) {
      const double need = s0_lower_bound(alpha, h, 0.0, cw, K, s).value();
      rep.add(tag + ": published s(0) meets the s(0) bound", s0 >= need,
              "s(0) = " + detail::fmt_short(s0) + ", bound = " + detail::fmt(need));
    }
    ExactConfig cfg;
    cfg.h = h;
    cfg.alpha = alpha;
    cfg.s0 = s0;
    cfg.K = K;
    cfg.max_rounds = o.max_rounds.value_or(250000);
    cfg.strict_saturation = o.strict_saturation;
    const Trace tr = run_exact_on(net, cfg);
    detail::save_trace(out / ("ex1_thm2_K" + std::to_string(K) + ".csv"), tr, rep);
    rep.add(tag + ": no saturation", tr.saturation_total == 0,
            std::to_string(tr.saturation_total) + " saturated encodings");
    std::size_t bad = 0;
    const bool dom = detail::bound_dominates(tr, bad);
    rep.add(tag + ": B(k) dominates err2", dom,
            dom ? "ok" : "first violation at k = " + std::to_string(bad));
    finals.push_back(tr.last().err2);
  }
  rep.add("higher K ends closer to y*", finals[0] > finals[1] && finals[1] > finals[2],
          "final err2 = " + detail::fmt_short(finals[0]) + ", " + detail::fmt_short(finals[1]) +
              ", " + detail::fmt_short(finals[2]));
  std::ostringstream plan;
  write_plan_csv(plan, rows);
  detail::write_csv_file(out / "ex1_thm2_plan.csv", plan.str(), rep);
  return rep;
}

struct AlphaStarRow {
  int K = 0;
  double k_theta = 0.0;
  AlphaStar star;
  double exp_neg = 0.0;
  double lower = 0.0;
};

inline std::vector<AlphaStarRow> alpha_star_table(const NetworkSpectra& s, double theta,
                                                  const std::vector<int>& Ks) {
  std::vector<AlphaStarRow> rows;
  for (int K : Ks) {
    AlphaStarRow r;
    r.K = K;
    r.k_theta = K * theta;
    r.star = alpha_star(K, s);
    r.exp_neg = std::exp(-r.k_theta);
    r.lower = 1.0 - r.k_theta;
    rows.push_back(r);
  }
  return rows;
}

inline std::string alpha_star_csv(const std::vector<AlphaStarRow>& rows) {
  std::ostringstream os;
  os << "K,K_theta,alpha_star,eps,h,exp_neg_K_theta,ratio,lower_bound\n";
  for (const auto& r : rows)
    os << r.K << "," << detail::fmt(r.k_theta) << "," << detail::fmt(r.star.alpha) << ","
       << detail::fmt(r.star.eps) << "," << detail::fmt(r.star.h) << "," << detail::fmt(r.exp_neg)
       << "," << detail::fmt(r.star.alpha / r.exp_neg) << "," << detail::fmt(r.lower) << "\n";
  return os.str();
}

inline ReproReport reproduce_ex2(const std::filesystem::path& out, const ReproOptions& o) {
  using reference::get;
  ReproReport rep{"ex2"};
  const auto n = static_cast<std::size_t>(get("ex2.N"));
  const auto m = static_cast<std::size_t>(get("ex2.m"));
  const auto rp = random_problem(n, m, SolutionKind::unique_exact, o.seed, o.entries);
  const Network net(rp.problem, generate_graph(GraphKind::cycle, n, 0.0, o.seed).graph);
  const double theta = theta_n(net.ops, net.lap, m, n);
  const double tp = get("ex2.theta");
  rep.add("Theta_N has the published order of magnitude (within 10x of 2.4910e-9)",
          theta >= tp / 10.0 && theta <= tp * 10.0, "Theta_N = " + detail::fmt(theta));
  const auto rows = alpha_star_table(net.spectra, theta, scaled_k_grid(theta));
  detail::write_csv_file(out / "ex2_alpha_star.csv", alpha_star_csv(rows), rep);
  bool lower_ok = true, monotone = true, band = true;
  double worst = 1.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    lower_ok = lower_ok && rows[i].star.alpha > rows[i].lower;
    if (i) monotone = monotone && rows[i].star.alpha <= rows[i - 1].star.alpha;
    const double ratio = rows[i].star.alpha / rows[i].exp_neg;
    if (std::abs(ratio - 1.0) > std::abs(worst - 1.0)) worst = ratio;
    band = band && ratio >= 0.98 && ratio <= 1.02;
  }
  rep.add("alpha*_K > 1 - K*Theta_N on the whole grid", lower_ok,
          std::to_string(rows.size()) + " K values");
  rep.add("alpha*_K non-increasing in K", monotone, "");
  rep.add("alpha*_K / exp(-K*Theta_N) within [0.98, 1.02]", band,
          "K*Theta_N in [" + detail::fmt_short(rows.front().k_theta) + ", " +
              detail::fmt_short(rows.back().k_theta) + "], worst ratio " + detail::fmt(worst));
  return rep;
}

struct ThetaByP {
  double p = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t graphs = 0;
  std::size_t redraws = 0;
};

inline ThetaByP theta_for_p(const LinearProblem& prob, double p, std::size_t graphs,
                            std::uint64_t seed) {
  ThetaByP r;
  r.p = p;
  r.graphs = graphs;
  r.min = std::numeric_limits<double>::infinity();
  r.max = 0.0;
  double sum = 0.0;
  std::uint64_t next = seed;
  for (std::size_t g = 0; g < graphs; ++g) {
    const auto gen = generate_graph(GraphKind::erdos_renyi, prob.n_nodes(), p, next);
    r.redraws += gen.attempts - 1;
    next = gen.seed_used + 1;
    const auto lap = build_laplacian(gen.graph);
    const auto ops = build_stacked(prob, lap);
    const double t = theta_n(ops, lap, prob.dim(), prob.n_nodes());
    sum += t;
    r.min = std::min(r.min, t);
    r.max = std::max(r.max, t);
  }
  r.mean = sum / static_cast<double>(graphs);
  return r;
}

inline ReproReport reproduce_ex3(const std::filesystem::path& out, const ReproOptions& o) {
  using reference::get;
  ReproReport rep{"ex3"};
  const auto rp =
      random_problem(o.ex3_n, o.ex3_m, SolutionKind::unique_exact, o.seed, o.entries);
  const auto& prob = rp.problem;
  std::map<std::string, double> fixed;
  for (auto kind : {GraphKind::complete, GraphKind::star, GraphKind::cycle}) {
    const auto g = generate_graph(kind, o.ex3_n, 0.0, o.seed).graph;
    const auto lap = build_laplacian(g);
    fixed[std::string(to_string(kind))] =
        theta_n(build_stacked(prob, lap), lap, o.ex3_m, o.ex3_n);
  }
  rep.add("cycle > complete > star (published ordering)",
          fixed["cycle"] > fixed["complete"] && fixed["complete"] > fixed["star"],
          "cycle " + detail::fmt_short(fixed["cycle"]) + ", complete " +
              detail::fmt_short(fixed["complete"]) + ", star " + detail::fmt_short(fixed["star"]));

  std::vector<double> ps;
  const double p_first = get("ex3.p_first"), p_step = get("ex3.p_step");
  const auto steps = static_cast<int>(std::llround((get("ex3.p_last") - p_first) / p_step));
  for (int i = 0; i <= steps; ++i) ps.push_back(p_first + i * p_step);
  std::vector<std::future<ThetaByP>> jobs;
  for (std::size_t i = 0; i < ps.size(); ++i)
    jobs.push_back(std::async(std::launch::async, theta_for_p, std::cref(prob), ps[i],
                              o.ex3_graphs_per_p, o.seed + 1000003ULL * (i + 1)));
  std::vector<ThetaByP> rows;
  for (auto& j : jobs) rows.push_back(j.get());

  std::ostringstream os;
  os << "family,p,graphs,redraws,theta_mean,theta_min,theta_max\n";
  for (const auto& [name, t] : fixed)
    os << name << ",,1,0," << detail::fmt(t) << "," << detail::fmt(t) << "," << detail::fmt(t)
       << "\n";
  bool decreasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    os << "erdos_renyi," << detail::fmt(r.p) << "," << r.graphs << "," << r.redraws << ","
       << detail::fmt(r.mean) << "," << detail::fmt(r.min) << "," << detail::fmt(r.max) << "\n";
    if (i) decreasing = decreasing && r.mean < rows[i - 1].mean;
  }
  detail::write_csv_file(out / "ex3_theta.csv", os.str(), rep);
  rep.add("mean Theta_N strictly decreases as p goes 0.1 -> 0.9", decreasing,
          std::to_string(o.ex3_graphs_per_p) + " graphs per p; mean at p=0.1 " +
              detail::fmt_short(rows.front().mean) + ", at p=0.9 " +
              detail::fmt_short(rows.back().mean));
  return rep;
}

inline ReproReport reproduce_ex4_thm3(const std::filesystem::path& out, const ReproOptions& o) {
  using reference::get;
  ReproReport rep{"ex4_thm3"};
  const Network net(reference::example4_problem(), reference::fig1_graph());
  const auto& s = net.spectra;
  const Vector& y = net.cls.solution;
  rep.add("least-squares solution matches (0.1415, 0.6391) within one unit of the 4th decimal",
          net.cls.kind == SolutionKind::unique_least_squares &&
              std::abs(y(0) - get("ex4.y.1")) <= 1.5e-4 && std::abs(y(1) - get("ex4.y.2")) <= 1.5e-4,
          "y = (" + detail::fmt(y(0)) + ", " + detail::fmt(y(1)) + ")");
  const double h = get("ex4.thm3.h");
  const GammaSchedule gamma(get("ex4.thm3.k0"), get("ex4.thm3.delta"));
  const double beta0 = gamma.beta0();
  const bool beta_ok = beta0 > 1.0 && beta0 < 1.0 / rho_hat(h, s);
  rep.add("beta(0) in (1, 1/rho_hat)", beta_ok, "beta(0) = " + detail::fmt(beta0));
  if (beta_ok) {
    const auto mp = m_prime(h, beta0, s);
    rep.add("level requirement K'(0.0853, beta(0)) = 870 +-1",
            std::llabs(mp.Kmin.clamped - static_cast<long long>(get("ex4.thm3.Kmin"))) <= 1,
            "M' = " + detail::fmt(mp.Mprime) + " (M1 = " + detail::fmt_short(mp.M1) +
                ", M2 = " + detail::fmt_short(mp.M2) + ")");
    const double sr = get("ex4.thm3.sr");
    const double need = sr_lower_bound(h, static_cast<int>(get("ex4.thm3.K.1")), 0.0, s, mp.M1,
                                       mp.M2)
                            .value();
    rep.add("s_r = 0.82 exceeds the s_r bound", sr > need, "bound = " + detail::fmt(need));
  }
  std::vector<Trace> traces;
  for (int i = 1; i <= 3; ++i) {
    LSConfig cfg;
    cfg.h = h;
    cfg.gamma = gamma;
    cfg.sr = get("ex4.thm3.sr");
    cfg.K = static_cast<int>(get("ex4.thm3.K", i));
    cfg.max_rounds = o.max_rounds.value_or(20000);
    cfg.strict_saturation = o.strict_saturation;
    traces.push_back(run_ls_on(net, cfg));
    detail::save_trace(out / ("ex4_thm3_K" + std::to_string(cfg.K) + ".csv"), traces.back(), rep);
  }
  rep.add("K = 900, 300, 1800 trajectories identical",
          same_trajectory(traces[0], traces[1]) && same_trajectory(traces[0], traces[2]), "");
  std::size_t sat = 0;
  for (const auto& t : traces) sat += t.saturation_total;
  rep.add("no saturation at any K", sat == 0, std::to_string(sat) + " saturated encodings");
  const auto& t900 = traces[0];
  const double worst = t900.last().err_inf_max;
  rep.add("max_i ||x_i - y*_LS||_inf <= 5e-2 at the last round", worst <= 5e-2,
          "k = " + std::to_string(t900.last().k) + ", error " + detail::fmt(worst));
  std::vector<double> tail;
  double tail_max = 0.0;
  const std::size_t last = t900.last().k;
  for (const auto& r : t900.rounds)
    if (r.k >= last / 2 && r.ratio_err_gamma) {
      tail.push_back(*r.ratio_err_gamma);
      tail_max = std::max(tail_max, *r.ratio_err_gamma);
    }
  const double med = median(tail);
  rep.add("err/gamma bounded over the second half (sup <= 10x median)", tail_max <= 10.0 * med,
          "sup " + detail::fmt_short(tail_max) + ", median " + detail::fmt_short(med));
  return rep;
}

inline ReproReport reproduce_ex4_thm4(const std::filesystem::path& out, const ReproOptions& o) {
  using reference::get;
  ReproReport rep{"ex4_thm4"};
  const Network net(reference::example4_problem(), reference::fig1_graph());
  const auto& s = net.spectra;
  std::vector<PlanRow> rows;
  std::vector<std::optional<std::size_t>> hits;
  std::vector<int> Ks;
  for (int i = 1; i <= 3; ++i) {
    const int K = static_cast<int>(get("ex4.table.K", i));
    const double k0 = get("ex4.table.k0", i);
    const double delta = get("ex4.table.delta", i);
    const double h = get("ex4.table.h", i);
    const double sr = get("ex4.table.sr", i);
    const GammaSchedule gamma(k0, delta);
    const std::string tag = "K=" + std::to_string(K);
    const auto row = evaluate_ls_pair(h, gamma.beta0(), K, 0.0, s, "published");
    rows.push_back(row);
    rows.push_back(plan_row(plan_ls(K, get("ex4.table.eps"), s, delta), "planned"));
    rep.add(tag + ": published (h, beta(0)) in Xi'_K", row.member,
            "beta(0) = " + detail::fmt(gamma.beta0()) + ", limit 1/(1-h*lambda_2) = " +
                detail::fmt(1.0 / (1.0 - h * s.lambda2)));
    rep.add(tag + ": published s_r exceeds the s_r bound", row.s_bound && sr > *row.s_bound,
            row.s_bound ? "bound = " + detail::fmt(*row.s_bound) : "bound undefined");
    LSConfig cfg;
    cfg.h = h;
    cfg.gamma = gamma;
    cfg.sr = sr;
    cfg.K = K;
    cfg.max_rounds = o.max_rounds.value_or(250000);
    cfg.strict_saturation = o.strict_saturation;
    const Trace tr = run_ls_on(net, cfg);
    detail::save_trace(out / ("ex4_thm4_K" + std::to_string(K) + ".csv"), tr, rep);
    // Squared distance, as plotted for the least-squares runs.
    const auto hit = detail::first_round_below(tr, 0.1);
    rep.add(tag + ": converging (squared error reaches 1e-2, ends below the start)",
            hit && tr.last().err2 < tr.rounds.front().err2,
            "final squared error = " + detail::fmt(tr.last().err2 * tr.last().err2) +
                ", saturated encodings " + std::to_string(tr.saturation_total));
    hits.push_back(hit);
    Ks.push_back(K);
  }
  const bool ordered = hits[0] && hits[1] && hits[2] && *hits[2] < *hits[1] && *hits[1] < *hits[0];
  auto show = [](const std::optional<std::size_t>& v) {
    return v ? std::to_string(*v) : std::string("never");
  };
  rep.add("larger K reaches squared error 1e-2 in fewer rounds", ordered,
          "rounds: " + show(hits[0]) + ", " + show(hits[1]) + ", " + show(hits[2]));
  std::ostringstream plan;
  write_plan_csv(plan, rows);
  detail::write_csv_file(out / "ex4_thm4_plan.csv", plan.str(), rep);
  return rep;
}

struct RobustCase {
  std::string name;
  double damping = 1.0;
  bool init_errors = false;
  bool roundoff = false;
};

inline std::vector<RobustCase> robust_cases() {
  const double d = reference::get("robust.damping");
  return {{"ideal", 1.0, false, false},         {"undamped_init", 1.0, true, false},
          {"undamped_roundoff", 1.0, false, true}, {"damped_init", d, true, false},
          {"damped_roundoff", d, false, true},   {"damped_both", d, true, true}};
}

inline ExactConfig robust_config(std::size_t rounds) {
  using reference::get;
  ExactConfig cfg;
  cfg.h = get("robust.h");
  cfg.alpha = get("robust.alpha");
  cfg.K = static_cast<int>(get("robust.K"));
  cfg.s0 = get("robust.s0");
  cfg.max_rounds = rounds;
  cfg.stop_err2 = 0.0;
  return cfg;
}

inline NoiseModel robust_noise(const RobustCase& c, std::uint64_t seed) {
  using reference::get;
  NoiseModel n;
  n.damping = c.damping;
  n.init_errors = c.init_errors;
  n.init_lo = get("robust.init_lo");
  n.init_hi = get("robust.init_hi");
  n.roundoff = c.roundoff;
  n.roundoff_amp = get("robust.roundoff_amp");
  n.seed = seed;
  return n;
}

struct RobustSummary {
  std::map<std::string, std::vector<double>> finals;  // per case, one per seed
  std::map<std::string, double> medians;
};

inline RobustSummary robust_study(const Network& net, std::size_t rounds, std::size_t seeds,
                                  std::uint64_t seed0, const std::filesystem::path* out = nullptr,
                                  ReproReport* rep = nullptr) {
  RobustSummary sum;
  const auto cfg = robust_config(rounds);
  for (const auto& c : robust_cases()) {
    std::vector<std::future<Trace>> jobs;
    for (std::size_t i = 0; i < seeds; ++i)
      jobs.push_back(std::async(std::launch::deferred, [&, i] {
        return run_exact_on(net, cfg, robust_noise(c, seed0 + i));
      }));
    for (std::size_t i = 0; i < seeds; ++i) {
      Trace tr = jobs[i].get();
      sum.finals[c.name].push_back(tr.last().err2);
      if (out && rep && i == 0) detail::save_trace(*out / ("robust_" + c.name + ".csv"), tr, *rep);
    }
    sum.medians[c.name] = median(sum.finals[c.name]);
  }
  return sum;
}

inline ReproReport reproduce_robustness(const std::filesystem::path& out, const ReproOptions& o) {
  ReproReport rep{"robustness"};
  const Network net(reference::example1_problem(), reference::fig1_graph());
  const auto rounds = o.max_rounds.value_or(5000);
  const auto sum = robust_study(net, rounds, o.robust_seeds, o.seed, &out, &rep);
  std::ostringstream os;
  os << "case,seed,final_err2\n";
  for (const auto& [name, finals] : sum.finals)
    for (std::size_t i = 0; i < finals.size(); ++i)
      os << name << "," << o.seed + i << "," << detail::fmt(finals[i]) << "\n";
  detail::write_csv_file(out / "robust_finals.csv", os.str(), rep);
  const auto& md = sum.medians;
  rep.add("damped, round-off only: median final err2 <= 1e-2", md.at("damped_roundoff") <= 1e-2,
          "median " + detail::fmt_short(md.at("damped_roundoff")));
  rep.add("undamped with init errors: median >= 10x damped with init errors",
          md.at("undamped_init") >= 10.0 * md.at("damped_init"),
          "undamped " + detail::fmt_short(md.at("undamped_init")) + ", damped " +
              detail::fmt_short(md.at("damped_init")));
  rep.add("undamped with init errors does not converge (median final err2 >= 1e-2)",
          md.at("undamped_init") >= 1e-2, "median " + detail::fmt_short(md.at("undamped_init")));
  return rep;
}

inline const std::vector<std::string>& reproduction_ids() {
  static const std::vector<std::string> ids = {"ex1_thm1", "ex1_thm2", "ex2",       "ex3",
                                               "ex4_thm3", "ex4_thm4", "robustness"};
  return ids;
}

inline ReproReport reproduce(const std::string& id, const std::filesystem::path& out,
                             const ReproOptions& o = {}) {
  std::filesystem::create_directories(out);
  if (id == "ex1_thm1") return reproduce_ex1_thm1(out, o);
  if (id == "ex1_thm2") return reproduce_ex1_thm2(out, o);
  if (id == "ex2") return reproduce_ex2(out, o);
  if (id == "ex3") return reproduce_ex3(out, o);
  if (id == "ex4_thm3") return reproduce_ex4_thm3(out, o);
  if (id == "ex4_thm4") return reproduce_ex4_thm4(out, o);
  if (id == "robustness") return reproduce_robustness(out, o);
  throw Error("unknown example id '" + id + "'");
}

// ---------------------------------------------------------------- sweeps

struct SweepSpec {
  std::vector<GraphKind> families = {GraphKind::cycle, GraphKind::complete, GraphKind::star};
  std::size_t n = 20;
  std::size_t m = 3;
  double p = 0.5;
  std::vector<int> Ks = {1, 10, 100, 1000};
  std::uint64_t seed = 1;
  EntryDistribution entries = EntryDistribution::normal;
};

struct SweepRow {
  std::string family;
  double theta = 0.0;
  AlphaStarRow row;
};

// One cell per family, evaluated concurrently; rows merged in family order.
inline std::vector<SweepRow> sweep(const SweepSpec& spec) {
  const auto prob = random_problem(spec.n, spec.m, SolutionKind::unique_exact, spec.seed,
                                   spec.entries)
                        .problem;
  std::vector<std::future<std::vector<SweepRow>>> cells;
  for (auto kind : spec.families)
    cells.push_back(std::async(std::launch::async, [&, kind] {
      const auto g = generate_graph(kind, spec.n, spec.p, spec.seed).graph;
      const auto lap = build_laplacian(g);
      const auto ops = build_stacked(prob, lap);
      const auto s = make_spectra(ops, lap, spec.m, spec.n);
      const double theta = theta_n(ops, lap, spec.m, spec.n);
      std::vector<SweepRow> rows;
      for (const auto& r : alpha_star_table(s, theta, spec.Ks))
        rows.push_back({std::string(to_string(kind)), theta, r});
      return rows;
    }));
  std::vector<SweepRow> all;
  for (auto& c : cells)
    for (auto& r : c.get()) all.push_back(std::move(r));
  return all;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "family,theta,K,K_theta,alpha_star,exp_neg_K_theta,lower_bound\n";
  for (const auto& r : rows)
    out << r.family << "," << format_double(r.theta) << "," << r.row.K << ","
        << format_double(r.row.k_theta) << "," << format_double(r.row.star.alpha) << ","
        << format_double(r.row.exp_neg) << "," << format_double(r.row.lower) << "\n";
}

}  // namespace qls
