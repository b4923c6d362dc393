#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qlinsolve/codec.hpp"
#include "qlinsolve/error.hpp"
#include "qlinsolve/format.hpp"
#include "qlinsolve/graph.hpp"
#include "qlinsolve/planner.hpp"
#include "qlinsolve/problem.hpp"
#include "qlinsolve/rng.hpp"
#include "qlinsolve/schedule.hpp"

namespace qls {

struct ZeroStates {};
struct ExplicitStates {
  Matrix x0;  // N×m, row i is x_i(0)
};
struct RandomStates {
  double cx = 1.0;  // entries uniform on [-C_x, C_x]
  std::uint64_t seed = 0;
};
using InitialStates = std::variant<ZeroStates, ExplicitStates, RandomStates>;

inline Matrix initial_states(const InitialStates& init, std::size_t n, std::size_t m) {
  const auto rows = static_cast<Index>(n);
  const auto cols = static_cast<Index>(m);
  if (const auto* e = std::get_if<ExplicitStates>(&init)) {
    if (e->x0.rows() != rows || e->x0.cols() != cols)
      throw Error("x0 must be " + std::to_string(n) + "x" + std::to_string(m));
    return e->x0;
  }
  if (const auto* r = std::get_if<RandomStates>(&init)) {
    if (!(r->cx >= 0.0)) throw Error("random x0 bound C_x must be >= 0");
    Rng rng(r->seed);
    Matrix x(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index a = 0; a < cols; ++a) x(i, a) = rng.uniform(-r->cx, r->cx);
    return x;
  }
  return Matrix::Zero(rows, cols);
}

struct ExactConfig {
  double h = 0.0;
  double alpha = 0.0;
  double s0 = 1.0;
  int K = 1;
  std::size_t max_rounds = 2000;
  bool strict_saturation = false;
  bool strict_config = false;
  InitialStates x0 = ZeroStates{};
  double stop_err2 = 1e-12;
  bool record_states = false;
};

struct LSConfig {
  double h = 0.0;
  int K = 1;
  double sr = 1.0;
  GammaSchedule gamma{1.0, 1.0};
  std::size_t max_rounds = 2000;
  bool strict_saturation = false;
  bool strict_config = false;
  InitialStates x0 = ZeroStates{};
  double stop_err2 = 1e-12;
  bool record_states = false;
};

struct BaselineConfig {
  double h = 0.0;
  std::optional<GammaSchedule> gamma;  // γ ≡ 1 when absent
  std::size_t max_rounds = 2000;
  InitialStates x0 = ZeroStates{};
  double stop_err2 = 1e-12;
  bool record_states = false;
};

enum class RunMode { exact, ls, robust, baseline };

inline std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::exact: return "exact";
    case RunMode::ls: return "ls";
    case RunMode::robust: return "robust";
    case RunMode::baseline: return "baseline";
  }
  return "?";
}

inline RunMode parse_run_mode(std::string_view s) {
  if (s == "exact") return RunMode::exact;
  if (s == "ls") return RunMode::ls;
  if (s == "robust") return RunMode::robust;
  if (s == "baseline") return RunMode::baseline;
  throw Error("unknown mode '" + std::string(s) + "'");
}

struct RoundRecord {
  std::size_t k = 0;
  double err2 = 0.0;
  double err_inf_max = 0.0;
  std::vector<double> err_inf_per_node;
  std::optional<double> bound_Bk;
  std::optional<double> ratio_err_gamma;
  double max_quant_input = 0.0;     // encodings made at round k
  std::size_t saturation_count = 0;  // saturated encodings at round k
  std::uint64_t bits_cum = 0;
  std::uint64_t nonzero_bits_cum = 0;
  std::optional<double> drift;  // robust mode: max ||xhat_ij - b_j||_inf
};

struct Trace {
  RunMode mode = RunMode::exact;
  std::vector<RoundRecord> rounds;
  std::vector<Vector> states;  // stacked x(k), when requested
  std::vector<std::string> warnings;
  Vector y_ref;
  double cx = 0.0;
  double cw = 0.0;
  std::size_t saturation_total = 0;

  std::size_t rounds_executed() const { return rounds.empty() ? 0 : rounds.size() - 1; }
  const RoundRecord& last() const { return rounds.back(); }
};

inline double bound_B(std::size_t k, double h, double alpha, double s0, const NetworkSpectra& s) {
  const double rho = s.rho_h(h);
  if (!(alpha > rho)) throw Error("rate bound undefined: alpha <= rho_h");
  return h * s0 * std::pow(alpha, static_cast<double>(k)) * s.sqrt_mn() * s.lambdaN /
         (2.0 * alpha * (alpha - rho));
}

// Everything derived once per (problem, graph).
struct Network {
  LinearProblem problem;
  Graph graph;
  ProblemClassification cls;
  LaplacianSummary lap;
  StackedOperators ops;
  NetworkSpectra spectra;

  Network(LinearProblem p, Graph g) : problem(std::move(p)), graph(std::move(g)) {
    if (graph.node_count() != problem.n_nodes())
      throw Error("problem has " + std::to_string(problem.n_nodes()) + " nodes but graph has " +
                  std::to_string(graph.node_count()));
    cls = classify(problem);
    lap = build_laplacian(graph);
    ops = build_stacked(problem, lap);
    spectra = make_spectra(ops, lap, problem.dim(), problem.n_nodes());
  }
};

namespace detail {

struct SimParams {
  RunMode mode = RunMode::exact;
  double h = 0.0;
  int K = 1;
  std::size_t max_rounds = 0;
  bool strict_saturation = false;
  double stop_err2 = 0.0;
  bool record_states = false;
  std::function<double(std::size_t)> scale;  // s(k)
  std::function<double(std::size_t)> gamma;  // γ(k)
  std::function<double(std::size_t)> bound;  // B(k), may be empty
  bool report_ratio = false;
  std::optional<NoiseModel> noise;
};

inline void record_round(Trace& tr, const SimParams& sp, std::size_t k, const Matrix& x,
                         const Vector& y) {
  RoundRecord r;
  r.k = k;
  const auto n = x.rows();
  r.err_inf_per_node.resize(static_cast<std::size_t>(n));
  double sq = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Vector d = x.row(i).transpose() - y;
    sq += d.squaredNorm();
    const double e = inf_norm(d);
    r.err_inf_per_node[static_cast<std::size_t>(i)] = e;
    r.err_inf_max = std::max(r.err_inf_max, e);
  }
  r.err2 = std::sqrt(sq);
  if (sp.bound) r.bound_Bk = sp.bound(k);
  if (sp.report_ratio) r.ratio_err_gamma = r.err_inf_max / sp.gamma(k);
  if (sp.record_states) tr.states.push_back(flatten(x));
  tr.rounds.push_back(std::move(r));
}

// Round k: update x(k) -> x(k+1) from codec states of round k, then every node
// encodes x(k+1) with s(k) and every decoder consumes the symbols.
inline Trace simulate(const Network& net, const Matrix& x0, const Vector& y, const SimParams& sp) {
  const auto& p = net.problem;
  const auto& g = net.graph;
  const auto n = p.n_nodes();
  const auto m = p.dim();
  const bool quantized = sp.mode != RunMode::baseline;
  const bool ideal = !sp.noise.has_value();
  const int bits = quantized ? bits_per_coord(sp.K) : 0;

  std::optional<CodecNoise> noise;
  if (sp.noise) noise.emplace(*sp.noise);

  std::vector<EncoderState> enc(n, EncoderState::zero(m));
  std::vector<std::vector<DecoderState>> dec(n);
  for (std::size_t i = 0; i < n; ++i) dec[i].assign(g.degree(i), DecoderState::zero(m));
  if (noise) {
    for (auto& e : enc) e.b = noise->init(m);
    for (auto& row : dec)
      for (auto& d : row) d.xhat = noise->init(m);
  }

  auto drift = [&]() {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& nb = g.neighbors(i);
      for (std::size_t t = 0; t < nb.size(); ++t)
        worst = std::max(worst, inf_norm(Vector(dec[i][t].xhat - enc[nb[t]].b)));
    }
    return worst;
  };

  Trace tr;
  tr.mode = sp.mode;
  tr.y_ref = y;
  Matrix x = x0;
  record_round(tr, sp, 0, x, y);
  if (!ideal) tr.rounds.back().drift = drift();

  std::vector<IntVector> q(n);
  std::uint64_t bits_cum = 0;
  std::uint64_t nz_bits_cum = 0;
  for (std::size_t k = 0; k < sp.max_rounds; ++k) {
    const double gk = sp.gamma(k);
    Matrix xn(x.rows(), x.cols());
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Index>(i);
      const Vector xi = x.row(ii).transpose();
      const Vector hi = p.H.row(ii).transpose();
      Vector consensus = Vector::Zero(static_cast<Index>(m));
      const auto& nb = g.neighbors(i);
      for (std::size_t t = 0; t < nb.size(); ++t) {
        if (quantized)
          consensus += dec[i][t].xhat - enc[i].b;
        else
          consensus += x.row(static_cast<Index>(nb[t])).transpose() - xi;
      }
      const Vector grad = hi * hi.dot(xi) - p.z(ii) * hi;
      xn.row(ii) = (xi + sp.h * (consensus - gk * grad)).transpose();
    }
    x = std::move(xn);

    double max_in = 0.0;
    std::size_t sat = 0;
    std::optional<std::size_t> first_sat;
    if (quantized) {
      const double s = sp.scale(k);
      for (std::size_t j = 0; j < n; ++j) {
        const Vector xj = x.row(static_cast<Index>(j)).transpose();
        EncodeResult res =
            ideal ? encode_step(enc[j], xj, s, sp.K)
                  : damped_encode_step(enc[j], xj, s, sp.K, sp.noise->damping, noise->roundoff(m),
                                       sp.noise->damped_predictor);
        enc[j] = std::move(res.state);
        q[j] = std::move(res.q);
        max_in = std::max(max_in, res.input_inf_norm);
        if (res.saturated) {
          ++sat;
          if (!first_sat) first_sat = j;
        }
        const auto nnz = static_cast<std::uint64_t>((q[j].array() != 0).count());
        bits_cum += g.degree(j) * m * static_cast<std::uint64_t>(bits);
        nz_bits_cum += g.degree(j) * nnz * static_cast<std::uint64_t>(bits);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const auto& nb = g.neighbors(i);
        for (std::size_t t = 0; t < nb.size(); ++t)
          dec[i][t] = ideal ? decode_step(dec[i][t], q[nb[t]], s)
                            : damped_decode_step(dec[i][t], q[nb[t]], s, sp.noise->damping,
                                                 noise->roundoff(m));
      }
    }

    record_round(tr, sp, k + 1, x, y);
    auto& rec = tr.rounds.back();
    rec.max_quant_input = max_in;
    rec.saturation_count = sat;
    rec.bits_cum = bits_cum;
    rec.nonzero_bits_cum = nz_bits_cum;
    if (!ideal) rec.drift = drift();
    tr.saturation_total += sat;
    if (sp.strict_saturation && first_sat) throw SaturationError(k + 1, *first_sat);
    if (rec.err2 < sp.stop_err2) break;
  }
  return tr;
}

inline void check_common(double h, int K, std::size_t max_rounds) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error("solver.h must be positive");
  if (K < 1) throw Error("solver.K must be >= 1");
  if (max_rounds == 0) throw Error("max_rounds must be >= 1");
}

inline void initial_constants(Trace& tr, const Matrix& x0, const Vector& y) {
  tr.cx = x0.size() == 0 ? 0.0 : x0.cwiseAbs().maxCoeff();
  tr.cw = 0.0;
  for (Index i = 0; i < x0.rows(); ++i)
    tr.cw = std::max(tr.cw, inf_norm(Vector(x0.row(i).transpose() - y)));
}

inline void settle_warnings(std::vector<std::string>& warnings, bool strict) {
  if (strict && !warnings.empty()) throw Error("configuration rejected: " + warnings.front());
}

}  // namespace detail

inline Trace run_exact_on(const Network& net, const ExactConfig& cfg,
                          std::optional<NoiseModel> noise = std::nullopt) {
  detail::check_common(cfg.h, cfg.K, cfg.max_rounds);
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw Error("solver.alpha must lie in (0, 1]");
  if (!(cfg.s0 > 0.0) || !std::isfinite(cfg.s0)) throw Error("solver.s0 must be positive");
  if (noise) noise->validate();
  if (net.cls.kind != SolutionKind::unique_exact)
    throw Error("exact mode needs a unique exact solution (got " +
                std::string(to_string(net.cls.kind)) + ")");
  const auto& s = net.spectra;
  const Vector y = net.cls.solution;
  const Matrix x0 = initial_states(cfg.x0, s.n, s.m);

  std::vector<std::string> warnings;
  const double rho = s.rho_h(cfg.h);
  const bool rate_defined = cfg.alpha > rho;
  if (!(cfg.h < h_upper_exact(s)))
    warnings.push_back("h = " + format_double(cfg.h) + " is outside (0, 2/(fd_min+fd_max))");
  if (!rate_defined || !(cfg.alpha < 1.0))
    warnings.push_back("alpha = " + format_double(cfg.alpha) + " is outside (1 - h*fd_min, 1)");

  detail::SimParams sp;
  sp.mode = noise ? RunMode::robust : RunMode::exact;
  sp.h = cfg.h;
  sp.K = cfg.K;
  sp.max_rounds = cfg.max_rounds;
  sp.strict_saturation = cfg.strict_saturation;
  sp.stop_err2 = cfg.stop_err2;
  sp.record_states = cfg.record_states;
  sp.scale = [s0 = cfg.s0, a = cfg.alpha](std::size_t k) {
    return s0 * std::pow(a, static_cast<double>(k));
  };
  sp.gamma = [](std::size_t) { return 1.0; };
  if (rate_defined)
    sp.bound = [h = cfg.h, a = cfg.alpha, s0 = cfg.s0, s](std::size_t k) {
      return bound_B(k, h, a, s0, s);
    };
  if (noise) sp.noise = noise;

  Trace probe;
  detail::initial_constants(probe, x0, y);
  if (rate_defined) {
    const auto K_need = level_from_m(m_value(cfg.alpha, cfg.h, s)).clamped;
    if (cfg.K < K_need)
      warnings.push_back("K = " + std::to_string(cfg.K) + " is below the level requirement " +
                         std::to_string(K_need));
    if (s.lambdaN > 0.0) {
      const double need = s0_lower_bound(cfg.alpha, cfg.h, probe.cx, probe.cw, cfg.K, s).value();
      if (cfg.s0 < need)
        warnings.push_back("s0 = " + format_double(cfg.s0) + " is below the bound " +
                           format_double(need));
    }
  }
  detail::settle_warnings(warnings, cfg.strict_config);

  Trace tr = detail::simulate(net, x0, y, sp);
  tr.mode = sp.mode;
  tr.cx = probe.cx;
  tr.cw = probe.cw;
  tr.warnings = std::move(warnings);
  return tr;
}

inline Trace run_exact(const LinearProblem& p, const Graph& g, const ExactConfig& cfg) {
  return run_exact_on(Network(p, g), cfg);
}

inline Trace run_robust(const LinearProblem& p, const Graph& g, const ExactConfig& cfg,
                        const NoiseModel& noise) {
  Trace tr = run_exact_on(Network(p, g), cfg, noise);
  tr.mode = RunMode::robust;
  return tr;
}

inline Trace run_ls_on(const Network& net, const LSConfig& cfg) {
  detail::check_common(cfg.h, cfg.K, cfg.max_rounds);
  if (!(cfg.sr > 0.0) || !std::isfinite(cfg.sr)) throw Error("solver.sr must be positive");
  if (net.cls.kind == SolutionKind::unsupported)
    throw Error("least-squares mode needs rank(H) = m");
  const auto& s = net.spectra;
  const Vector y = net.cls.solution;
  const Matrix x0 = initial_states(cfg.x0, s.n, s.m);

  std::vector<std::string> warnings;
  const double beta0 = cfg.gamma.beta0();
  if (!(cfg.h < h_upper_ls(s)))
    warnings.push_back("h = " + format_double(cfg.h) +
                       " is outside (0, min{2/(lambda_2+lambda_N), 1/fd_min})");
  const bool beta_ok = beta0 < 1.0 / (1.0 - cfg.h * s.lambda2);
  if (!beta_ok)
    warnings.push_back("beta(0) = " + format_double(beta0) + " is outside (1, 1/(1 - h*lambda_2))");

  Trace probe;
  detail::initial_constants(probe, x0, y);
  if (beta_ok) {
    const auto mp = m_prime(cfg.h, beta0, s, probe.cx);
    if (cfg.K < mp.Kmin.clamped)
      warnings.push_back("K = " + std::to_string(cfg.K) + " is below the level requirement " +
                         std::to_string(mp.Kmin.clamped));
    const double need = sr_lower_bound(cfg.h, cfg.K, probe.cx, s, mp.M1, mp.M2).value();
    if (!(cfg.sr > need))
      warnings.push_back("s_r = " + format_double(cfg.sr) + " does not exceed the bound " +
                         format_double(need));
  }
  detail::settle_warnings(warnings, cfg.strict_config);

  detail::SimParams sp;
  sp.mode = RunMode::ls;
  sp.h = cfg.h;
  sp.K = cfg.K;
  sp.max_rounds = cfg.max_rounds;
  sp.strict_saturation = cfg.strict_saturation;
  sp.stop_err2 = cfg.stop_err2;
  sp.record_states = cfg.record_states;
  sp.scale = [sr = cfg.sr, g = cfg.gamma](std::size_t k) { return sr * g.value(k); };
  sp.gamma = [g = cfg.gamma](std::size_t k) { return g.value(k); };
  sp.report_ratio = true;

  Trace tr = detail::simulate(net, x0, y, sp);
  tr.cx = probe.cx;
  tr.cw = probe.cw;
  tr.warnings = std::move(warnings);
  return tr;
}

inline Trace run_ls(const LinearProblem& p, const Graph& g, const LSConfig& cfg) {
  return run_ls_on(Network(p, g), cfg);
}

// Exact-communication update, per node.
inline Trace run_baseline_on(const Network& net, const BaselineConfig& cfg) {
  detail::check_common(cfg.h, 1, cfg.max_rounds);
  if (net.cls.kind == SolutionKind::unsupported) throw Error("baseline needs rank(H) = m");
  const auto& s = net.spectra;
  const Vector y = net.cls.solution;
  const Matrix x0 = initial_states(cfg.x0, s.n, s.m);
  detail::SimParams sp;
  sp.mode = RunMode::baseline;
  sp.h = cfg.h;
  sp.max_rounds = cfg.max_rounds;
  sp.stop_err2 = cfg.stop_err2;
  sp.record_states = cfg.record_states;
  if (cfg.gamma) {
    sp.gamma = [g = *cfg.gamma](std::size_t k) { return g.value(k); };
    sp.report_ratio = true;
  } else {
    sp.gamma = [](std::size_t) { return 1.0; };
  }
  Trace tr = detail::simulate(net, x0, y, sp);
  detail::initial_constants(tr, x0, y);
  return tr;
}

}  // namespace qls
