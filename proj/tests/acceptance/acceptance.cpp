// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>

#include "qlinsolve/experiments.hpp"

using namespace qls;
using reference::get;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) { return detail::fmt_short(v); }

Network ex1() { return Network(reference::example1_problem(), reference::fig1_graph()); }
Network ex4() { return Network(reference::example4_problem(), reference::fig1_graph()); }

// 1. Quantizer grid.
Outcome quantizer_grid() {
  std::size_t bad = 0;
  for (int K : {1, 2, 3, 8}) {
    double prev = -1e300;
    for (int i = -10000; i <= 10000; ++i) {
      const double z = i * 1e-3;
      const double q = quantize(z, K);
      if (q != std::round(q) || std::abs(q) > K) ++bad;
      if (quantize(-z, K) != -q) ++bad;
      if (q < prev) ++bad;
      if (std::abs(z) <= K + 0.5 && std::abs(z - q) > 0.5) ++bad;
      prev = q;
    }
  }
  return {bad == 0, std::to_string(bad) + " violations over 4 x 20001 points"};
}

// 2. Planner numbers for the five-node exact system.
Outcome ex1_planner() {
  const auto net = ex1();
  const auto& s = net.spectra;
  const double h = get("ex1.thm1.h_numerator") / (s.fd_min + s.fd_max);
  const double rho = s.rho_h(h);
  const auto K = level_from_m(m_value(get("ex1.thm1.alpha"), get("ex1.thm1.h"), s)).clamped;
  const bool ok = std::abs(h - 0.4215) <= 5e-4 && std::abs(rho - 0.9554) <= 5e-4 &&
                  std::llabs(K - 225) <= 1;
  return {ok, "h = " + fmt(h) + ", rho_h = " + fmt(rho) + ", K = " + std::to_string(K)};
}

ExactConfig ex1_config(int K) {
  ExactConfig cfg;
  cfg.h = get("ex1.thm1.h");
  cfg.alpha = get("ex1.thm1.alpha");
  cfg.s0 = get("ex1.thm1.s0");
  cfg.K = K;
  return cfg;
}

// 3. Per-step bound with s(0) at its lower bound and K at the level requirement.
Outcome ex1_bound() {
  const auto net = ex1();
  const auto& s = net.spectra;
  auto cfg = ex1_config(0);
  cfg.K = static_cast<int>(level_from_m(m_value(cfg.alpha, cfg.h, s)).clamped);
  Trace probe;
  detail::initial_constants(probe, initial_states(cfg.x0, 5, 2), net.cls.solution);
  cfg.s0 = s0_lower_bound(cfg.alpha, cfg.h, probe.cx, probe.cw, cfg.K, s).value();
  cfg.max_rounds = 3000;
  const Trace tr = run_exact_on(net, cfg);
  std::size_t bad = 0;
  const bool dom = detail::bound_dominates(tr, bad);
  return {dom && tr.saturation_total == 0,
          "K = " + std::to_string(cfg.K) + ", s0 = " + fmt(cfg.s0) + ", rounds " +
              std::to_string(tr.rounds_executed()) + ", saturated " +
              std::to_string(tr.saturation_total) +
              (dom ? "" : ", first violation k = " + std::to_string(bad))};
}

// 4. Trajectories independent of K once nothing saturates.
Outcome ex1_inert() {
  const auto net = ex1();
  const auto a = run_exact_on(net, ex1_config(100));
  const auto b = run_exact_on(net, ex1_config(300));
  const auto c = run_exact_on(net, ex1_config(1000));
  return {same_trajectory(a, b) && same_trajectory(b, c),
          std::to_string(b.rounds_executed()) + " rounds each"};
}

// 5. Per-node simulation against the compact exact recursion.
Outcome exact_oracle() {
  double worst = cosimulate_exact(ex1(), ex1_config(300), 300).max_rel_dev;
  Rng rng(4242);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 5 + rng.next_u64() % 8;
    const std::size_t m = 1 + rng.next_u64() % 4;
    const auto rp = random_problem(n, m, SolutionKind::unique_exact, 100 + t);
    const Network net(rp.problem,
                      generate_graph(GraphKind::erdos_renyi, n, 0.5, 200 + t).graph);
    const int K = 20;
    const auto plan = plan_exact(K, 0.5, net.spectra);
    ExactConfig cfg;
    cfg.h = plan.h;
    cfg.alpha = plan.alpha;
    cfg.K = K;
    cfg.x0 = RandomStates{1.0, 300ULL + t};
    Trace probe;
    detail::initial_constants(probe, initial_states(cfg.x0, n, m), net.cls.solution);
    cfg.s0 = s0_lower_bound(cfg.alpha, cfg.h, probe.cx, probe.cw, K, net.spectra).value();
    worst = std::max(worst, cosimulate_exact(net, cfg, 300).max_rel_dev);
  }
  return {worst <= 1e-9, "max relative deviation " + fmt(worst) + " over 21 problems"};
}

// 6. Published low-rate pairs lie in the exact feasible set.
Outcome ex1_membership() {
  const auto net = ex1();
  bool all = true;
  std::string d;
  for (int i = 1; i <= 3; ++i) {
    const int K = static_cast<int>(get("ex1.thm2.K", i));
    const bool in = xi_membership(get("ex1.thm2.alpha", i), get("ex1.thm2.h", i), K, net.spectra);
    all = all && in;
    d += "K=" + std::to_string(K) + (in ? " in" : " out") + (i < 3 ? ", " : "");
  }
  return {all, d};
}

// 7. Optimal rate against the exponential bound on a 100-node cycle.
Outcome scalability() {
  const std::size_t n = 100, m = 5;
  const auto rp = random_problem(n, m, SolutionKind::unique_exact, 1);
  const Network net(rp.problem, generate_graph(GraphKind::cycle, n, 0.0, 1).graph);
  const double theta = theta_n(net.ops, net.lap, m, n);
  std::vector<int> Ks;
  for (double kt : {0.001, 0.002, 0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1})
    Ks.push_back(static_cast<int>(std::llround(kt / theta)));
  const auto rows = alpha_star_table(net.spectra, theta, Ks);
  bool lower = true, band = true;
  double lo = 1e9, hi = 0;
  for (const auto& r : rows) {
    lower = lower && r.star.alpha > r.lower;
    if (r.k_theta >= 0.01 - 1e-12 && r.k_theta <= 0.1 + 1e-12) {
      const double ratio = r.star.alpha / r.exp_neg;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      band = band && ratio >= 0.98 && ratio <= 1.02;
    }
  }
  return {lower && band, "Theta_N = " + fmt(theta) + ", lower bound " +
                             (lower ? "holds" : "violated") + ", ratio in [" + fmt(lo) + ", " +
                             fmt(hi) + "] for K*Theta in [0.01, 0.1]"};
}

// 8. Least-squares planner numbers.
Outcome ls_planner() {
  const auto net = ex4();
  const auto& s = net.spectra;
  const double h = get("ex4.thm3.h");
  const GammaSchedule g(get("ex4.thm3.k0"), get("ex4.thm3.delta"));
  const auto mp = m_prime(h, g.beta0(), s);
  const bool kmin = std::llabs(mp.Kmin.clamped - 870) <= 1;
  const double need = sr_lower_bound(h, 900, 0.0, s, mp.M1, mp.M2).value();
  const bool sr = get("ex4.thm3.sr") > need;
  bool rows = true;
  std::string rd;
  for (int i = 1; i <= 3; ++i) {
    const int K = static_cast<int>(get("ex4.table.K", i));
    const auto r = evaluate_ls_pair(get("ex4.table.h", i),
                                    GammaSchedule(get("ex4.table.k0", i), get("ex4.table.delta", i)).beta0(),
                                    K, 0.0, s, "published");
    const bool ok = r.member && r.s_bound && get("ex4.table.sr", i) > *r.s_bound;
    rows = rows && ok;
    rd += " K=" + std::to_string(K) + (ok ? " ok" : r.member ? " s_r" : " out");
  }
  return {kmin && sr && rows, "K' = " + std::to_string(mp.Kmin.clamped) + ", s_r bound " +
                                  fmt(need) + ", table:" + rd};
}

LSConfig ex4_config(int K) {
  LSConfig cfg;
  cfg.h = get("ex4.thm3.h");
  cfg.gamma = GammaSchedule(get("ex4.thm3.k0"), get("ex4.thm3.delta"));
  cfg.sr = get("ex4.thm3.sr");
  cfg.K = K;
  cfg.max_rounds = 20000;
  return cfg;
}

// 9. Least-squares convergence, rate and K independence.
Outcome ls_convergence() {
  const auto net = ex4();
  auto run = [&](int K) {
    auto cfg = ex4_config(K);
    cfg.record_states = true;
    return run_ls_on(net, cfg);
  };
  const auto tr = run(900);
  const Vector y = Eigen::Vector2d(get("ex4.y.1"), get("ex4.y.2"));
  double err = 0.0;
  const Vector& x = tr.states.back();
  for (Index i = 0; i < 5; ++i) err = std::max(err, inf_norm(Vector(x.segment(2 * i, 2) - y)));
  std::vector<double> tail;
  for (const auto& r : tr.rounds)
    if (r.k >= 10000 && r.k <= 20000 && r.ratio_err_gamma) tail.push_back(*r.ratio_err_gamma);
  const double sup = tail.empty() ? 0.0 : *std::max_element(tail.begin(), tail.end());
  const double med = median(tail);
  const auto a = run(300);
  const auto c = run(1800);
  const bool same = same_trajectory(a, tr) && same_trajectory(tr, c);
  return {err <= 5e-2 && sup <= 10 * med && same,
          "k = " + std::to_string(tr.last().k) + ", error " + fmt(err) + ", ratio sup " + fmt(sup) +
              " median " + fmt(med) + ", K-identical " + (same ? "yes" : "no")};
}

// 10. Per-node simulation against the compact least-squares recursion.
Outcome ls_oracle() {
  const auto rep = cosimulate_ls(ex4(), ex4_config(900), 2000);
  return {rep.max_rel_dev <= 1e-8, "max relative deviation " + fmt(rep.max_rel_dev)};
}

// 11. Damped codec under initialization errors and round-off.
Outcome robustness() {
  const auto sum = robust_study(ex1(), 5000, 10, 1);
  const auto& md = sum.medians;
  const bool ok = md.at("damped_roundoff") <= 1e-2 &&
                  md.at("undamped_init") >= 10 * md.at("damped_init");
  return {ok, "damped round-off " + fmt(md.at("damped_roundoff")) + ", undamped init " +
                  fmt(md.at("undamped_init")) + ", damped init " + fmt(md.at("damped_init"))};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 12. Byte-identical outputs across repeated runs.
Outcome determinism() {
  const auto base = std::filesystem::temp_directory_path() / "qls_acceptance_det";
  std::size_t runs = 0, diffs = 0;
  for (const auto& e : std::filesystem::directory_iterator(QLS_CONFIG_DIR)) {
    if (e.path().extension() != ".cfg") continue;
    const auto cfg = load_config(e.path());
    RunOverrides o;
    o.max_rounds = 2000;
    const auto stem = e.path().stem().string();
    const auto a = run_experiment(cfg, base / "a" / stem, o);
    const auto b = run_experiment(cfg, base / "b" / stem, o);
    for (auto [x, y] : {std::pair{a.trace_path, b.trace_path}, {a.summary_path, b.summary_path},
                        {a.plan_path, b.plan_path}})
      if (slurp(x) != slurp(y)) ++diffs;
    ++runs;
  }
  std::filesystem::remove_all(base);
  return {runs > 0 && diffs == 0,
          std::to_string(runs) + " configs, " + std::to_string(diffs) + " differing files"};
}

struct Criterion {
  int id;
  std::string name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> all = {
      {1, "quantizer exactness", 1, quantizer_grid},
      {2, "exact planner numbers", 1, ex1_planner},
      {3, "per-step error bound", 5, ex1_bound},
      {4, "data-rate inertness", 5, ex1_inert},
      {5, "exact oracle equivalence", 10, exact_oracle},
      {6, "published low-rate pairs feasible", 1, ex1_membership},
      {7, "scalability bound", 30, scalability},
      {8, "least-squares planner numbers", 1, ls_planner},
      {9, "least-squares convergence", 20, ls_convergence},
      {10, "least-squares oracle equivalence", 10, ls_oracle},
      {11, "damped codec robustness", 30, robustness},
      {12, "determinism", 10, determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt < c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " -- "
              << o.detail << " [" << fmt(dt) << " s, limit " << c.limit_s << " s"
              << (in_time ? "" : ", too slow") << "]" << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed")
            << std::endl;
  return failed ? 1 : 0;
}
