#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qlinsolve/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Globals {
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string out = ".";
  bool strict_saturation = false;
  std::optional<std::size_t> max_rounds;
};

qls::LinearProblem load_problem_arg(const std::string& s) {
  if (s == "ex1" || s == "ex4") return qls::reference::builtin_problem(s);
  return qls::load_problem(s);
}

qls::Graph load_graph_arg(const std::string& s) {
  if (s == "fig1") return qls::reference::builtin_graph(s);
  return qls::load_graph(s);
}

void print_plan(std::ostream& os, const qls::PlanRow& r, std::string_view which) {
  os << "case = " << which << "\n"
     << "K = " << r.K << "\n"
     << "eps = " << qls::optional_cell(r.eps) << "\n"
     << "h = " << qls::format_double(r.h) << "\n"
     << (which == "exact" ? "alpha = " : "beta0 = ") << qls::format_double(r.alpha_or_beta0)
     << "\n"
     << (which == "exact" ? "M = " : "Mprime = ") << qls::format_double(r.M) << "\n"
     << "Kmin = " << r.Kmin.clamped << "\n"
     << (which == "exact" ? "s0_min = " : "sr_min = ") << qls::optional_cell(r.s_bound) << "\n"
     << "membership = " << (r.member ? "true" : "false") << "\n";
}

int run_plan(const Globals& g, const std::string& which, int K, double eps, double delta,
             double pick, const std::string& problem, const std::string& graph,
             const std::string& csv) {
  const qls::Network net(load_problem_arg(problem), load_graph_arg(graph));
  qls::PlanRow row;
  if (which == "exact") {
    const double cw = qls::inf_norm(net.cls.solution);
    row = qls::plan_row(qls::plan_exact(K, eps, net.spectra, pick, std::make_pair(0.0, cw)),
                        "planned");
  } else {
    row = qls::plan_row(qls::plan_ls(K, eps, net.spectra, delta, pick), "planned");
  }
  print_plan(std::cout, row, which);
  if (!csv.empty()) {
    const auto path = std::filesystem::path(g.out) / csv;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    qls::write_plan_csv(out, {row});
  }
  return row.member ? kOk : kCheckFailed;
}

int run_solve(const Globals& g, const std::string& config_path) {
  auto cfg = qls::load_config(config_path);
  qls::RunOverrides o;
  if (g.seed_set) o.seed = g.seed;
  if (g.max_rounds) o.max_rounds = *g.max_rounds;
  o.strict_saturation = g.strict_saturation;
  const auto art = qls::run_experiment(cfg, g.out, o);
  std::cout << "trace = " << art.trace_path.string() << "\n"
            << "summary = " << art.summary_path.string() << "\n";
  if (!art.plan_path.empty()) std::cout << "plan = " << art.plan_path.string() << "\n";
  std::cout << "rounds = " << art.summary.rounds << "\n"
            << "final_err2 = " << qls::format_double(art.summary.final_err2) << "\n"
            << "saturation_total = " << art.summary.saturation_total << "\n"
            << "bits_total = " << art.summary.bits_total << "\n";
  for (const auto& w : art.trace.warnings) std::cerr << "warning: " << w << "\n";
  return kOk;
}

int run_oracle_check(const Globals& g, const std::string& mode, std::size_t rounds) {
  using qls::reference::get;
  const std::size_t n = g.max_rounds.value_or(rounds);
  if (mode == "exact") {
    const qls::Network net(qls::reference::example1_problem(), qls::reference::fig1_graph());
    qls::ExactConfig cfg;
    cfg.h = get("ex1.thm1.h");
    cfg.alpha = get("ex1.thm1.alpha");
    cfg.s0 = get("ex1.thm1.s0");
    cfg.K = static_cast<int>(get("ex1.thm1.K.2"));
    const auto rep = qls::cosimulate_exact(net, cfg, n);
    std::cout << "mode = exact\nrounds = " << rep.rounds
              << "\nmax_rel_dev = " << qls::format_double(rep.max_rel_dev)
              << "\nworst_round = " << rep.worst_round
              << "\nmax_theta = " << qls::format_double(rep.max_theta)
              << "\neps_violations = " << rep.eps_violations << "\n";
    return rep.max_rel_dev <= 1e-9 ? kOk : kCheckFailed;
  }
  const qls::Network net(qls::reference::example4_problem(), qls::reference::fig1_graph());
  qls::LSConfig cfg;
  cfg.h = get("ex4.thm3.h");
  cfg.gamma = qls::GammaSchedule(get("ex4.thm3.k0"), get("ex4.thm3.delta"));
  cfg.sr = get("ex4.thm3.sr");
  cfg.K = static_cast<int>(get("ex4.thm3.K.1"));
  const auto rep = qls::cosimulate_ls(net, cfg, n);
  std::cout << "mode = ls\nrounds = " << rep.rounds
            << "\nmax_rel_dev = " << qls::format_double(rep.max_rel_dev)
            << "\nworst_round = " << rep.worst_round
            << "\nmax_eta_gap = " << qls::format_double(rep.max_eta_gap)
            << "\nmax_eta_mean = " << qls::format_double(rep.max_eta_mean) << "\n";
  return rep.max_rel_dev <= 1e-8 ? kOk : kCheckFailed;
}

int run_alpha_star(const std::vector<int>& Ks, const std::string& problem,
                   const std::string& graph, double eps_step) {
  const qls::Network net(load_problem_arg(problem), load_graph_arg(graph));
  const double theta = qls::theta_n(net.ops, net.lap, net.spectra.m, net.spectra.n);
  std::cout << "theta = " << qls::format_double(theta) << "\n";
  std::cout << "K,alpha_star,eps,h,exp_neg_K_theta\n";
  for (int K : Ks) {
    const auto a = qls::alpha_star(K, net.spectra, eps_step);
    std::cout << K << "," << qls::format_double(a.alpha) << "," << qls::format_double(a.eps)
              << "," << qls::format_double(a.h) << "," << qls::format_double(std::exp(-K * theta))
              << "\n";
  }
  return kOk;
}

int run_reproduce(const Globals& g, const std::string& id, std::size_t graphs_per_p,
                  std::size_t robust_seeds, const std::string& entries) {
  qls::ReproOptions o;
  o.seed = g.seed;
  o.max_rounds = g.max_rounds;
  o.strict_saturation = g.strict_saturation;
  o.ex3_graphs_per_p = graphs_per_p;
  o.robust_seeds = robust_seeds;
  o.entries = qls::parse_entry_distribution(entries);
  const auto ids = id == "all" ? qls::reproduction_ids() : std::vector<std::string>{id};
  bool ok = true;
  for (const auto& one : ids) {
    const auto rep = qls::reproduce(one, g.out, o);
    qls::write_report(std::cout, rep);
    for (const auto& f : rep.files) std::cout << "wrote " << f.string() << "\n";
    ok = ok && rep.passed();
  }
  return ok ? kOk : kCheckFailed;
}

int run_sweep(const Globals& g, const std::vector<std::string>& families, std::size_t n,
              std::size_t m, double p, const std::vector<int>& Ks, const std::string& file) {
  qls::SweepSpec spec;
  spec.families.clear();
  for (const auto& f : families) spec.families.push_back(qls::parse_graph_kind(f));
  spec.n = n;
  spec.m = m;
  spec.p = p;
  spec.Ks = Ks;
  spec.seed = g.seed;
  const auto rows = qls::sweep(spec);
  const auto path = std::filesystem::path(g.out) / file;
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw qls::Error("cannot write '" + path.string() + "'");
  qls::write_sweep_csv(out, rows);
  qls::write_sweep_csv(std::cout, rows);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed linear-equation solving over quantized links"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master seed")->each([&](const std::string&) {
    g.seed_set = true;
  });
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--strict-saturation", g.strict_saturation, "Abort on the first saturation");
  app.add_option("--max-rounds", g.max_rounds, "Override the round budget");

  auto* plan = app.add_subcommand("plan", "Choose parameters for a level budget K");
  std::string plan_case;
  int plan_K = 1;
  double plan_eps = 0.5, plan_delta = 0.85, plan_pick = 0.5;
  std::string plan_problem = "ex1", plan_graph = "fig1", plan_csv;
  plan->add_option("case", plan_case, "exact or ls")
      ->required()
      ->check(CLI::IsMember({"exact", "ls"}));
  plan->add_option("--K", plan_K, "Quantizer levels")->check(CLI::PositiveNumber);
  plan->add_option("--eps", plan_eps, "Epsilon in (0,1)")->check(CLI::Range(0.0, 1.0));
  plan->add_option("--delta", plan_delta, "Step-size exponent (ls)");
  plan->add_option("--pick", plan_pick, "Position inside the feasible interval");
  plan->add_option("--problem", plan_problem, "ex1, ex4 or a problem file");
  plan->add_option("--graph", plan_graph, "fig1 or a graph file");
  plan->add_option("--csv", plan_csv, "Also write the plan row to this file under --out");

  auto* solve = app.add_subcommand("solve", "Run a configuration file");
  std::string config_path;
  solve->add_option("config", config_path, "Configuration file")->required();

  auto* oracle = app.add_subcommand("oracle-check", "Compare the solver with the matrix recursions");
  std::string oracle_mode = "exact";
  std::size_t oracle_rounds = 300;
  oracle->add_option("--mode", oracle_mode)->check(CLI::IsMember({"exact", "ls"}));
  oracle->add_option("--rounds", oracle_rounds);

  auto* astar = app.add_subcommand("alpha-star", "Best decay rate for given K");
  std::vector<int> astar_K = {1, 10, 100, 1000};
  std::string astar_problem = "ex1", astar_graph = "fig1";
  double astar_step = 1e-3;
  astar->add_option("--K", astar_K, "Level budgets")->delimiter(',');
  astar->add_option("--problem", astar_problem, "ex1, ex4 or a problem file");
  astar->add_option("--graph", astar_graph, "fig1 or a graph file");
  astar->add_option("--eps-step", astar_step);

  auto* repro = app.add_subcommand("reproduce", "Re-run a published example");
  std::string repro_id;
  std::size_t graphs_per_p = 100, robust_seeds = 10;
  std::string entries = "normal";
  std::vector<std::string> id_choices = qls::reproduction_ids();
  id_choices.push_back("all");
  repro->add_option("id", repro_id, "Example id")->required()->check(CLI::IsMember(id_choices));
  repro->add_option("--graphs-per-p", graphs_per_p, "Topology study sample size");
  repro->add_option("--robust-seeds", robust_seeds, "Damping study seeds");
  repro->add_option("--entries", entries, "Random H entries: normal or uniform01")
      ->check(CLI::IsMember({"normal", "uniform01"}));

  auto* sweep = app.add_subcommand("sweep", "Theta_N and alpha* over graph families and K");
  std::vector<std::string> families = {"cycle", "complete", "star"};
  std::size_t sweep_n = 20, sweep_m = 3;
  double sweep_p = 0.5;
  std::vector<int> sweep_K = {1, 10, 100, 1000};
  std::string sweep_file = "sweep.csv";
  sweep->add_option("--families", families)->delimiter(',');
  sweep->add_option("--n", sweep_n);
  sweep->add_option("--m", sweep_m);
  sweep->add_option("--p", sweep_p);
  sweep->add_option("--K", sweep_K)->delimiter(',');
  sweep->add_option("--file", sweep_file);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*plan)
      return run_plan(g, plan_case, plan_K, plan_eps, plan_delta, plan_pick, plan_problem,
                      plan_graph, plan_csv);
    if (*solve) return run_solve(g, config_path);
    if (*oracle) return run_oracle_check(g, oracle_mode, oracle_rounds);
    if (*astar) return run_alpha_star(astar_K, astar_problem, astar_graph, astar_step);
    if (*repro) return run_reproduce(g, repro_id, graphs_per_p, robust_seeds, entries);
    if (*sweep) return run_sweep(g, families, sweep_n, sweep_m, sweep_p, sweep_K, sweep_file);
  } catch (const qls::SaturationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
