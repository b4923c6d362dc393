#include <gtest/gtest.h>

#include "qlinsolve/experiments.hpp"

using namespace qls;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

const std::string kMinimal =
    "problem.source = file\nproblem.file = ex1_problem.txt\n"
    "graph.source = file\ngraph.file = fig1_graph.txt\n"
    "solver.h = 0.4215\nsolver.alpha = 0.98\nsolver.s0 = 1\nsolver.K = 300\n";

}  // namespace

TEST(Config, MinimalExactValid) {
  const auto c = parse_config_string(kMinimal, QLS_CONFIG_DIR);
  EXPECT_EQ(c.mode, "exact");
  EXPECT_EQ(c.solver_K, 300);
  EXPECT_DOUBLE_EQ(c.solver_alpha, 0.98);
  const auto p = problem_from_config(c);
  EXPECT_EQ(p.n_nodes(), 5u);
  EXPECT_EQ(graph_from_config(c).edges().size(), 5u);
}

TEST(Config, LoadFromFileResolvesRelativePaths) {
  const auto c = load_config(std::string(QLS_CONFIG_DIR) + "/ex1_exact.cfg");
  EXPECT_EQ(c.resolve(c.problem_file), std::filesystem::path(QLS_CONFIG_DIR) / "ex1_problem.txt");
  EXPECT_NO_THROW(problem_from_config(c));
  EXPECT_THROW(load_config("/nonexistent/x.cfg"), Error);
}

TEST(Config, AllSampleConfigsValid) {
  for (const auto& entry : std::filesystem::directory_iterator(QLS_CONFIG_DIR))
    if (entry.path().extension() == ".cfg") EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
}

TEST(Config, DeltaOutOfRangeNamesField) {
  const auto err = error_of("mode = ls\nsolver.h = 0.1\nsolver.K = 5\ngamma.delta = 1.5\n");
  EXPECT_NE(err.find("gamma.delta"), std::string::npos) << err;
}

TEST(Config, UnknownKeyRejected) {
  const auto err = error_of("solver.h = 0.1\nsolver.alpha = 0.9\nsolver.K = 2\nsolver.hh = 1\n");
  EXPECT_NE(err.find("unknown key 'solver.hh'"), std::string::npos) << err;
  EXPECT_NE(err.find("line 4"), std::string::npos) << err;
}

TEST(Config, ParseErrorsCarryLineNumber) {
  EXPECT_NE(error_of("# c\n\nsolver.h 0.1\n").find("config line 3"), std::string::npos);
  EXPECT_NE(error_of("solver.h = abc\n").find("config line 1"), std::string::npos);
  EXPECT_NE(error_of("solver.K = 1.5\n").find("solver.K"), std::string::npos);
  EXPECT_NE(error_of("solver.h = 1\nsolver.h = 2\n").find("already set on line 1"),
            std::string::npos);
  EXPECT_NE(error_of("noise.roundoff = maybe\n").find("not a boolean"), std::string::npos);
}

TEST(Config, SemanticErrors) {
  EXPECT_NE(error_of("mode = fast\n").find("mode"), std::string::npos);
  EXPECT_NE(error_of("solver.alpha = 0.9\nsolver.K = 3\n").find("solver.h"), std::string::npos);
  EXPECT_NE(error_of("solver.h = 0.1\nsolver.alpha = 1.5\nsolver.K = 3\n").find("solver.alpha"),
            std::string::npos);
  EXPECT_NE(error_of("solver.h = 0.1\nsolver.alpha = 0.9\nsolver.K = 0\n").find("solver.K"),
            std::string::npos);
  EXPECT_NE(error_of("solver.params = planned\nplanner.eps = 1.0\n").find("planner.eps"),
            std::string::npos);
  EXPECT_NE(error_of("solver.h = 0.1\nsolver.alpha = 0.9\nsolver.K = 3\nnoise.damping = 0\n")
                .find("noise.damping"),
            std::string::npos);
  EXPECT_NE(error_of("problem.source = random\nproblem.n = 2\nproblem.m = 2\nsolver.h = 1\n"
                     "solver.alpha = 0.9\nsolver.K = 1\n")
                .find("problem.n"),
            std::string::npos);
}

TEST(Config, SerializeIsCanonical) {
  const auto c = parse_config_string(kMinimal);
  const auto text = serialize_config(c);
  const auto back = parse_config_string(text);
  EXPECT_EQ(serialize_config(back), text);
  EXPECT_TRUE(same_config(c, back));
  // Sorted keys, one per line.
  std::istringstream in(text);
  std::string line, prev;
  while (std::getline(in, line)) {
    const auto key = line.substr(0, line.find(" = "));
    EXPECT_LT(prev, key);
    prev = key;
  }
}

TEST(Config, RoundTripOverGeneratedConfigs) {
  Rng rng(2024);
  const std::vector<std::string> modes = {"exact", "ls", "robust", "baseline"};
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    ExperimentConfig c;
    c.mode = modes[rng.next_u64() % modes.size()];
    c.seed = rng.next_u64();
    c.max_rounds = 1 + rng.next_u64() % 100000;
    c.solver_h = rng.uniform(1e-6, 1.0);
    c.solver_alpha = rng.uniform(0.5, 1.0);
    c.solver_s0 = std::exp(rng.uniform(-10, 10));
    c.solver_sr = rng.uniform(0.01, 5.0);
    c.solver_K = 1 + static_cast<std::int64_t>(rng.next_u64() % 5000);
    c.gamma_k0 = rng.uniform(0.1, 500);
    c.gamma_delta = rng.uniform(0.51, 1.0);
    c.noise_damping = rng.uniform(0.5, 1.0);
    c.noise_roundoff = rng.uniform01() < 0.5;
    c.noise_roundoff_amp = rng.uniform(0, 1e-3);
    c.noise_init_errors = rng.uniform01() < 0.5;
    c.noise_init_hi = rng.uniform(0, 1);
    c.problem_source = "random";
    c.problem_n = 3 + rng.next_u64() % 20;
    c.problem_m = 1 + rng.next_u64() % 2;
    c.problem_kind = rng.uniform01() < 0.5 ? "exact" : "ls";
    c.graph_source = "generate";
    c.graph_kind = rng.uniform01() < 0.5 ? "cycle" : "erdos_renyi";
    c.graph_n = c.problem_n;
    c.graph_p = rng.uniform(0.05, 1.0);
    c.output_trace = "t" + std::to_string(trial) + ".csv";
    if (c.mode == "baseline" && rng.uniform01() < 0.5) c.solver_K = 0;
    try {
      validate(c);
    } catch (const Error&) {
      continue;
    }
    const auto text = serialize_config(c);
    const auto back = parse_config_string(text);
    ASSERT_EQ(serialize_config(back), text);
    ASSERT_EQ(back.solver_s0, c.solver_s0);
    ASSERT_EQ(back.seed, c.seed);
    ++checked;
  }
  EXPECT_GT(checked, 200);
}
