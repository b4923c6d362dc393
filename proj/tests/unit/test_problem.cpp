#include <gtest/gtest.h>

#include <sstream>

#include "qlinsolve/experiments.hpp"
#include "support/jacobi.hpp"

using namespace qls;

TEST(Problem, ValidatesShape) {
  EXPECT_THROW(LinearProblem(Matrix(3, 2), Vector(2)), Error);
  EXPECT_THROW(LinearProblem(Matrix(0, 2), Vector(0)), Error);
  Matrix h = Matrix::Ones(2, 1);
  h(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(LinearProblem(h, Vector::Zero(2)), Error);
}

TEST(Problem, Example1IsExactWithSolution13) {
  const auto c = classify(reference::example1_problem());
  ASSERT_EQ(c.kind, SolutionKind::unique_exact);
  EXPECT_NEAR(c.solution(0), 1.0, 1e-12);
  EXPECT_NEAR(c.solution(1), 3.0, 1e-12);
  EXPECT_LT(c.residual_norm, c.exact_tol);
}

TEST(Problem, Example4IsLeastSquares) {
  const auto p = reference::example4_problem();
  const auto c = classify(p);
  ASSERT_EQ(c.kind, SolutionKind::unique_least_squares);
  // Normal equations hold at the reported solution.
  const Vector g = p.H.transpose() * (p.H * c.solution - p.z);
  EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(c.residual_norm, c.exact_tol);
}

TEST(Problem, RankDeficientUnsupported) {
  Matrix H(3, 2);
  H << 1, 2, 2, 4, -1, -2;
  const auto c = classify(LinearProblem(H, Vector::Ones(3)));
  EXPECT_EQ(c.kind, SolutionKind::unsupported);
  EXPECT_EQ(c.solution.size(), 0);
}

TEST(Problem, ToleranceOverride) {
  const auto p = reference::example4_problem();
  EXPECT_EQ(classify(p, 10.0).kind, SolutionKind::unique_exact);
}

TEST(Problem, StackedOperatorsExample1) {
  const auto p = reference::example1_problem();
  const auto lap = build_laplacian(reference::fig1_graph());
  const auto ops = build_stacked(p, lap);
  ASSERT_EQ(ops.Fd.rows(), 10);
  EXPECT_EQ(ops.Fd, ops.Fd.transpose());
  const auto ref = testsupport::jacobi_eigenvalues(
      std::vector<double>(ops.Fd.data(), ops.Fd.data() + ops.Fd.size()), 10);
  EXPECT_NEAR(ops.fd_min, ref.front(), 1e-12);
  EXPECT_NEAR(ops.fd_max, ref.back(), 1e-12);
  EXPECT_GT(ops.fd_min, 0.0);
  // Hd blocks are rank-one outer products.
  EXPECT_DOUBLE_EQ(ops.Hd(0, 1), 0.5 * -0.1);
  EXPECT_DOUBLE_EQ(ops.Hd(2, 3), -0.4 * 0.2);
  EXPECT_EQ(ops.Hd(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(ops.zH(4), -1.8 * 0.3);
  // Fd (1 ⊗ y*) = zH for an exact solution.
  const Vector y = Eigen::Vector2d(1, 3);
  EXPECT_LT((ops.Fd * stack_copies(y, 5) - ops.zH).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Problem, NodeCountMismatch) {
  const auto lap = build_laplacian(generate_graph(GraphKind::cycle, 4, 0.0, 1).graph);
  EXPECT_THROW(build_stacked(reference::example1_problem(), lap), Error);
}

TEST(Problem, ThetaFormula) {
  const Network net(reference::example1_problem(), reference::fig1_graph());
  const double t = theta_n(net.ops, net.lap, 2, 5);
  const double want = net.ops.fd_min * net.ops.fd_min /
                      (2.0 * std::sqrt(10.0) * net.lap.lambdaN * net.ops.fd_max);
  EXPECT_DOUBLE_EQ(t, want);
  EXPECT_GT(t, 0.0);
  EXPECT_LT(t, 1.0);
}

TEST(Problem, ThetaExample2Range) {
  // Published constant is for an unpublished H; only the sign and scale
  // class are asserted here.
  const auto rp = random_problem(100, 5, SolutionKind::unique_exact, 1);
  const auto lap = build_laplacian(generate_graph(GraphKind::cycle, 100, 0.0, 1).graph);
  const double t = theta_n(build_stacked(rp.problem, lap), lap, 5, 100);
  EXPECT_GT(t, 0.0);
  EXPECT_LT(t, 1e-5);
}

TEST(Problem, FileRoundTrip) {
  const auto p = reference::example4_problem();
  std::stringstream ss;
  write_problem(ss, p);
  const auto back = read_problem(ss);
  EXPECT_EQ(back.H, p.H);
  EXPECT_EQ(back.z, p.z);
}

TEST(Problem, FileErrors) {
  std::istringstream short_row("2 2\n1 2 3\n4 5\n");
  try {
    read_problem(short_row);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  std::istringstream missing("3 1\n1 2\n");
  EXPECT_THROW(read_problem(missing), Error);
  std::istringstream nan_tok("1 1\n1 zz\n");
  EXPECT_THROW(read_problem(nan_tok), Error);
}

TEST(Problem, SpectraConstants) {
  const Network net(reference::example1_problem(), reference::fig1_graph());
  const auto& s = net.spectra;
  EXPECT_DOUBLE_EQ(s.sqrt_mn(), std::sqrt(10.0));
  EXPECT_DOUBLE_EQ(s.rho_h(0.1), 1.0 - 0.1 * s.fd_min);
  EXPECT_DOUBLE_EQ(s.kappa(), s.lambdaN / s.lambda2);
  EXPECT_DOUBLE_EQ(s.hd_2_norm, 0.3 * 0.3 + 0.7 * 0.7);
}
