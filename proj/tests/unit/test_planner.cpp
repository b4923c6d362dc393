#include <gtest/gtest.h>

#include "qlinsolve/experiments.hpp"
#include "support/jacobi.hpp"

using namespace qls;
using reference::get;

namespace {

const Network& ex1() {
  static const Network net(reference::example1_problem(), reference::fig1_graph());
  return net;
}

const Network& ex4() {
  static const Network net(reference::example4_problem(), reference::fig1_graph());
  return net;
}

struct JacobiSpectra {
  double fmin, fmax, l2, lN;
};

// Spectral constants recomputed from scratch with the Jacobi reference.
JacobiSpectra jacobi_spectra(const Network& net) {
  const auto& Fd = net.ops.Fd;
  const auto& L = net.lap.L;
  const auto f = testsupport::jacobi_eigenvalues(std::vector<double>(Fd.data(), Fd.data() + Fd.size()),
                                                 static_cast<int>(Fd.rows()));
  const auto l = testsupport::jacobi_eigenvalues(std::vector<double>(L.data(), L.data() + L.size()),
                                                 static_cast<int>(L.rows()));
  return {f.front(), f.back(), l[1], l.back()};
}

}  // namespace

TEST(LevelFromM, CeilingWithGuardBand) {
  EXPECT_EQ(level_from_m(225.3).clamped, 225);
  EXPECT_EQ(level_from_m(225.5).clamped, 225);
  EXPECT_EQ(level_from_m(225.5 + 1e-12).clamped, 225);
  EXPECT_EQ(level_from_m(225.51).clamped, 226);
  EXPECT_EQ(level_from_m(0.5).raw, 0);
  EXPECT_EQ(level_from_m(0.5).clamped, 1);
}

TEST(MValue, Example1Gives225) {
  const auto& s = ex1().spectra;
  const double M = m_value(0.98, 0.4215, s);
  EXPECT_EQ(level_from_m(M).clamped, 225);
}

TEST(MValue, IndependentEvaluation) {
  const auto& net = ex1();
  const auto j = jacobi_spectra(net);
  for (double h : {0.01, 0.1, 0.4215}) {
    const double rho = 1.0 - h * j.fmin;
    for (double alpha : {rho + 0.01, 0.99, 0.999}) {
      if (!(alpha > rho && alpha < 1.0)) continue;
      const double want = (1.0 + 2.0 * h * 3.0) / (2.0 * alpha) +
                          h * h * std::sqrt(10.0) * j.lN * j.fmax / (2.0 * alpha * (alpha - rho));
      EXPECT_NEAR(m_value(alpha, h, net.spectra), want, 1e-10 * want);
    }
  }
}

TEST(MValue, SmallStepLimit) {
  const auto& s = ex1().spectra;
  // Leading term (1 + 2hd*)/(2alpha) is a lower bound; alpha below rho_h is rejected.
  const double a = 1.0 - 0.5e-3 * s.fd_min;
  EXPECT_GT(m_value(a, 1e-3, s), (1.0 + 2e-3 * static_cast<double>(s.dstar)) / (2.0 * a));
  EXPECT_THROW(m_value(0.9, 1e-9, s), Error);
  EXPECT_THROW(m_value(s.rho_h(0.1), 0.1, s), Error);
}

TEST(MValue, IsolatedNode) {
  Matrix H(1, 1);
  H << 2.0;
  const Network net(LinearProblem(H, Vector::Constant(1, 2.0)), Graph(1, {}));
  const double M = m_value(1.0, 0.1, net.spectra);
  EXPECT_DOUBLE_EQ(M, 0.5);
  EXPECT_EQ(level_from_m(M).raw, 0);
  EXPECT_EQ(level_from_m(M).clamped, 1);
}

TEST(S0Bound, Branches) {
  const auto& s = ex1().spectra;
  const double h = 0.4215, alpha = 0.98, rho = s.rho_h(h);
  EXPECT_EQ(s0_lower_bound(alpha, h, 0.0, 0.0, 225, s).value(), 0.0);
  const double cx = 0.7, cw = 3.2;
  const auto b = s0_lower_bound(alpha, h, cx, cw, 225, s);
  EXPECT_NEAR(b.level_branch, (cx + h * s.hd_inf_norm * cw) / 225.5, 1e-15);
  EXPECT_NEAR(b.rate_branch, 2 * (alpha - rho) * (rho * cw + h * cx * s.lambdaN) / (h * s.lambdaN),
              1e-14);
  const auto big = s0_lower_bound(alpha, h, cx, cw, 1 << 30, s);
  EXPECT_LT(big.level_branch, 1e-8);
  EXPECT_DOUBLE_EQ(big.value(), big.rate_branch);
}

TEST(XiMembership, PublishedLowRatePairs) {
  const auto& s = ex1().spectra;
  for (int i = 1; i <= 3; ++i)
    EXPECT_TRUE(xi_membership(get("ex1.thm2.alpha", i), get("ex1.thm2.h", i),
                              static_cast<int>(get("ex1.thm2.K", i)), s))
        << "pair " << i;
}

TEST(XiMembership, RejectsOutsideAndBoundary) {
  const auto& s = ex1().spectra;
  EXPECT_FALSE(xi_membership(s.rho_h(0.01), 0.01, 100, s));
  EXPECT_FALSE(xi_membership(1.0, 0.01, 100, s));
  EXPECT_FALSE(xi_membership(0.99, h_upper_exact(s), 100000, s));
  EXPECT_FALSE(xi_membership(0.99, 0.0, 100, s));
  // M exactly K + 1/2 is excluded: pick K with M(α,h) = K + 1/2 via level
  // arithmetic on a modified α/h is fragile, so test on the predicate directly.
  const double alpha = 0.98, h = 0.4215;
  const double M = m_value(alpha, h, s);
  const int K = static_cast<int>(std::ceil(M - 0.5));
  EXPECT_TRUE(xi_membership(alpha, h, K, s));
  EXPECT_FALSE(xi_membership(alpha, h, K - 1, s));
}

TEST(PlanExact, AlwaysMember) {
  const auto& s = ex1().spectra;
  for (int K : {1, 2, 3, 6, 12, 100, 10000})
    for (double eps : {0.05, 0.3, 0.5, 0.9})
      for (double pick : {0.1, 0.5, 0.99}) {
        const auto p = plan_exact(K, eps, s, pick);
        EXPECT_TRUE(p.member);
        EXPECT_TRUE(xi_membership(p.alpha, p.h, K, s));
        EXPECT_LE(p.Kmin.clamped, K);
      }
}

TEST(PlanExact, ArgumentErrors) {
  const auto& s = ex1().spectra;
  EXPECT_THROW(plan_exact(0, 0.5, s), Error);
  EXPECT_THROW(plan_exact(3, 1.0, s), Error);
  EXPECT_THROW(plan_exact(3, 0.5, s, 1.0), Error);
}

TEST(PlanExact, HHatIsTight) {
  // Just above ĥ the ε-parametrized α loses membership whenever ĥ < 2/(fmin+fmax).
  const auto& s = ex1().spectra;
  for (int K : {3, 6, 12}) {
    const double eps = 0.5;
    const double hh = h_hat_exact(K, eps, s);
    ASSERT_LT(hh, h_upper_exact(s));
    auto alpha_of = [&](double h) { return 1.0 - (1.0 - eps) * h * s.fd_min; };
    EXPECT_TRUE(xi_membership(alpha_of(hh * 0.999), hh * 0.999, K, s));
    EXPECT_FALSE(xi_membership(alpha_of(hh * 1.001), hh * 1.001, K, s));
  }
}

TEST(AlphaStar, MonotoneAndLowerBound) {
  const auto& net = ex1();
  const double theta = theta_n(net.ops, net.lap, 2, 5);
  double prev = 1.0;
  for (int K : {1, 2, 5, 10, 50, 100, 1000}) {
    const auto a = alpha_star(K, net.spectra);
    EXPECT_LE(a.alpha, prev);
    EXPECT_GT(a.alpha, 1.0 - K * theta);
    EXPECT_TRUE(xi_membership(a.alpha, a.h, K, net.spectra));
    prev = a.alpha;
  }
}

TEST(MPrime, Formulas) {
  const auto& s = ex4().spectra;
  const double h = 0.01, beta0 = 1.001;
  const auto a = m_prime(h, beta0, s, 0.0);
  const auto b = m_prime(h, beta0, s, 1.0);
  const auto c = m_prime(h, beta0, s, 2.0);
  EXPECT_LT(a.M1, b.M1);
  EXPECT_LT(b.M1, c.M1);
  EXPECT_DOUBLE_EQ(a.M2, c.M2);
  EXPECT_DOUBLE_EQ(a.Mprime, beta0 * (0.5 + h * 3.0) + 2.0 * h * a.M2);
  EXPECT_THROW(m_prime(h, (1.0 + 1e-12) / (1.0 - h * s.lambda2), s), Error);
}

TEST(MPrime, SmallStepLimit) {
  const auto& s = ex4().spectra;
  const double h = 1e-12;
  EXPECT_NEAR(m_prime(h, 1.0 + 1e-15, s).Mprime, 0.5, 1e-6);
}

TEST(SrBound, Branches) {
  const auto& s = ex4().spectra;
  const auto mp = m_prime(0.0853, GammaSchedule(26, 0.85).beta0(), s);
  const auto b = sr_lower_bound(0.0853, 900, 0.0, s, mp.M1, mp.M2);
  EXPECT_DOUBLE_EQ(b.ratio_branch, mp.M1 / mp.M2);
  EXPECT_NEAR(b.level_branch, 0.0853 * s.zh_inf_norm / 900.5, 1e-15);
  // No data at all: the level branch vanishes.
  Matrix H(2, 1);
  H << 1, 1;
  const Network zero(LinearProblem(H, Vector::Zero(2)), Graph(2, {{0, 1}}));
  EXPECT_EQ(sr_lower_bound(0.1, 5, 0.0, zero.spectra, 1.0, 1.0).level_branch, 0.0);
}

TEST(PlanLS, AlwaysMember) {
  const auto& s = ex4().spectra;
  for (int K : {1, 10, 30, 90, 900})
    for (double eps : {0.2, 0.5, 0.8})
      for (double delta : {0.55, 0.85, 1.0}) {
        const auto p = plan_ls(K, eps, s, delta);
        EXPECT_TRUE(p.member);
        EXPECT_TRUE(xi_prime_membership(p.h, p.gamma.beta0(), K, s));
        EXPECT_NEAR(p.gamma.beta0(), p.beta0, 1e-12);
      }
  EXPECT_THROW(plan_ls(10, 0.5, s, 0.5), Error);
}

TEST(PlanLS, K0RoundTrip) {
  for (double k0 : {9.0, 26.0, 36.0, 120.0}) {
    const double b0 = GammaSchedule::beta0_from_k0(k0, 0.85);
    EXPECT_NEAR(GammaSchedule::k0_from_beta0(b0, 0.85), k0, 1e-12 * k0 * 1e3);
  }
}

TEST(PlanLS, TableSchedulesBetaMonotone) {
  for (int i = 1; i <= 3; ++i) {
    const GammaSchedule g(get("ex4.table.k0", i), get("ex4.table.delta", i));
    for (std::size_t k = 0; k < 100000; ++k) ASSERT_LT(g.beta(k + 1), g.beta(k));
  }
}

// Published least-squares numbers. These are expected to hold as printed.
TEST(PaperExample4, LevelRequirementIs870) {
  const auto mp = m_prime(get("ex4.thm3.h"), GammaSchedule(26, 0.85).beta0(), ex4().spectra);
  EXPECT_NEAR(static_cast<double>(mp.Kmin.clamped), 870.0, 1.0) << "M' = " << mp.Mprime;
}

TEST(PaperExample4, SrSatisfiesBound) {
  const auto& s = ex4().spectra;
  const auto mp = m_prime(get("ex4.thm3.h"), GammaSchedule(26, 0.85).beta0(), s);
  EXPECT_LE(sr_lower_bound(get("ex4.thm3.h"), 900, 0.0, s, mp.M1, mp.M2).value(), 0.82);
}

TEST(PaperExample4, TableRowsInXiPrime) {
  const auto& s = ex4().spectra;
  for (int i = 1; i <= 3; ++i) {
    const GammaSchedule g(get("ex4.table.k0", i), get("ex4.table.delta", i));
    EXPECT_TRUE(xi_prime_membership(get("ex4.table.h", i), g.beta0(),
                                    static_cast<int>(get("ex4.table.K", i)), s))
        << "row " << i << ": beta(0) = " << g.beta0()
        << ", limit = " << 1.0 / (1.0 - get("ex4.table.h", i) * s.lambda2);
  }
}
