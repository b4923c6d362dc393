#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qlinsolve/error.hpp"
#include "qlinsolve/problem.hpp"
#include "qlinsolve/schedule.hpp"

namespace qls {

struct LevelRequirement {
  long long raw = 0;      // ⌈M - 1/2⌉, may be 0
  long long clamped = 1;  // max(raw, 1)
};

// Ceiling with a relative guard band so M - 1/2 landing on an integer up to
// round-off does not bump the result.
inline LevelRequirement level_from_m(double M) {
  const double x = M - 0.5;
  const double nearest = std::round(x);
  const double raw = std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x)) ? nearest
                                                                                 : std::ceil(x);
  LevelRequirement out;
  out.raw = static_cast<long long>(raw);
  out.clamped = std::max<long long>(out.raw, 1);
  return out;
}

// ---- exact case ----

inline double m_value(double alpha, double h, const NetworkSpectra& s) {
  const double rho = s.rho_h(h);
  if (!(alpha > rho)) throw Error("M(alpha, h) needs alpha > rho_h = 1 - h*fd_min");
  const double first = (1.0 + 2.0 * h * static_cast<double>(s.dstar)) / (2.0 * alpha);
  const double second = s.lambdaN == 0.0 ? 0.0
                                         : h * h * s.sqrt_mn() * s.lambdaN * s.fd_max /
                                               (2.0 * alpha * (alpha - rho));
  return first + second;
}

struct S0Bound {
  double level_branch = 0.0;  // (C_x + h||H_d||_inf C_w)/(K + 1/2)
  double rate_branch = 0.0;   // 2(α-ρ_h)(ρ_h C_w + h C_x λ_N)/(h λ_N)
  double value() const { return std::max(level_branch, rate_branch); }
};

inline S0Bound s0_lower_bound(double alpha, double h, double cx, double cw, int K,
                              const NetworkSpectra& s) {
  const double rho = s.rho_h(h);
  if (!(alpha > rho)) throw Error("s(0) bound needs alpha > rho_h");
  if (!(s.lambdaN > 0.0)) throw Error("s(0) bound undefined for an isolated network (lambda_N = 0)");
  S0Bound b;
  b.level_branch = (cx + h * s.hd_inf_norm * cw) / (K + 0.5);
  b.rate_branch = 2.0 * (alpha - rho) * (rho * cw + h * cx * s.lambdaN) / (h * s.lambdaN);
  return b;
}

inline double h_upper_exact(const NetworkSpectra& s) { return 2.0 / (s.fd_min + s.fd_max); }

inline bool xi_membership(double alpha, double h, int K, const NetworkSpectra& s) {
  if (!(h > 0.0 && h < h_upper_exact(s))) return false;
  if (!(alpha > s.rho_h(h) && alpha < 1.0)) return false;
  return m_value(alpha, h, s) < K + 0.5;
}

inline double h_hat_exact(int K, double eps, const NetworkSpectra& s) {
  const double fmin = s.fd_min;
  const double kd = static_cast<double>(K);
  return 2.0 * kd * eps * fmin /
         (s.sqrt_mn() * s.lambdaN * s.fd_max + 2.0 * eps * fmin * static_cast<double>(s.dstar) +
          eps * (1.0 - eps) * (2.0 * kd + 1.0) * fmin * fmin);
}

struct ExactPlan {
  int K = 1;
  double eps = 0.0;
  double pick_fraction = 0.0;
  double h_hat = 0.0;
  double h_star = 0.0;
  double h = 0.0;
  double alpha = 0.0;
  double rho_h = 0.0;
  double M = 0.0;
  LevelRequirement Kmin;
  std::optional<S0Bound> s0_min;
  bool member = false;
};

inline void require_plan_args(int K, double eps, double pick_fraction) {
  if (K < 1) throw Error("planner needs K >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw Error("planner.eps must lie in (0, 1)");
  if (!(pick_fraction > 0.0 && pick_fraction < 1.0))
    throw Error("planner.pick_fraction must lie in (0, 1)");
}

inline ExactPlan plan_exact(int K, double eps, const NetworkSpectra& s, double pick_fraction = 0.5,
                            std::optional<std::pair<double, double>> cx_cw = std::nullopt) {
  require_plan_args(K, eps, pick_fraction);
  ExactPlan p;
  p.K = K;
  p.eps = eps;
  p.pick_fraction = pick_fraction;
  p.h_hat = h_hat_exact(K, eps, s);
  p.h_star = std::min(h_upper_exact(s), p.h_hat);
  p.h = pick_fraction * p.h_star;
  p.alpha = 1.0 - (1.0 - eps) * p.h * s.fd_min;
  p.rho_h = s.rho_h(p.h);
  p.M = m_value(p.alpha, p.h, s);
  p.Kmin = level_from_m(p.M);
  if (cx_cw) p.s0_min = s0_lower_bound(p.alpha, p.h, cx_cw->first, cx_cw->second, K, s);
  p.member = xi_membership(p.alpha, p.h, K, s);
  if (!p.member) throw Error("internal error: planned (alpha, h) is outside Xi_K");
  return p;
}

struct AlphaStar {
  double alpha = 1.0;
  double eps = 0.0;
  double h = 0.0;
  double eps_step = 0.0;
  std::size_t feasible_points = 0;
};

// Minimum of α = 1 - (1-ε) h fd_min over ε on a uniform grid and h at the
// given fractions of h*_{K,ε}.
inline AlphaStar alpha_star(int K, const NetworkSpectra& s, double eps_step = 1e-3,
                            const std::vector<double>& h_fractions = {0.999}) {
  if (K < 1) throw Error("alpha_star needs K >= 1");
  if (!(eps_step > 0.0 && eps_step < 1.0)) throw Error("eps grid spacing must lie in (0, 1)");
  AlphaStar best;
  best.eps_step = eps_step;
  const auto steps = static_cast<std::size_t>(std::floor(1.0 / eps_step));
  for (std::size_t i = 1; i <= steps; ++i) {
    const double eps = static_cast<double>(i) * eps_step;
    if (!(eps < 1.0)) break;
    const double h_star = std::min(h_upper_exact(s), h_hat_exact(K, eps, s));
    for (double f : h_fractions) {
      const double h = f * h_star;
      const double alpha = 1.0 - (1.0 - eps) * h * s.fd_min;
      if (!xi_membership(alpha, h, K, s)) continue;
      ++best.feasible_points;
      if (alpha < best.alpha) {
        best.alpha = alpha;
        best.eps = eps;
        best.h = h;
      }
    }
  }
  if (best.feasible_points == 0) throw Error("alpha_star: no feasible grid point");
  return best;
}

// ---- least-squares case ----

struct MPrime {
  double M1 = 0.0;
  double M2 = 0.0;
  double Mprime = 0.0;
  LevelRequirement Kmin;
};

inline double rho_hat(double h, const NetworkSpectra& s) { return 1.0 - h * s.lambda2; }

// M' takes the halved leading term β(0)(1/2 + h d*), the form the
// saturation argument closes with and from which ĥ' follows.
inline MPrime m_prime(double h, double beta0, const NetworkSpectra& s, double cx = 0.0) {
  const double gap = 1.0 / beta0 - rho_hat(h, s);
  if (!(gap > 0.0)) throw Error("M' needs 1/beta(0) > rho_hat = 1 - h*lambda_2");
  const double sq = s.sqrt_mn();
  const double ln = s.lambdaN;
  const double hd_mix = s.hd_inf_norm + h * ln * s.hd_2_norm / gap;
  MPrime out;
  out.M1 = (sq * cx * (1.0 + h * ln) + 2.0 * s.zh_2_norm / s.fd_min) * hd_mix + s.zh_inf_norm +
           ln * (sq * cx * (1.0 + h * beta0 * ln) + h * s.zh_2_norm / gap);
  out.M2 = beta0 * sq * ln * (h * ln / (2.0 * gap) + hd_mix / s.fd_min);
  out.Mprime = beta0 * (0.5 + h * static_cast<double>(s.dstar)) + 2.0 * h * out.M2;
  out.Kmin = level_from_m(out.Mprime);
  return out;
}

struct SrBound {
  double level_branch = 0.0;  // (C_x + h(C_x||H_d||_inf + ||z_H||_inf))/(K + 1/2)
  double ratio_branch = 0.0;  // M1/M2
  double value() const { return std::max(level_branch, ratio_branch); }
};

inline SrBound sr_lower_bound(double h, int K, double cx, const NetworkSpectra& s, double M1,
                              double M2) {
  if (!(M2 > 0.0)) throw Error("s_r bound needs M2 > 0");
  return {(cx + h * (cx * s.hd_inf_norm + s.zh_inf_norm)) / (K + 0.5), M1 / M2};
}

inline double h_upper_ls(const NetworkSpectra& s) {
  return std::min(2.0 / (s.lambda2 + s.lambdaN), 1.0 / s.fd_min);
}

inline bool xi_prime_membership(double h, double beta0, int K, const NetworkSpectra& s) {
  if (!(h > 0.0 && h < h_upper_ls(s))) return false;
  if (!(beta0 > 1.0 && beta0 < 1.0 / (1.0 - h * s.lambda2))) return false;
  return m_prime(h, beta0, s).Mprime <= K + 0.5;
}

inline double h_hat_ls(int K, double eps, const NetworkSpectra& s) {
  const double fmin = s.fd_min;
  const double kd = static_cast<double>(K);
  const double denom =
      2.0 * static_cast<double>(s.dstar) * eps * fmin +
      (2.0 * kd + 1.0) * eps * (1.0 - eps) * fmin * s.lambda2 +
      2.0 * s.sqrt_mn() * s.lambdaN *
          (2.0 * eps * s.hd_inf_norm + s.kappa() * (2.0 * s.hd_2_norm + fmin));
  return 2.0 * kd * eps * fmin / denom;
}

struct LSPlan {
  int K = 1;
  double eps = 0.0;
  double delta = 1.0;
  double pick_fraction = 0.0;
  double h_hat = 0.0;
  double h_star = 0.0;
  double h = 0.0;
  double beta0 = 1.0;
  double rho_hat = 0.0;
  double kappaN = 0.0;
  MPrime m;
  SrBound sr_min;
  GammaSchedule gamma{1.0, 1.0};
  bool member = false;
};

inline LSPlan plan_ls(int K, double eps, const NetworkSpectra& s, double delta,
                      double pick_fraction = 0.5, double cx = 0.0) {
  require_plan_args(K, eps, pick_fraction);
  if (!(delta > 0.5 && delta <= 1.0)) throw Error("gamma.delta must lie in (1/2, 1]");
  LSPlan p;
  p.K = K;
  p.eps = eps;
  p.delta = delta;
  p.pick_fraction = pick_fraction;
  p.h_hat = h_hat_ls(K, eps, s);
  p.h_star = std::min(h_upper_ls(s), p.h_hat);
  p.h = pick_fraction * p.h_star;
  p.beta0 = 1.0 / (1.0 - (1.0 - eps) * p.h * s.lambda2);
  p.rho_hat = rho_hat(p.h, s);
  p.kappaN = s.kappa();
  p.m = m_prime(p.h, p.beta0, s, cx);
  p.sr_min = sr_lower_bound(p.h, K, cx, s, p.m.M1, p.m.M2);
  p.gamma = GammaSchedule::from_beta0(p.beta0, delta);
  p.member = xi_prime_membership(p.h, p.beta0, K, s);
  if (!p.member) throw Error("internal error: planned (h, beta(0)) is outside Xi'_K");
  return p;
}

}  // namespace qls
