#pragma once

#include "qlinsolve/codec.hpp"
#include "qlinsolve/graph.hpp"
#include "qlinsolve/linalg.hpp"
#include "qlinsolve/problem.hpp"

// Whole-network matrix recursions, written independently of the per-node
// simulation so the two can be run side by side.
namespace qls::oracle {

struct Operators {
  Matrix Lm;  // L ⊗ I_m
  Matrix Hd;
  Matrix Fd;
  Matrix Dm;  // (I_N - 11^T/N) ⊗ I_m
  Vector zH;
  Index m = 0;
  Index n = 0;
};

inline Operators make_operators(const LinearProblem& p, const LaplacianSummary& lap) {
  Operators o;
  o.n = static_cast<Index>(p.n_nodes());
  o.m = static_cast<Index>(p.dim());
  const Index mn = o.n * o.m;
  o.Hd = Matrix::Zero(mn, mn);
  o.zH = Vector::Zero(mn);
  for (Index i = 0; i < o.n; ++i)
    for (Index a = 0; a < o.m; ++a) {
      o.zH(i * o.m + a) = p.z(i) * p.H(i, a);
      for (Index b = 0; b < o.m; ++b) o.Hd(i * o.m + a, i * o.m + b) = p.H(i, a) * p.H(i, b);
    }
  o.Lm = kron_identity(lap.L, o.m);
  o.Fd = o.Lm + o.Hd;
  const Matrix D = Matrix::Identity(o.n, o.n) -
                   Matrix::Constant(o.n, o.n, 1.0 / static_cast<double>(o.n));
  o.Dm = kron_identity(D, o.m);
  return o;
}

inline Vector quantize_all(const Vector& v, int K) {
  Vector out(v.size());
  for (Index a = 0; a < v.size(); ++a) out(a) = quantize(v(a), K);
  return out;
}

// ---- exact case ----

struct CompactExactState {
  Vector omega;  // (x - 1⊗y*)/s(k)
  Vector eps;    // (x - b)/s(k)
  Vector theta;  // quantizer input of the step that produced this state
  std::size_t k = 0;
};

inline CompactExactState compact_exact_init(const Vector& x0, const Vector& ystack, double s0) {
  return {(x0 - ystack) / s0, x0 / s0, Vector::Zero(x0.size()), 0};
}

inline CompactExactState compact_exact_step(const CompactExactState& st, double alpha, double h,
                                            int K, const Operators& o) {
  const Index mn = st.omega.size();
  const Matrix I = Matrix::Identity(mn, mn);
  const Vector theta = (I + h * o.Lm) * st.eps - h * o.Fd * st.omega;
  CompactExactState next;
  next.omega = ((I - h * o.Fd) * st.omega + h * o.Lm * st.eps) / alpha;
  next.eps = (theta - quantize_all(theta, K)) / alpha;
  next.theta = theta;
  next.k = st.k + 1;
  return next;
}

inline Vector reconstruct_exact(const CompactExactState& st, double s_k, const Vector& ystack) {
  return s_k * st.omega + ystack;
}

// ---- least-squares case ----

struct CompactLSState {
  Vector x;
  Vector eta;         // propagated (D⊗I) x / γ(k)
  Vector eta_direct;  // (D⊗I) x(k) / γ(k) evaluated from x
  Vector eps;         // (x - b)/s(k)
  Vector theta;
  std::size_t k = 0;
};

inline CompactLSState compact_ls_init(const Vector& x0, double sr, const Operators& o) {
  CompactLSState st;
  st.x = x0;
  st.eta = o.Dm * x0;
  st.eta_direct = st.eta;
  st.eps = x0 / sr;
  st.theta = Vector::Zero(x0.size());
  return st;
}

// gamma_k = γ(k), gamma_next = γ(k+1), beta_k = γ(k)/γ(k+1).
inline CompactLSState compact_ls_step(const CompactLSState& st, double h, double sr,
                                      double gamma_k, double gamma_next, double beta_k, int K,
                                      const Operators& o) {
  const Index mn = st.x.size();
  const Matrix I = Matrix::Identity(mn, mn);
  const Matrix P = I - h * (o.Lm + gamma_k * o.Hd);
  const Vector theta =
      (I + h * o.Lm) * st.eps - (h / sr) * (o.Lm * st.eta + o.Hd * st.x - o.zH);
  CompactLSState next;
  next.x = P * st.x + h * gamma_k * (sr * o.Lm * st.eps + o.zH);
  next.eta = beta_k * ((I - h * o.Lm) * st.eta + h * sr * o.Lm * st.eps +
                       h * o.Dm * (o.zH - o.Hd * st.x));
  next.eta_direct = o.Dm * next.x / gamma_next;
  next.eps = beta_k * (theta - quantize_all(theta, K));
  next.theta = theta;
  next.k = st.k + 1;
  return next;
}

// Sum over nodes of the m-blocks: (1^T ⊗ I_m) v.
inline Vector block_sum(const Vector& v, Index m) {
  Vector out = Vector::Zero(m);
  for (Index i = 0; i < v.size() / m; ++i) out += v.segment(i * m, m);
  return out;
}

// ---- exact communication ----

inline Vector unquantized_step(const Vector& x, double h, double gamma_k, const Operators& o) {
  return x - h * (o.Lm * x + gamma_k * (o.Hd * x - o.zH));
}

}  // namespace qls::oracle
