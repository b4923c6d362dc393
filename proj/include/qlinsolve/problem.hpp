#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qlinsolve/error.hpp"
#include "qlinsolve/format.hpp"
#include "qlinsolve/graph.hpp"
#include "qlinsolve/linalg.hpp"

namespace qls {

// Row i of H and entry i of z belong to node i.
struct LinearProblem {
  Matrix H;
  Vector z;

  LinearProblem() = default;
  LinearProblem(Matrix h, Vector zz) : H(std::move(h)), z(std::move(zz)) {
    if (H.rows() == 0 || H.cols() == 0) throw Error("H must be non-empty");
    if (z.size() != H.rows())
      throw Error("z has " + std::to_string(z.size()) + " entries but H has " +
                  std::to_string(H.rows()) + " rows");
    if (!H.allFinite() || !z.allFinite()) throw Error("problem data must be finite");
  }

  std::size_t n_nodes() const { return static_cast<std::size_t>(H.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(H.cols()); }
  Vector row(std::size_t i) const { return H.row(static_cast<Index>(i)).transpose(); }
};

enum class SolutionKind { unique_exact, unique_least_squares, unsupported };

inline std::string_view to_string(SolutionKind k) {
  switch (k) {
    case SolutionKind::unique_exact: return "unique_exact";
    case SolutionKind::unique_least_squares: return "unique_least_squares";
    case SolutionKind::unsupported: return "unsupported";
  }
  return "?";
}

struct ProblemClassification {
  SolutionKind kind = SolutionKind::unsupported;
  Vector solution;  // empty when unsupported
  double residual_norm = 0.0;
  double gram_min_eig = 0.0;
  double exact_tol = 0.0;
};

inline double default_exact_tol(const LinearProblem& p) { return 1e-9 * (1.0 + p.z.norm()); }

inline bool full_column_rank(const LinearProblem& p) {
  const Matrix gram = p.H.transpose() * p.H;
  const auto ext = sym_eig_extremes(gram);
  return ext.max > 0.0 && ext.min > 1e-12 * ext.max;
}

inline ProblemClassification classify(const LinearProblem& p,
                                      std::optional<double> exact_tol = std::nullopt) {
  ProblemClassification out;
  out.exact_tol = exact_tol.value_or(default_exact_tol(p));
  const Matrix gram = p.H.transpose() * p.H;
  const auto ext = sym_eig_extremes(gram);
  out.gram_min_eig = ext.min;
  if (!(ext.max > 0.0) || ext.min <= 1e-12 * ext.max) return out;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) return out;
  out.solution = llt.solve(p.H.transpose() * p.z);
  out.residual_norm = (p.z - p.H * out.solution).norm();
  out.kind = out.residual_norm <= out.exact_tol ? SolutionKind::unique_exact
                                                : SolutionKind::unique_least_squares;
  return out;
}

struct StackedOperators {
  Matrix Hd;  // blockdiag(h_i h_i^T)
  Matrix Lm;  // L ⊗ I_m
  Matrix Fd;  // Lm + Hd
  Vector zH;  // stack of z_i h_i
  double fd_min = 0.0;
  double fd_max = 0.0;
  double hd_inf_norm = 0.0;
  double hd_2_norm = 0.0;
};

inline StackedOperators build_stacked(const LinearProblem& p, const LaplacianSummary& lap) {
  const auto n = static_cast<Index>(p.n_nodes());
  const auto m = static_cast<Index>(p.dim());
  if (lap.L.rows() != n)
    throw Error("problem has " + std::to_string(n) + " nodes but graph has " +
                std::to_string(lap.L.rows()));
  StackedOperators ops;
  ops.Hd = Matrix::Zero(n * m, n * m);
  ops.zH = Vector(n * m);
  for (Index i = 0; i < n; ++i) {
    const Vector hi = p.H.row(i).transpose();
    ops.Hd.block(i * m, i * m, m, m) = hi * hi.transpose();
    ops.zH.segment(i * m, m) = p.z(i) * hi;
    ops.hd_2_norm = std::max(ops.hd_2_norm, hi.squaredNorm());
  }
  ops.Lm = kron_identity(lap.L, m);
  ops.Fd = ops.Lm + ops.Hd;
  const auto ext = sym_eig_extremes(ops.Fd);
  ops.fd_min = ext.min;
  ops.fd_max = ext.max;
  ops.hd_inf_norm = inf_norm(ops.Hd);
  if (ops.fd_min <= 0.0 && full_column_rank(p))
    throw Error("F_d is not positive definite although rank(H) = m");
  return ops;
}

inline double theta_n(const StackedOperators& ops, const LaplacianSummary& lap, std::size_t m,
                      std::size_t n) {
  if (!(ops.fd_min > 0.0)) throw Error("theta_n needs a positive definite F_d");
  return ops.fd_min * ops.fd_min /
         (2.0 * std::sqrt(static_cast<double>(m * n)) * lap.lambdaN * ops.fd_max);
}

// Scalar network/problem constants used by the planner and the rate bound.
struct NetworkSpectra {
  double fd_min = 0.0;
  double fd_max = 0.0;
  double lambda2 = 0.0;
  double lambdaN = 0.0;
  std::size_t dstar = 0;
  std::size_t m = 0;
  std::size_t n = 0;
  double hd_inf_norm = 0.0;
  double hd_2_norm = 0.0;
  double zh_2_norm = 0.0;
  double zh_inf_norm = 0.0;

  double sqrt_mn() const { return std::sqrt(static_cast<double>(m * n)); }
  double rho_h(double h) const { return 1.0 - h * fd_min; }
  double kappa() const { return lambdaN / lambda2; }
};

inline NetworkSpectra make_spectra(const StackedOperators& ops, const LaplacianSummary& lap,
                                   std::size_t m, std::size_t n) {
  NetworkSpectra s;
  s.fd_min = ops.fd_min;
  s.fd_max = ops.fd_max;
  s.lambda2 = lap.lambda2;
  s.lambdaN = lap.lambdaN;
  s.dstar = lap.dstar;
  s.m = m;
  s.n = n;
  s.hd_inf_norm = ops.hd_inf_norm;
  s.hd_2_norm = ops.hd_2_norm;
  s.zh_2_norm = ops.zH.norm();
  s.zh_inf_norm = inf_norm(ops.zH);
  return s;
}

// "N M" header, then N rows of m+1 numbers: h_i^T then z_i.
inline LinearProblem read_problem(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  long long n = -1, m = -1;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_comment(line);
    if (detail::blank(line)) continue;
    std::istringstream ls(line);
    auto fail = [&](const std::string& what) {
      throw Error("problem line " + std::to_string(lineno) + ": " + what);
    };
    if (n < 0) {
      if (!(ls >> n >> m) || n <= 0 || m <= 0) fail("expected header 'N M'");
      std::string extra;
      if (ls >> extra) fail("unexpected token '" + extra + "'");
      continue;
    }
    std::vector<double> vals;
    std::string tok;
    while (ls >> tok) {
      try {
        vals.push_back(parse_double(tok));
      } catch (const Error&) {
        fail("not a number: '" + tok + "'");
      }
    }
    if (static_cast<long long>(vals.size()) != m + 1)
      fail("expected " + std::to_string(m + 1) + " numbers, got " + std::to_string(vals.size()));
    if (static_cast<long long>(rows.size()) == n) fail("more than N data rows");
    rows.push_back(std::move(vals));
  }
  if (n < 0) throw Error("problem file has no 'N M' header");
  if (static_cast<long long>(rows.size()) != n)
    throw Error("problem file has " + std::to_string(rows.size()) + " data rows, expected " +
                std::to_string(n));
  Matrix H(n, m);
  Vector z(n);
  for (long long i = 0; i < n; ++i) {
    for (long long j = 0; j < m; ++j) H(i, j) = rows[i][j];
    z(i) = rows[i][m];
  }
  return LinearProblem(std::move(H), std::move(z));
}

inline LinearProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open problem file '" + path + "'");
  return read_problem(in);
}

inline void write_problem(std::ostream& out, const LinearProblem& p) {
  out << p.n_nodes() << " " << p.dim() << "\n";
  for (Index i = 0; i < p.H.rows(); ++i) {
    for (Index j = 0; j < p.H.cols(); ++j) out << format_double(p.H(i, j)) << " ";
    out << format_double(p.z(i)) << "\n";
  }
}

}  // namespace qls
