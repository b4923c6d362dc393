#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "qlinsolve/error.hpp"

namespace qls {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;
using Index = Eigen::Index;

struct EigExtremes {
  double min = 0.0;
  double max = 0.0;
};

inline double max_abs_entry(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double max_asymmetry(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error("matrix is not square");
  double worst = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i + 1; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
  return worst;
}

inline void require_symmetric(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error("matrix is not square");
  if (a.rows() == 0) throw Error("matrix is empty");
  if (!a.allFinite()) throw Error("matrix has non-finite entries");
  if (max_asymmetry(a) > 1e-12 * max_abs_entry(a))
    throw Error("matrix is not symmetric");
}

// Ascending eigenvalues of a symmetric matrix.
inline Vector sym_eigenvalues(const Matrix& a) {
  require_symmetric(a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("eigenvalue iteration did not converge");
  return es.eigenvalues();
}

inline EigExtremes sym_eig_extremes(const Matrix& a) {
  const Vector ev = sym_eigenvalues(a);
  return {ev(0), ev(ev.size() - 1)};
}

// Maximum absolute row sum.
inline double inf_norm(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
}

inline double inf_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// A ⊗ I_m.
inline Matrix kron_identity(const Matrix& a, Index m) {
  Matrix out = Matrix::Zero(a.rows() * m, a.cols() * m);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != 0.0)
        for (Index t = 0; t < m; ++t) out(i * m + t, j * m + t) = a(i, j);
  return out;
}

// 1_n ⊗ y.
inline Vector stack_copies(const Vector& y, Index n) {
  Vector out(n * y.size());
  for (Index i = 0; i < n; ++i) out.segment(i * y.size(), y.size()) = y;
  return out;
}

// Row-major flatten of an n×m state matrix.
inline Vector flatten(const Matrix& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

inline Matrix unflatten(const Vector& v, Index n, Index m) {
  if (v.size() != n * m) throw Error("stacked vector has wrong length");
  return Eigen::Map<const Matrix>(v.data(), n, m);
}

}  // namespace qls
