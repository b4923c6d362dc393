#pragma once

#include <cmath>
#include <cstddef>

#include "qlinsolve/error.hpp"

namespace qls {

// γ(k) = k0^δ / (k + k0)^δ with β(k) = γ(k)/γ(k+1).
class GammaSchedule {
 public:
  GammaSchedule(double k0, double delta) : k0_(k0), delta_(delta) {
    if (!(k0 > 0.0) || !std::isfinite(k0)) throw Error("gamma.k0 must be positive");
    if (!(delta > 0.5 && delta <= 1.0)) throw Error("gamma.delta must lie in (1/2, 1]");
  }

  static GammaSchedule from_beta0(double beta0, double delta) {
    if (!(beta0 > 1.0)) throw Error("beta(0) must exceed 1");
    return GammaSchedule(k0_from_beta0(beta0, delta), delta);
  }

  static double k0_from_beta0(double beta0, double delta) {
    return 1.0 / (std::pow(beta0, 1.0 / delta) - 1.0);
  }
  static double beta0_from_k0(double k0, double delta) {
    return std::pow(1.0 + 1.0 / k0, delta);
  }

  double k0() const { return k0_; }
  double delta() const { return delta_; }

  double value(std::size_t k) const {
    return std::pow(k0_ / (static_cast<double>(k) + k0_), delta_);
  }
  double beta(std::size_t k) const {
    return std::pow((static_cast<double>(k) + 1.0 + k0_) / (static_cast<double>(k) + k0_),
                    delta_);
  }
  double beta0() const { return beta(0); }

 private:
  double k0_;
  double delta_;
};

}  // namespace qls
