#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "qlinsolve/error.hpp"
#include "qlinsolve/graph.hpp"
#include "qlinsolve/linalg.hpp"
#include "qlinsolve/rng.hpp"

namespace qls {

// Smallest b with 2^b >= 2K.
inline int bits_per_coord(int K) {
  if (K < 1) throw Error("quantizer level K must be >= 1");
  int b = 0;
  long long cap = 1;
  while (cap < 2LL * K) {
    cap *= 2;
    ++b;
  }
  return b;
}

struct QuantizerSpec {
  int K = 1;

  explicit QuantizerSpec(int k) : K(k) {
    if (K < 1) throw Error("quantizer level K must be >= 1");
  }
  int levels() const { return 2 * K + 1; }
  int bits() const { return bits_per_coord(K); }
  bool saturates(double z) const { return std::abs(z) > K + 0.5; }
};

// Left-open cells ((2i-1)/2, (2i+1)/2] map to i; clamps to ±K.
inline int quantize(double z, int K) {
  if (K < 1) throw Error("quantizer level K must be >= 1");
  if (!std::isfinite(z)) throw Error("quantizer input is not finite");
  if (z < -0.5) return -quantize(-z, K);
  if (z <= 0.5) return 0;
  if (z > K + 0.5) return K;
  const double i = std::ceil(z - 0.5);
  return i > K ? K : static_cast<int>(i);
}

struct QuantizedVector {
  IntVector q;
  bool saturated = false;
  double max_abs_input = 0.0;
};

inline QuantizedVector quantize_vec(const Vector& v, int K) {
  QuantizedVector out;
  out.q.resize(v.size());
  for (Index a = 0; a < v.size(); ++a) {
    out.q(a) = quantize(v(a), K);
    out.max_abs_input = std::max(out.max_abs_input, std::abs(v(a)));
  }
  out.saturated = out.max_abs_input > K + 0.5;
  return out;
}

struct EncoderState {
  Vector b;
  std::size_t round = 0;
  std::size_t saturation_events = 0;
  double max_abs_input = 0.0;

  static EncoderState zero(std::size_t m) { return {Vector::Zero(static_cast<Index>(m))}; }
};

struct DecoderState {
  Vector xhat;
  std::size_t round = 0;

  static DecoderState zero(std::size_t m) { return {Vector::Zero(static_cast<Index>(m))}; }
};

struct EncodeResult {
  IntVector q;
  EncoderState state;
  double input_inf_norm = 0.0;  // ||(x - predictor)/s||_inf for this step
  bool saturated = false;
};

inline void require_scale(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw Error("quantizer scale must be positive");
}

namespace detail {

inline EncodeResult finish_encode(const EncoderState& st, QuantizedVector qv) {
  EncodeResult out;
  out.q = std::move(qv.q);
  out.input_inf_norm = qv.max_abs_input;
  out.saturated = qv.saturated;
  out.state.round = st.round + 1;
  out.state.saturation_events = st.saturation_events + (qv.saturated ? 1 : 0);
  out.state.max_abs_input = std::max(st.max_abs_input, qv.max_abs_input);
  return out;
}

}  // namespace detail

// q(k) = Q((x(k) - b(k-1)) / s(k-1));  b(k) = s(k-1) q(k) + b(k-1).
inline EncodeResult encode_step(const EncoderState& st, const Vector& x, double s_prev, int K) {
  require_scale(s_prev);
  if (x.size() != st.b.size()) throw Error("encoder input has wrong dimension");
  const Vector arg = (x - st.b) / s_prev;
  auto out = detail::finish_encode(st, quantize_vec(arg, K));
  out.state.b = s_prev * out.q.cast<double>() + st.b;
  return out;
}

// xhat(k) = s(k-1) q(k) + xhat(k-1).
inline DecoderState decode_step(const DecoderState& st, const IntVector& q, double s_prev) {
  require_scale(s_prev);
  if (q.size() != st.xhat.size()) throw Error("decoder symbol has wrong dimension");
  return {s_prev * q.cast<double>() + st.xhat, st.round + 1};
}

struct NoiseModel {
  double damping = 1.0;  // ϱ
  bool init_errors = false;
  double init_lo = 0.0;
  double init_hi = 0.0;
  bool roundoff = false;
  double roundoff_amp = 0.0;
  std::uint64_t seed = 0;
  // Quantize x - ϱ b(k-1) rather than x - b(k-1).
  bool damped_predictor = true;

  void validate() const {
    if (!(damping > 0.0 && damping <= 1.0)) throw Error("noise.damping must lie in (0, 1]");
    if (init_errors && !(init_lo <= init_hi)) throw Error("noise.init_lo must not exceed init_hi");
    if (roundoff && !(roundoff_amp >= 0.0)) throw Error("noise.roundoff_amp must be >= 0");
  }

  bool ideal() const { return damping == 1.0 && !init_errors && !roundoff; }
};

// Draws consumed by the damped codec, in simulation order.
class CodecNoise {
 public:
  explicit CodecNoise(const NoiseModel& model) : model_(model), rng_(model.seed) {}

  Vector init(std::size_t m) {
    Vector v = Vector::Zero(static_cast<Index>(m));
    if (model_.init_errors)
      for (Index a = 0; a < v.size(); ++a) v(a) = rng_.uniform(model_.init_lo, model_.init_hi);
    return v;
  }

  // Empty when round-off noise is disabled.
  Vector roundoff(std::size_t m) {
    if (!model_.roundoff) return {};
    Vector v(static_cast<Index>(m));
    for (Index a = 0; a < v.size(); ++a)
      v(a) = rng_.uniform(-model_.roundoff_amp, model_.roundoff_amp);
    return v;
  }

 private:
  NoiseModel model_;
  Rng rng_;
};

// b(k) = s(k-1) q(k) + ϱ b(k-1) + ε^b(k); an empty noise vector adds nothing.
inline EncodeResult damped_encode_step(const EncoderState& st, const Vector& x, double s_prev,
                                       int K, double damping, const Vector& noise,
                                       bool damped_predictor = true) {
  require_scale(s_prev);
  if (x.size() != st.b.size()) throw Error("encoder input has wrong dimension");
  const Vector carried = damping * st.b;
  const Vector arg = damped_predictor ? Vector((x - carried) / s_prev) : Vector((x - st.b) / s_prev);
  auto out = detail::finish_encode(st, quantize_vec(arg, K));
  out.state.b = s_prev * out.q.cast<double>() + carried;
  if (noise.size() != 0) out.state.b += noise;
  return out;
}

inline DecoderState damped_decode_step(const DecoderState& st, const IntVector& q, double s_prev,
                                       double damping, const Vector& noise) {
  require_scale(s_prev);
  if (q.size() != st.xhat.size()) throw Error("decoder symbol has wrong dimension");
  DecoderState out{s_prev * q.cast<double>() + damping * st.xhat, st.round + 1};
  if (noise.size() != 0) out.xhat += noise;
  return out;
}

// Worst case: every edge carries m symbols each way every round.
inline std::uint64_t fixed_rate_bits_per_round(const Graph& g, std::size_t m, int K) {
  return 2ULL * g.edges().size() * m * static_cast<std::uint64_t>(bits_per_coord(K));
}

}  // namespace qls
