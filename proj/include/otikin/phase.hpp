// Copyright 2026 The otikin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Particle-level kinetic transport: minimal-acceleration cubic connectors
// between two phase states, the fixed-horizon discrepancy, its optimisation
// over the horizon, and the lower-semicontinuous discrepancy d.

#ifndef OTIKIN_PHASE_HPP_
#define OTIKIN_PHASE_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "otikin/error.hpp"

namespace otikin {

using Vec = Eigen::VectorXd;

// A point (x, v) of phase space R^n x R^n.
struct PhaseState {
  Vec x;
  Vec v;

  PhaseState() = default;
  PhaseState(Vec position, Vec velocity)
      : x(std::move(position)), v(std::move(velocity)) {
    detail::require(x.size() == v.size() && x.size() >= 1,
                    "PhaseState: position and velocity must share a dimension >= 1");
    detail::require(x.allFinite() && v.allFinite(), "PhaseState: non-finite entry");
  }

  Eigen::Index dim() const { return x.size(); }

  // Convenience for the n = 1 case used all over the tests.
  static PhaseState scalar(double x, double v) {
    return PhaseState(Vec::Constant(1, x), Vec::Constant(1, v));
  }
};

inline bool operator==(const PhaseState& a, const PhaseState& b) {
  return a.x == b.x && a.v == b.v;
}

// Euclidean distance in phase space, sqrt(|x1-x2|^2 + |v1-v2|^2).
inline double phase_distance(const PhaseState& a, const PhaseState& b) {
  return std::sqrt((a.x - b.x).squaredNorm() + (a.v - b.v).squaredNorm());
}

// Horizon minimising the fixed-time discrepancy. Zero and Infinite are
// explicit tags, never sentinel floats.
class OptimalTime {
 public:
  enum class Kind { kZero, kFinite, kInfinite };

  static OptimalTime zero() { return OptimalTime(Kind::kZero, 0.0); }
  static OptimalTime infinite() { return OptimalTime(Kind::kInfinite, 0.0); }
  static OptimalTime finite(double T) {
    detail::require(T > 0.0 && std::isfinite(T), "OptimalTime: finite horizon must be > 0");
    return OptimalTime(Kind::kFinite, T);
  }

  Kind kind() const { return kind_; }
  bool is_zero() const { return kind_ == Kind::kZero; }
  bool is_finite() const { return kind_ == Kind::kFinite; }
  bool is_infinite() const { return kind_ == Kind::kInfinite; }

  // Horizon value; only meaningful for Finite.
  double value() const { return value_; }

  friend bool operator==(const OptimalTime&, const OptimalTime&) = default;

 private:
  OptimalTime(Kind k, double v) : kind_(k), value_(v) {}
  Kind kind_;
  double value_;
};

namespace detail {

inline void require_same_dim(const PhaseState& a, const PhaseState& b) {
  require(a.dim() == b.dim(), "phase states have different dimensions");
}

// Tolerance deciding |y - x| = 0. The branch switch of d is discontinuous,
// so the decision must be deterministic.
inline double position_epsilon(const Vec& x, const Vec& y) {
  return 1e-12 * (1.0 + x.norm() + y.norm());
}

inline bool same_position(const Vec& x, const Vec& y) {
  return (y - x).norm() <= position_epsilon(x, y);
}

}  // namespace detail

// The minimal-acceleration connector on [0, T]:
//   alpha(t) = a3 t^3 + a2 t^2 + a1 t + a0.
// The endpoint states are stored so that evaluation at 0 and T is exact.
class CubicSpline {
 public:
  CubicSpline(PhaseState src, PhaseState dst, double horizon)
      : src_(std::move(src)), dst_(std::move(dst)), horizon_(horizon) {
    const double T = horizon_;
    const Vec dx = dst_.x - src_.x;
    a3_ = (src_.v + dst_.v) / (T * T) - 2.0 * dx / (T * T * T);
    a2_ = 3.0 * dx / (T * T) - (2.0 * src_.v + dst_.v) / T;
    a1_ = src_.v;
    a0_ = src_.x;
  }

  const Vec& a3() const { return a3_; }
  const Vec& a2() const { return a2_; }
  const Vec& a1() const { return a1_; }
  const Vec& a0() const { return a0_; }
  double horizon() const { return horizon_; }
  const PhaseState& source() const { return src_; }
  const PhaseState& target() const { return dst_; }
  Eigen::Index dim() const { return a0_.size(); }

  // alpha''(t); affine in t.
  Vec acceleration(double t) const { return 6.0 * a3_ * t + 2.0 * a2_; }

 private:
  PhaseState src_;
  PhaseState dst_;
  double horizon_;
  Vec a3_, a2_, a1_, a0_;
};

inline CubicSpline spline_from_endpoints(const PhaseState& src, const PhaseState& dst,
                                         double T) {
  detail::require(T > 0.0 && std::isfinite(T), "spline_from_endpoints: horizon must be > 0");
  detail::require_same_dim(src, dst);
  return CubicSpline(src, dst, T);
}

// (alpha(t), alpha'(t)) in the normalised form xi = t / T, which keeps the
// evaluation well conditioned for large and small horizons alike.
inline PhaseState spline_eval(const CubicSpline& s, double t) {
  const double T = s.horizon();
  detail::require(t >= 0.0 && t <= T, "spline_eval: time outside [0, T]");
  if (t == 0.0) return s.source();
  if (t == T) return s.target();
  const PhaseState& a = s.source();
  const PhaseState& b = s.target();
  const double xi = t / T;
  const double om = 1.0 - xi;
  const Vec dx = b.x - a.x;
  Vec pos = a.x + (xi * xi * (3.0 - 2.0 * xi)) * dx + (T * xi * om) * (om * a.v - xi * b.v);
  Vec vel = (6.0 * xi * om / T) * dx + (om * (1.0 - 3.0 * xi)) * a.v -
            (xi * (2.0 - 3.0 * xi)) * b.v;
  return PhaseState(std::move(pos), std::move(vel));
}

// T * int_0^T |alpha''|^2 dt, integrated exactly from the coefficients.
inline double spline_action(const CubicSpline& s) {
  const double T = s.horizon();
  const Vec& a3 = s.a3();
  const Vec& a2 = s.a2();
  const double integral = 4.0 * a2.squaredNorm() * T + 12.0 * a2.dot(a3) * T * T +
                          12.0 * a3.squaredNorm() * T * T * T;
  return T * integral;
}

// 12 |(y - x)/T - (v + w)/2|^2 + |w - v|^2.
inline double tilde_dT_sq(const PhaseState& src, const PhaseState& dst, double T) {
  detail::require(T > 0.0, "tilde_dT_sq: horizon must be > 0");
  detail::require_same_dim(src, dst);
  const Vec mismatch = (dst.x - src.x) / T - 0.5 * (src.v + dst.v);
  return 12.0 * mismatch.squaredNorm() + (dst.v - src.v).squaredNorm();
}

inline OptimalTime optimal_time_point(const PhaseState& src, const PhaseState& dst) {
  detail::require_same_dim(src, dst);
  if (detail::same_position(src.x, dst.x)) return OptimalTime::zero();
  const Vec dx = dst.x - src.x;
  const double drift = dx.dot(src.v + dst.v);
  if (drift > 0.0) return OptimalTime::finite(2.0 * dx.squaredNorm() / drift);
  return OptimalTime::infinite();
}

namespace detail {

// Common x != y branch: 3|v+w|^2 - 3 (u . (v+w))_+^2 + |w-v|^2.
inline double separated_branch(const PhaseState& src, const PhaseState& dst) {
  const Vec dx = dst.x - src.x;
  const Vec sum = src.v + dst.v;
  const double proj = std::max(0.0, dx.dot(sum) / dx.norm());
  return std::max(0.0, 3.0 * sum.squaredNorm() - 3.0 * proj * proj) +
         (dst.v - src.v).squaredNorm();
}

}  // namespace detail

// inf over T > 0 of tilde_dT_sq. At x = y (and for a non-positive drift) the
// value is the T -> infinity limit 3|v+w|^2 + |w-v|^2.
inline double tilde_d_sq(const PhaseState& src, const PhaseState& dst) {
  detail::require_same_dim(src, dst);
  if (detail::same_position(src.x, dst.x)) {
    return 3.0 * (src.v + dst.v).squaredNorm() + (dst.v - src.v).squaredNorm();
  }
  return detail::separated_branch(src, dst);
}

// Lower-semicontinuous envelope of tilde_d_sq: at x = y only |w - v|^2 is left.
inline double d_sq(const PhaseState& src, const PhaseState& dst) {
  detail::require_same_dim(src, dst);
  if (detail::same_position(src.x, dst.x)) return (dst.v - src.v).squaredNorm();
  return detail::separated_branch(src, dst);
}

inline double d(const PhaseState& src, const PhaseState& dst) { return std::sqrt(d_sq(src, dst)); }

// G_T(x, v) = (x + T v, v).
inline PhaseState free_transport(const PhaseState& s, double T) {
  detail::require(T >= 0.0, "free_transport: negative horizon");
  return PhaseState(s.x + T * s.v, s.v);
}

// Outcome of classify_zero.
struct ZeroClass {
  enum class Kind { kFreeTransport, kBothRest, kPositive };
  Kind kind;
  double value;  // T for kFreeTransport, d^2 for kPositive, 0 otherwise.
};

// Decides which of the two zero classes of d a pair falls into, if any.
// The free-transport horizon comes from the closed form T = (y-x).v / |v|^2.
inline ZeroClass classify_zero(const PhaseState& src, const PhaseState& dst, double tol) {
  detail::require(tol > 0.0, "classify_zero: tolerance must be > 0");
  detail::require_same_dim(src, dst);
  const double dsq = d_sq(src, dst);
  const ZeroClass positive{ZeroClass::Kind::kPositive, dsq};
  if ((dst.v - src.v).norm() > tol) return positive;
  const Vec dx = dst.x - src.x;
  const double speed_sq = src.v.squaredNorm();
  if (src.v.norm() > tol) {
    const double T = dx.dot(src.v) / speed_sq;
    if (T >= -tol && (dx - std::max(T, 0.0) * src.v).norm() <= tol) {
      return {ZeroClass::Kind::kFreeTransport, std::max(T, 0.0)};
    }
    return positive;
  }
  if (dst.v.norm() > tol) return positive;
  if (dx.norm() <= tol) return {ZeroClass::Kind::kFreeTransport, 0.0};
  return {ZeroClass::Kind::kBothRest, 0.0};
}

// A sampled curve t -> (x_t, v_t).
using CurveSample = std::pair<double, PhaseState>;

// Forward ratios d(gamma(t), gamma(t+h)) / h for each h. Only forward
// differences are taken since d is asymmetric. Sample times must contain t
// and every t + h (matched to a relative tolerance of 1e-9).
inline std::vector<double> curve_d_derivative(std::span<const CurveSample> samples, double t,
                                              std::span<const double> h_list) {
  auto lookup = [&](double time) -> const PhaseState& {
    const double tol = 1e-9 * (1.0 + std::abs(time));
    for (const auto& [ts, state] : samples) {
      if (std::abs(ts - time) <= tol) return state;
    }
    throw InvalidArgument("curve_d_derivative: insufficient samples (no sample at requested time)");
  };
  const PhaseState& base = lookup(t);
  std::vector<double> ratios;
  ratios.reserve(h_list.size());
  for (double h : h_list) {
    detail::require(h > 0.0, "curve_d_derivative: increments must be positive");
    ratios.push_back(d(base, lookup(t + h)) / h);
  }
  return ratios;
}

}  // namespace otikin

#endif  // OTIKIN_PHASE_HPP_
