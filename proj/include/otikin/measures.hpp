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

// Discrete probability measures on phase space, couplings between them and
// the four plan moments every plan cost factors through.

#ifndef OTIKIN_MEASURES_HPP_
#define OTIKIN_MEASURES_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "otikin/error.hpp"
#include "otikin/phase.hpp"
#include "otikin/transport_lp.hpp"

namespace otikin {

struct Atom {
  PhaseState state;
  double weight;
};

// Weighted point cloud on phase space. Immutable once built; weights are
// positive and sum to 1 within 1e-10. Coincident atoms are allowed.
class DiscreteMeasure {
 public:
  DiscreteMeasure(int dim, std::vector<Atom> atoms) : dim_(dim), atoms_(std::move(atoms)) {
    if (dim_ < 1) throw MeasureError("measure dimension must be >= 1");
    if (atoms_.empty()) throw MeasureError("measure has no atoms");
    double total = 0.0;
    for (const Atom& a : atoms_) {
      if (a.state.dim() != dim_) throw MeasureError("atom dimension differs from measure dimension");
      if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw MeasureError("atom weight must be > 0");
      total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-10) throw MeasureError("weights do not sum to 1");
  }

  int dim() const { return dim_; }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }

  Eigen::VectorXd weights() const {
    Eigen::VectorXd w(static_cast<Eigen::Index>(atoms_.size()));
    for (std::size_t i = 0; i < atoms_.size(); ++i) w(static_cast<Eigen::Index>(i)) = atoms_[i].weight;
    return w;
  }

  // Largest |x| over the atoms; sets the scale of position tolerances.
  double position_scale() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s = std::max(s, a.state.x.norm());
    return s;
  }

  // ||v||^2 in L^2 of the measure.
  double velocity_second_moment() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.weight * a.state.v.squaredNorm();
    return s;
  }

  static DiscreteMeasure uniform(int dim, const std::vector<PhaseState>& states) {
    std::vector<Atom> atoms;
    atoms.reserve(states.size());
    const double w = 1.0 / static_cast<double>(states.size());
    for (const auto& s : states) atoms.push_back({s, w});
    return DiscreteMeasure(dim, std::move(atoms));
  }

 private:
  int dim_;
  std::vector<Atom> atoms_;
};

// Measure data as parsed from a file, before any validation.
struct RawMeasure {
  int dim = -1;  // -1: infer from the first atom.
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> v;
  std::vector<double> w;
};

inline DiscreteMeasure validate_measure(const RawMeasure& raw) {
  if (raw.x.empty()) throw MeasureError("empty atom list");
  if (raw.x.size() != raw.v.size() || raw.x.size() != raw.w.size()) {
    throw MeasureError("position, velocity and weight lists differ in length");
  }
  const int dim = raw.dim >= 0 ? raw.dim : static_cast<int>(raw.x.front().size());
  if (dim < 1) throw MeasureError("measure dimension must be >= 1");
  double total = 0.0;
  for (std::size_t i = 0; i < raw.x.size(); ++i) {
    if (static_cast<int>(raw.x[i].size()) != dim || static_cast<int>(raw.v[i].size()) != dim) {
      throw MeasureError("ragged dimensions at atom " + std::to_string(i));
    }
    if (!(raw.w[i] > 0.0) || !std::isfinite(raw.w[i])) {
      throw MeasureError("nonpositive weight at atom " + std::to_string(i));
    }
    total += raw.w[i];
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw MeasureError("weights sum to " + std::to_string(total) + ", not 1");
  }
  std::vector<Atom> atoms;
  atoms.reserve(raw.x.size());
  for (std::size_t i = 0; i < raw.x.size(); ++i) {
    Vec x = Eigen::Map<const Vec>(raw.x[i].data(), dim);
    Vec v = Eigen::Map<const Vec>(raw.v[i].data(), dim);
    if (!x.allFinite() || !v.allFinite()) throw MeasureError("non-finite coordinate at atom " + std::to_string(i));
    // Sums within 1e-12 of one are kept bit-exact so files round-trip.
    const double w = std::abs(total - 1.0) <= 1e-12 ? raw.w[i] : raw.w[i] / total;
    atoms.push_back({PhaseState(std::move(x), std::move(v)), w});
  }
  return DiscreteMeasure(dim, std::move(atoms));
}

// Dense m x k transport plan. Build through make_coupling to validate.
class Coupling {
 public:
  explicit Coupling(Eigen::MatrixXd P) : P_(std::move(P)) {}
  const Eigen::MatrixXd& matrix() const { return P_; }
  Eigen::Index rows() const { return P_.rows(); }
  Eigen::Index cols() const { return P_.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return P_(i, j); }

 private:
  Eigen::MatrixXd P_;
};

struct CouplingReport {
  double max_marginal_violation = 0.0;
  double min_entry = 0.0;
  bool shape_ok = true;

  bool valid() const { return shape_ok && max_marginal_violation <= 1e-9 && min_entry >= -1e-12; }
};

inline CouplingReport check_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     const Eigen::MatrixXd& P) {
  CouplingReport r;
  if (P.rows() != static_cast<Eigen::Index>(mu.size()) ||
      P.cols() != static_cast<Eigen::Index>(nu.size())) {
    r.shape_ok = false;
    r.max_marginal_violation = std::numeric_limits<double>::infinity();
    return r;
  }
  r.max_marginal_violation = std::max((P.rowwise().sum() - mu.weights()).cwiseAbs().maxCoeff(),
                                      (P.colwise().sum().transpose() - nu.weights()).cwiseAbs().maxCoeff());
  r.min_entry = P.minCoeff();
  return r;
}

inline Coupling make_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Eigen::MatrixXd P) {
  const CouplingReport r = check_coupling(mu, nu, P);
  if (!r.valid()) {
    throw InvalidArgument("invalid coupling: marginal violation " + std::to_string(r.max_marginal_violation) +
                          ", min entry " + std::to_string(r.min_entry));
  }
  return Coupling(P.cwiseMax(0.0));
}

inline Coupling product_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  detail::require(mu.dim() == nu.dim(), "product_coupling: dimension mismatch");
  return Coupling(mu.weights() * nu.weights().transpose());
}

// A = ||y-x||^2, B = (y-x, v+w), C = ||v+w||^2, D = ||w-v||^2, all in L^2(pi).
struct PlanMoments {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double D = 0.0;
  // Squared position scale of the underlying measures; sets the A = 0 cut.
  double scale_sq = 0.0;
};

inline PlanMoments plan_moments(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Coupling& P) {
  detail::require(mu.dim() == nu.dim(), "plan_moments: dimension mismatch");
  const CouplingReport r = check_coupling(mu, nu, P.matrix());
  if (!r.valid()) throw InvalidArgument("plan_moments: invalid coupling");
  PlanMoments mo;
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    const PhaseState& a = mu[static_cast<std::size_t>(i)].state;
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      const double p = P(i, j);
      if (p <= 0.0) continue;
      const PhaseState& b = nu[static_cast<std::size_t>(j)].state;
      const Vec dx = b.x - a.x;
      const Vec sum = a.v + b.v;
      mo.A += p * dx.squaredNorm();
      mo.B += p * dx.dot(sum);
      mo.C += p * sum.squaredNorm();
      mo.D += p * (b.v - a.v).squaredNorm();
    }
  }
  const double s = std::max(mu.position_scale(), nu.position_scale());
  mo.scale_sq = s * s;
  return mo;
}

// Squared 2-Wasserstein distance on phase space with cost |x-y|^2 + |v-w|^2.
inline double w2_sq(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  detail::require(mu.dim() == nu.dim(), "w2_sq: dimension mismatch");
  Eigen::MatrixXd cost(mu.size(), nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) {
      cost(i, j) = std::pow(phase_distance(mu[i].state, nu[j].state), 2);
    }
  }
  return std::max(0.0, solve_transport_auto(mu.weights(), nu.weights(), cost).cost);
}

inline DiscreteMeasure pushforward_free_transport(const DiscreteMeasure& mu, double T) {
  detail::require(T >= 0.0, "pushforward_free_transport: negative horizon");
  std::vector<Atom> atoms;
  atoms.reserve(mu.size());
  for (const Atom& a : mu.atoms()) atoms.push_back({free_transport(a.state, T), a.weight});
  return DiscreteMeasure(mu.dim(), std::move(atoms));
}

// Weighted point sets: a multiset of vectors with masses. Used to compare
// spatial marginals and whole measures up to reordering and splitting.
struct WeightedPoints {
  std::vector<Vec> points;
  std::vector<double> weights;
};

inline WeightedPoints spatial_marginal(const DiscreteMeasure& mu) {
  WeightedPoints out;
  for (const Atom& a : mu.atoms()) {
    out.points.push_back(a.state.x);
    out.weights.push_back(a.weight);
  }
  return out;
}

inline WeightedPoints velocity_marginal(const DiscreteMeasure& mu) {
  WeightedPoints out;
  for (const Atom& a : mu.atoms()) {
    out.points.push_back(a.state.v);
    out.weights.push_back(a.weight);
  }
  return out;
}

inline WeightedPoints phase_points(const DiscreteMeasure& mu) {
  WeightedPoints out;
  for (const Atom& a : mu.atoms()) {
    Vec s(2 * mu.dim());
    s << a.state.x, a.state.v;
    out.points.push_back(std::move(s));
    out.weights.push_back(a.weight);
  }
  return out;
}

namespace detail {

inline bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

inline bool close_per_coordinate(const Vec& a, const Vec& b, double tol) {
  return ((a - b).cwiseAbs().array() <= tol).all();
}

}  // namespace detail

// Merges points that agree coordinate-wise within tol: points are visited in
// lexicographic order and each joins the first existing site it matches.
// Site of each input point is returned in `site_of`.
struct CollapsedSites {
  std::vector<Vec> sites;
  std::vector<double> mass;
  std::vector<int> site_of;
};

inline CollapsedSites collapse_sites(const WeightedPoints& wp, double tol) {
  std::vector<std::size_t> order(wp.points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detail::lex_less(wp.points[a], wp.points[b]);
  });
  CollapsedSites out;
  out.site_of.assign(wp.points.size(), -1);
  for (std::size_t idx : order) {
    int found = -1;
    for (std::size_t s = 0; s < out.sites.size(); ++s) {
      if (detail::close_per_coordinate(out.sites[s], wp.points[idx], tol)) {
        found = static_cast<int>(s);
        break;
      }
    }
    if (found < 0) {
      found = static_cast<int>(out.sites.size());
      out.sites.push_back(wp.points[idx]);
      out.mass.push_back(0.0);
    }
    out.mass[static_cast<std::size_t>(found)] += wp.weights[idx];
    out.site_of[idx] = found;
  }
  return out;
}

// True when a and b agree as weighted point sets: same sites within tol per
// coordinate and same masses within 1e-9.
inline bool same_weighted_point_set(const WeightedPoints& a, const WeightedPoints& b, double tol) {
  const CollapsedSites sa = collapse_sites(a, tol);
  const CollapsedSites sb = collapse_sites(b, tol);
  if (sa.sites.size() != sb.sites.size()) return false;
  std::vector<char> used(sb.sites.size(), 0);
  for (std::size_t i = 0; i < sa.sites.size(); ++i) {
    bool matched = false;
    for (std::size_t j = 0; j < sb.sites.size(); ++j) {
      if (used[j] || !detail::close_per_coordinate(sa.sites[i], sb.sites[j], tol)) continue;
      if (std::abs(sa.mass[i] - sb.mass[j]) > 1e-9) return false;
      used[j] = 1;
      matched = true;
      break;
    }
    if (!matched) return false;
  }
  return true;
}

}  // namespace otikin

#endif  // OTIKIN_MEASURES_HPP_
