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

// Curves of measures: spline interpolation between two measures, particle
// integration of Vlasov's equation along characteristics, and the diagnostics
// run on simulated curves (action, moment bounds, metric derivative, optimal
// horizon ratio, time reparametrisation).

#ifndef OTIKIN_DYNAMICS_HPP_
#define OTIKIN_DYNAMICS_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "otikin/error.hpp"
#include "otikin/measures.hpp"
#include "otikin/phase.hpp"
#include "otikin/solver.hpp"

namespace otikin {

// ---- spline dynamical plans -------------------------------------------------

struct EnsembleEntry {
  CubicSpline spline;
  double mass;
  std::size_t src;  // atom index in the source measure
  std::size_t dst;  // atom index in the target measure
};

struct SplineEnsemble {
  std::vector<EnsembleEntry> entries;
  double T = 1.0;
  int dim = 1;
};

inline SplineEnsemble build_dynamical_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                           const Coupling& plan, double T) {
  detail::require(T > 0.0 && std::isfinite(T), "build_dynamical_plan: horizon must be > 0");
  const CouplingReport r = check_coupling(mu, nu, plan.matrix());
  if (!r.valid()) throw InvalidArgument("build_dynamical_plan: invalid plan");
  SplineEnsemble e;
  e.T = T;
  e.dim = mu.dim();
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
      const double p = plan(i, j);
      if (p <= 0.0) continue;
      const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
      e.entries.push_back({spline_from_endpoints(mu[si].state, nu[sj].state, T), p, si, sj});
    }
  }
  return e;
}

// sum of mass * spline_action; equals c~_T of the plan.
inline double ensemble_action(const SplineEnsemble& e) {
  double s = 0.0;
  for (const auto& en : e.entries) s += en.mass * spline_action(en.spline);
  return s;
}

inline DiscreteMeasure interpolate_at(const SplineEnsemble& e, double t) {
  detail::require(t >= 0.0 && t <= e.T, "interpolate_at: time outside [0, T]");
  std::vector<Atom> atoms;
  atoms.reserve(e.entries.size());
  double total = 0.0;
  for (const auto& en : e.entries) total += en.mass;
  // Plan entries were clipped at zero, so renormalise the leftover rounding.
  for (const auto& en : e.entries) atoms.push_back({spline_eval(en.spline, t), en.mass / total});
  return DiscreteMeasure(e.dim, std::move(atoms));
}

struct MongeMatherReport {
  double min_separation = std::numeric_limits<double>::infinity();
  double time_of_min = 0.0;
  std::optional<std::pair<std::size_t, std::size_t>> offending;  // entry indices
  std::size_t pairs_checked = 0;
  bool violated = false;
};

// Scans the interior grid t_i = i T / (grid_size + 1) and refines each pair's
// closest approach by golden-section search on the neighbouring grid cells,
// so crossings between grid points are still caught. Pairs sharing both
// endpoints are exempt.
inline MongeMatherReport monge_mather_check(const SplineEnsemble& e, int grid_size, double tol) {
  detail::require(grid_size >= 1, "monge_mather_check: grid_size must be >= 1");
  const double T = e.T;
  const std::size_t n = e.entries.size();
  std::vector<double> times(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) times[static_cast<std::size_t>(i)] = T * (i + 1) / (grid_size + 1);

  std::vector<std::vector<PhaseState>> states(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (double t : times) states[a].push_back(spline_eval(e.entries[a].spline, t));
  }

  MongeMatherReport rep;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const CubicSpline& sa = e.entries[a].spline;
      const CubicSpline& sb = e.entries[b].spline;
      if (sa.source() == sb.source() && sa.target() == sb.target()) continue;
      ++rep.pairs_checked;
      std::size_t best_i = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < times.size(); ++i) {
        const double sep = phase_distance(states[a][i], states[b][i]);
        if (sep < best) {
          best = sep;
          best_i = i;
        }
      }
      double best_t = times[best_i];
      auto sep_at = [&](double t) { return phase_distance(spline_eval(sa, t), spline_eval(sb, t)); };
      double lo = times[best_i > 0 ? best_i - 1 : 0];
      double hi = times[std::min(best_i + 1, times.size() - 1)];
      if (hi > lo) {
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
        double fc = sep_at(c), fd = sep_at(d);
        for (int it = 0; it < 100 && hi - lo > 1e-15 * T; ++it) {
          if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = sep_at(c);
          } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = sep_at(d);
          }
        }
        const double tm = 0.5 * (lo + hi);
        const double fm = sep_at(tm);
        if (fm < best) {
          best = fm;
          best_t = tm;
        }
      }
      if (best < rep.min_separation) {
        rep.min_separation = best;
        rep.time_of_min = best_t;
        if (best <= tol) rep.offending = std::make_pair(a, b);
      }
      if (best <= tol && !rep.violated) {
        rep.violated = true;
        rep.offending = std::make_pair(a, b);
      }
    }
  }
  return rep;
}

// Two splines with distinct endpoints that meet in phase space at T/2:
// (0,1) -> (1,0) and a second spline from (1,-1) whose target is solved for
// so that both pass through the same state at the midpoint. No optimal plan
// can contain such a pair.
inline SplineEnsemble crossing_pair_ensemble() {
  const double T = 1.0;
  const CubicSpline first = spline_from_endpoints(PhaseState::scalar(0.0, 1.0), PhaseState::scalar(1.0, 0.0), T);
  const PhaseState mid = spline_eval(first, 0.5 * T);
  const PhaseState src2 = PhaseState::scalar(1.0, -1.0);
  // spline_eval is affine in the target state; recover the 2x2 map.
  auto mid_of = [&](double y, double w) {
    const PhaseState s = spline_eval(spline_from_endpoints(src2, PhaseState::scalar(y, w), T), 0.5 * T);
    return Eigen::Vector2d(s.x(0), s.v(0));
  };
  const Eigen::Vector2d base = mid_of(0.0, 0.0);
  Eigen::Matrix2d M;
  M.col(0) = mid_of(1.0, 0.0) - base;
  M.col(1) = mid_of(0.0, 1.0) - base;
  const Eigen::Vector2d target(mid.x(0), mid.v(0));
  const Eigen::Vector2d yw = M.fullPivLu().solve(target - base);
  SplineEnsemble e;
  e.T = T;
  e.dim = 1;
  e.entries.push_back({first, 0.5, 0, 0});
  e.entries.push_back({spline_from_endpoints(src2, PhaseState::scalar(yw(0), yw(1)), T), 0.5, 1, 1});
  return e;
}

// ---- force fields -----------------------------------------------------------

// Which one-sided limit to take at a time breakpoint of a piecewise force.
enum class Side { kLeft, kRight };

struct ForceField {
  std::string tag;
  std::function<Vec(double t, const Vec& x, const Vec& v, Side side)> eval;
  // Times where the field may jump; the integrator steps onto them exactly.
  std::vector<double> breakpoints;
};

inline ForceField free_force() {
  return {"free", [](double, const Vec& x, const Vec&, Side) { return Vec::Zero(x.size()).eval(); }, {}};
}

inline ForceField harmonic_force() {
  return {"harmonic", [](double, const Vec& x, const Vec&, Side) { return (-x).eval(); }, {}};
}

inline ForceField damped_force(double gamma) {
  return {"damped:" + std::to_string(gamma),
          [gamma](double, const Vec&, const Vec& v, Side) { return (-gamma * v).eval(); },
          {}};
}

// F(t, x, v) = sum_k t^k a_k + B x + C v.
inline ForceField poly_force(std::vector<Vec> a, Eigen::MatrixXd B, Eigen::MatrixXd C) {
  return {"poly",
          [a = std::move(a), B = std::move(B), C = std::move(C)](double t, const Vec& x, const Vec& v, Side) {
            Vec f = B * x + C * v;
            double tk = 1.0;
            for (const Vec& ak : a) {
              f += tk * ak;
              tk *= t;
            }
            return f;
          },
          {}};
}

// Drives every particle of an ensemble along its spline: the acceleration of
// the spline whose state at time t is nearest to (x, v).
inline ForceField spline_force_field(const SplineEnsemble& e) {
  return {"spline",
          [e](double t, const Vec& x, const Vec& v, Side) {
            const double tc = std::clamp(t, 0.0, e.T);
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < e.entries.size(); ++i) {
              const PhaseState s = spline_eval(e.entries[i].spline, tc);
              const double d2 = (s.x - x).squaredNorm() + (s.v - v).squaredNorm();
              if (d2 < best_d) {
                best_d = d2;
                best = i;
              }
            }
            return e.entries[best].spline.acceleration(tc);
          },
          {}};
}

// Piecewise-constant-in-time force on the line: value[i] on
// [knots[i], knots[i+1]).
inline ForceField piecewise_constant_force(std::vector<double> knots, std::vector<double> values) {
  detail::require(knots.size() == values.size() + 1, "piecewise_constant_force: knot/value count mismatch");
  std::vector<double> bps(knots.begin() + 1, knots.end() - 1);
  return {"piecewise",
          [knots = std::move(knots), values = std::move(values)](double t, const Vec& x, const Vec&, Side side) {
            std::size_t i = 0;
            while (i + 1 < values.size() &&
                   (side == Side::kRight ? t >= knots[i + 1] : t > knots[i + 1])) {
              ++i;
            }
            return Vec::Constant(x.size(), values[i]).eval();
          },
          std::move(bps)};
}

// ---- particle Vlasov integration --------------------------------------------

// Acceleration samples over one integration step: at the start (right
// limit), the midpoint and the end (left limit), per particle.
struct StepForces {
  std::vector<Vec> start, mid, end;
};

struct Trajectory {
  int dim = 1;
  std::vector<double> times;
  std::vector<double> weights;
  std::vector<std::vector<PhaseState>> states;  // [time][particle]
  std::vector<StepForces> steps;               // [time interval]
  std::string force_tag;
  double dt = 0.0;

  std::size_t particles() const { return weights.size(); }

  DiscreteMeasure measure_at(std::size_t i) const {
    std::vector<Atom> atoms;
    for (std::size_t p = 0; p < particles(); ++p) atoms.push_back({states[i][p], weights[p]});
    return DiscreteMeasure(dim, std::move(atoms));
  }

  // Index of the grid time matching t (relative tolerance 1e-9).
  std::size_t index_of(double t) const {
    const double tol = 1e-9 * (1.0 + std::abs(t));
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (std::abs(times[i] - t) <= tol) return i;
    }
    throw InvalidArgument("probe outside grid: t = " + std::to_string(t));
  }
};

inline Trajectory vlasov_integrate(const DiscreteMeasure& mu0, const ForceField& F, double t0, double t1,
                                   double dt) {
  detail::require(dt > 0.0 && std::isfinite(dt), "vlasov_integrate: dt must be > 0");
  detail::require(t1 > t0, "vlasov_integrate: t1 must exceed t0");
  detail::require(dt < t1 - t0, "vlasov_integrate: dt must be smaller than t1 - t0");

  Trajectory tr;
  tr.dim = mu0.dim();
  tr.force_tag = F.tag;
  tr.dt = dt;
  const double span = t1 - t0;
  const auto nsteps = static_cast<long>(std::ceil(span / dt - 1e-9));
  std::vector<double> grid;
  for (long i = 0; i < nsteps; ++i) grid.push_back(t0 + static_cast<double>(i) * dt);
  grid.push_back(t1);
  for (double b : F.breakpoints) {
    if (b > t0 && b < t1) grid.push_back(b);
  }
  std::sort(grid.begin(), grid.end());
  for (double t : grid) {
    if (tr.times.empty() || t - tr.times.back() > 1e-12 * (1.0 + std::abs(t))) tr.times.push_back(t);
  }
  if (tr.times.back() != t1) tr.times.back() = t1;

  std::vector<PhaseState> cur;
  for (const Atom& a : mu0.atoms()) {
    cur.push_back(a.state);
    tr.weights.push_back(a.weight);
  }
  tr.states.push_back(cur);

  auto force = [&](double t, const Vec& x, const Vec& v, Side side) {
    Vec f = F.eval(t, x, v, side);
    if (f.size() != x.size() || !f.allFinite()) {
      throw InvalidArgument("vlasov_integrate: non-finite force at t = " + std::to_string(t));
    }
    return f;
  };

  for (std::size_t s = 0; s + 1 < tr.times.size(); ++s) {
    const double ta = tr.times[s], tb = tr.times[s + 1], h = tb - ta, tm = ta + 0.5 * h;
    StepForces sf;
    std::vector<PhaseState> next;
    next.reserve(cur.size());
    for (const PhaseState& p : cur) {
      const Vec& x = p.x;
      const Vec& v = p.v;
      const Vec k1v = force(ta, x, v, Side::kRight);
      const Vec k1x = v;
      const Vec k2v = force(tm, x + 0.5 * h * k1x, v + 0.5 * h * k1v, Side::kRight);
      const Vec k2x = v + 0.5 * h * k1v;
      const Vec k3v = force(tm, x + 0.5 * h * k2x, v + 0.5 * h * k2v, Side::kRight);
      const Vec k3x = v + 0.5 * h * k2v;
      const Vec k4v = force(tb, x + h * k3x, v + h * k3v, Side::kLeft);
      const Vec k4x = v + h * k3v;
      PhaseState q(x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
                   v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v));
      const Vec fa = k1v;
      const Vec fb = force(tb, q.x, q.v, Side::kLeft);
      // Midpoint state by cubic Hermite interpolation of the step.
      const Vec xm = 0.5 * (x + q.x) + (h / 8.0) * (v - q.v);
      const Vec vm = 0.5 * (v + q.v) + (h / 8.0) * (fa - fb);
      sf.start.push_back(fa);
      sf.mid.push_back(force(tm, xm, vm, Side::kRight));
      sf.end.push_back(fb);
      next.push_back(std::move(q));
    }
    tr.steps.push_back(std::move(sf));
    cur = std::move(next);
    tr.states.push_back(cur);
  }
  return tr;
}

// ---- quadrature of force functionals ------------------------------------------

namespace detail {

inline double l2_norm(const std::vector<Vec>& f, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) s += w[p] * f[p].squaredNorm();
  return std::sqrt(s);
}

inline void require_forces(const Trajectory& tr) {
  if (tr.steps.size() + 1 != tr.times.size()) throw InvalidArgument("trajectory: missing force samples");
}

}  // namespace detail

// (t1 - t0) * int ||F_t||^2_{L^2(mu_t)} dt, Simpson's rule per step.
inline double path_action(const Trajectory& tr) {
  detail::require_forces(tr);
  double integral = 0.0;
  for (std::size_t s = 0; s < tr.steps.size(); ++s) {
    const double h = tr.times[s + 1] - tr.times[s];
    const double fa = std::pow(detail::l2_norm(tr.steps[s].start, tr.weights), 2);
    const double fm = std::pow(detail::l2_norm(tr.steps[s].mid, tr.weights), 2);
    const double fb = std::pow(detail::l2_norm(tr.steps[s].end, tr.weights), 2);
    integral += h / 6.0 * (fa + 4.0 * fm + fb);
  }
  return (tr.times.back() - tr.times.front()) * integral;
}

// int_{t_i}^{t_j} ||F_r||_{L^2(mu_r)} dr between grid indices i <= j.
inline double force_l1(const Trajectory& tr, std::size_t i, std::size_t j) {
  detail::require_forces(tr);
  detail::require(i <= j && j < tr.times.size(), "force_l1: bad index range");
  double s = 0.0;
  for (std::size_t k = i; k < j; ++k) {
    const double h = tr.times[k + 1] - tr.times[k];
    s += h / 6.0 *
         (detail::l2_norm(tr.steps[k].start, tr.weights) + 4.0 * detail::l2_norm(tr.steps[k].mid, tr.weights) +
          detail::l2_norm(tr.steps[k].end, tr.weights));
  }
  return s;
}

inline double force_l1(const Trajectory& tr) { return force_l1(tr, 0, tr.times.size() - 1); }

// ||F_t||_{L^2(mu_t)} at grid index i (right limit, except at the final time).
inline double force_norm_at(const Trajectory& tr, std::size_t i) {
  detail::require_forces(tr);
  if (i < tr.steps.size()) return detail::l2_norm(tr.steps[i].start, tr.weights);
  return detail::l2_norm(tr.steps.back().end, tr.weights);
}

// ---- moment estimates ---------------------------------------------------------

struct MomentRow {
  double t;
  double v_norm, v_bound;
  double x_norm, x_bound_velocity, x_bound_force;
  double slack;
  bool ok;
};

struct MomentReport {
  std::vector<MomentRow> rows;
  double worst_excess = -std::numeric_limits<double>::infinity();  // max lhs - bound - slack
  bool ok = true;
};

// Checks, at every grid time t,
//   ||v||_t <= ||v||_a + int_a^t ||F||,
//   ||x||_t <= ||x||_a + int_a^t ||v||  <=  ||x||_a + (t-a)||v||_a + int_a^t (t-s)||F_s|| ds,
// with discretisation slack 10 dt^2 times the scale of the bound.
inline MomentReport moment_report(const Trajectory& tr) {
  detail::require_forces(tr);
  const std::size_t nt = tr.times.size();
  auto norms = [&](std::size_t i) {
    double xs = 0.0, vs = 0.0;
    for (std::size_t p = 0; p < tr.particles(); ++p) {
      xs += tr.weights[p] * tr.states[i][p].x.squaredNorm();
      vs += tr.weights[p] * tr.states[i][p].v.squaredNorm();
    }
    return std::make_pair(std::sqrt(xs), std::sqrt(vs));
  };
  const auto [x0, v0] = norms(0);
  const double a = tr.times.front();
  MomentReport rep;
  double int_F = 0.0, int_v = 0.0, int_sF = 0.0;  // int F, int v, int s F
  double v_prev = v0;
  for (std::size_t i = 0; i < nt; ++i) {
    const auto [xi, vi] = norms(i);
    if (i > 0) {
      const double ta = tr.times[i - 1], tb = tr.times[i], h = tb - ta, tm = 0.5 * (ta + tb);
      const double fa = detail::l2_norm(tr.steps[i - 1].start, tr.weights);
      const double fm = detail::l2_norm(tr.steps[i - 1].mid, tr.weights);
      const double fb = detail::l2_norm(tr.steps[i - 1].end, tr.weights);
      int_F += h / 6.0 * (fa + 4.0 * fm + fb);
      int_sF += h / 6.0 * (ta * fa + 4.0 * tm * fm + tb * fb);
      int_v += 0.5 * h * (v_prev + vi);
    }
    v_prev = vi;
    const double t = tr.times[i];
    MomentRow row;
    row.t = t;
    row.v_norm = vi;
    row.v_bound = v0 + int_F;
    row.x_norm = xi;
    row.x_bound_velocity = x0 + int_v;
    row.x_bound_force = x0 + (t - a) * v0 + (t * int_F - int_sF);
    const double scale = std::max({1.0, row.v_bound, row.x_bound_force});
    row.slack = 10.0 * tr.dt * tr.dt * scale;
    const double excess = std::max({row.v_norm - row.v_bound, row.x_norm - row.x_bound_velocity,
                                    row.x_bound_velocity - row.x_bound_force, row.x_norm - row.x_bound_force}) -
                          row.slack;
    row.ok = excess <= 0.0;
    rep.worst_excess = std::max(rep.worst_excess, excess);
    rep.ok = rep.ok && row.ok;
    rep.rows.push_back(row);
  }
  return rep;
}

// ---- physicality upper bound ----------------------------------------------------

struct PhysicalityRow {
  std::size_t i, j;
  double tilde_d;      // d~_{t-s}(mu_s, mu_t)
  double bound;        // 2 int_s^t ||F||
  double slack;
  bool ok;
};

// d~_{t-s}(mu_s, mu_t) <= 2 int_s^t ||F_r|| dr at the given grid index pairs.
inline std::vector<PhysicalityRow> physicality_check(const Trajectory& tr,
                                                     const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<PhysicalityRow> rows;
  for (const auto& [i, j] : pairs) {
    detail::require(i < j && j < tr.times.size(), "physicality_check: bad index pair");
    const SolveResult r = solve_fixed_T(tr.measure_at(i), tr.measure_at(j), tr.times[j] - tr.times[i]);
    PhysicalityRow row{i, j, std::sqrt(r.cost_sq), 2.0 * force_l1(tr, i, j), 0.0, false};
    row.slack = 1e-8 + 10.0 * tr.dt * tr.dt * std::max(1.0, row.bound);
    row.ok = row.tilde_d <= row.bound + row.slack;
    rows.push_back(row);
  }
  return rows;
}

// ---- probes -------------------------------------------------------------------

struct MetricProbeRow {
  double h;
  double ratio_tilde;  // d~_h(mu_t, mu_{t+h}) / h
  double ratio_d;      // d(mu_t, mu_{t+h}) / h
  double force_norm;   // ||F_t||_{L^2(mu_t)}
};

inline std::vector<MetricProbeRow> metric_derivative_probe(const Trajectory& tr, double t,
                                                           const std::vector<double>& h_list,
                                                           const SolverOptions& opts = {}) {
  const std::size_t i = tr.index_of(t);
  const DiscreteMeasure mt = tr.measure_at(i);
  const double fn = force_norm_at(tr, i);
  std::vector<MetricProbeRow> rows;
  for (double h : h_list) {
    detail::require(h > 0.0, "metric_derivative_probe: increments must be positive");
    const std::size_t j = tr.index_of(tr.times[i] + h);
    const double hh = tr.times[j] - tr.times[i];
    const DiscreteMeasure mh = tr.measure_at(j);
    const double dt_sq = solve_fixed_T(mt, mh, hh).cost_sq;
    const double d_sq_val = solve_d(mt, mh, opts).cost_sq;
    rows.push_back({h, std::sqrt(dt_sq) / hh, std::sqrt(d_sq_val) / hh, fn});
  }
  return rows;
}

struct TimeRatioRow {
  double h;
  OptimalTime::Kind kind;
  double T_ratio;           // T_{t,t+h} / h, only for Finite
  double second_order;      // (T_{t,t+h} - h) / h^2, only for Finite
  double mean_velocity;     // |<v>_t|
  double velocity_l2;       // ||v||_{L^2(mu_t)}
};

inline std::vector<TimeRatioRow> optimal_time_ratio_probe(const Trajectory& tr, double t,
                                                          const std::vector<double>& h_list,
                                                          const SolverOptions& opts = {}) {
  const std::size_t i = tr.index_of(t);
  const DiscreteMeasure mt = tr.measure_at(i);
  Vec mean = Vec::Zero(tr.dim);
  double vl2 = 0.0;
  for (const Atom& a : mt.atoms()) {
    mean += a.weight * a.state.v;
    vl2 += a.weight * a.state.v.squaredNorm();
  }
  std::vector<TimeRatioRow> rows;
  for (double h : h_list) {
    detail::require(h > 0.0, "optimal_time_ratio_probe: increments must be positive");
    const std::size_t j = tr.index_of(tr.times[i] + h);
    const double hh = tr.times[j] - tr.times[i];
    const SolveResult r = solve_d(mt, tr.measure_at(j), opts);
    TimeRatioRow row{h, r.optimal_time.kind(), std::numeric_limits<double>::quiet_NaN(),
                     std::numeric_limits<double>::quiet_NaN(), mean.norm(), std::sqrt(vl2)};
    if (r.optimal_time.is_finite()) {
      row.T_ratio = r.optimal_time.value() / hh;
      row.second_order = (r.optimal_time.value() - hh) / (hh * hh);
    }
    rows.push_back(row);
  }
  return rows;
}

// ---- reparametrisation ----------------------------------------------------------

// Time change mu~_s = mu_{tau(s)} with tau' = lambda(s) > 0; forces become
// lambda(s) F_{tau(s)}. The new grid solves ds/dt = 1 / lambda(s(t)) by RK4
// on the old grid, with the step midpoints tracked for the force samples.
inline Trajectory reparametrize(const Trajectory& tr, const std::function<double(double)>& lambda) {
  detail::require_forces(tr);
  auto lam = [&](double s) {
    const double l = lambda(s);
    if (!(l > 0.0) || !std::isfinite(l)) throw InvalidArgument("reparametrize: lambda must be positive");
    return l;
  };
  auto rk4 = [&](double s, double h) {
    const double k1 = 1.0 / lam(s);
    const double k2 = 1.0 / lam(s + 0.5 * h * k1);
    const double k3 = 1.0 / lam(s + 0.5 * h * k2);
    const double k4 = 1.0 / lam(s + h * k3);
    return s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  Trajectory out = tr;
  out.force_tag = tr.force_tag + "+reparametrized";
  const double s0 = tr.times.front();  // tau(s0) = t0
  out.times[0] = s0;
  double dt_max = 0.0;
  for (std::size_t k = 0; k + 1 < tr.times.size(); ++k) {
    const double h = tr.times[k + 1] - tr.times[k];
    const double sa = out.times[k];
    const double sm = rk4(sa, 0.5 * h);
    const double sb = rk4(sa, h);
    out.times[k + 1] = sb;
    dt_max = std::max(dt_max, sb - sa);
    const double la = lam(sa), lm = lam(sm), lb = lam(sb);
    StepForces& sf = out.steps[k];
    for (auto& f : sf.start) f *= la;
    for (auto& f : sf.mid) f *= lm;
    for (auto& f : sf.end) f *= lb;
  }
  out.dt = dt_max;
  return out;
}

}  // namespace otikin

#endif  // OTIKIN_DYNAMICS_HPP_
