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

// Plan-level costs and the measure-level discrepancies.
//
// For a coupling with moments (A, B, C, D):
//   c~_T = 12 A / T^2 - 12 B / T + 3 C + D,
//   c~   = inf_T c~_T = 3 C - 3 (B_+)^2 / A + D     (A > 0),  3 C + D (A = 0),
//   c    = c~ (A > 0),  D (A = 0).
// c~ is concave in the coupling, so its minimum sits at a vertex of the
// transportation polytope. solve_d searches vertices by alternating an exact
// fixed-T LP with the closed-form optimal horizon, from several starting
// horizons, and compares against the equal-positions and infinite-horizon
// candidates.

#ifndef OTIKIN_SOLVER_HPP_
#define OTIKIN_SOLVER_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "otikin/error.hpp"
#include "otikin/measures.hpp"
#include "otikin/phase.hpp"
#include "otikin/transport_lp.hpp"

namespace otikin {

enum class Regime { kEqualPositions, kFiniteT, kInfiniteT, kFixedT };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::kEqualPositions: return "equal_positions";
    case Regime::kFiniteT: return "finite_T";
    case Regime::kInfiniteT: return "infinite_T";
    case Regime::kFixedT: return "fixed_T";
  }
  return "unknown";
}

struct SolverOptions {
  // Starting horizons; empty means the default log grid. The product
  // coupling's optimal horizon is always appended when finite.
  std::vector<double> T_grid;
  int max_alt_iters = 50;
  double cost_tol = 1e-10;
  int oracle_cap = 8;
  int threads = 1;

  static std::vector<double> default_T_grid() {
    std::vector<double> g;
    for (int i = 0; i < 15; ++i) g.push_back(std::pow(10.0, -2.0 + 4.0 * i / 14.0));
    return g;
  }
};

struct SolveResult {
  double cost_sq = 0.0;
  OptimalTime optimal_time = OptimalTime::zero();
  Regime regime = Regime::kFixedT;
  Coupling plan{Eigen::MatrixXd()};
  PlanMoments moments;
  int iterations = 0;
  int restarts_used = 0;
  bool budget_exhausted = false;
  // c~ along each alternating run, one trace per starting horizon.
  std::vector<std::vector<double>> descent_traces;
};

// ---- plan costs -----------------------------------------------------------

namespace detail {

inline double epsilon_A(const PlanMoments& m) { return 1e-14 * (1.0 + m.scale_sq); }

}  // namespace detail

inline double cost_tilde_c_T(const PlanMoments& m, double T) {
  detail::require(T > 0.0, "cost_tilde_c_T: horizon must be > 0");
  return 12.0 * m.A / (T * T) - 12.0 * m.B / T + 3.0 * m.C + m.D;
}

inline double cost_tilde_c(const PlanMoments& m) {
  if (m.A <= detail::epsilon_A(m)) return 3.0 * m.C + m.D;
  const double bp = std::max(m.B, 0.0);
  return std::max(0.0, 3.0 * m.C - 3.0 * bp * bp / m.A) + m.D;
}

inline double cost_c(const PlanMoments& m) {
  if (m.A <= detail::epsilon_A(m)) return m.D;
  return cost_tilde_c(m);
}

inline OptimalTime optimal_time_plan(const PlanMoments& m) {
  if (m.A <= detail::epsilon_A(m)) return OptimalTime::zero();
  if (m.B > 0.0) return OptimalTime::finite(2.0 * m.A / m.B);
  return OptimalTime::infinite();
}

// ---- helpers --------------------------------------------------------------

namespace detail {

template <typename CostFn>
Eigen::MatrixXd cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu, CostFn&& f) {
  Eigen::MatrixXd C(mu.size(), nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) C(i, j) = f(mu[i].state, nu[j].state);
  }
  return C;
}

inline Coupling lp_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Eigen::MatrixXd& C) {
  return Coupling(solve_transport_auto(mu.weights(), nu.weights(), C).plan);
}

// Runs fn(0..n-1) on up to `threads` workers; results land by index so the
// merge order never depends on scheduling.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, int threads, Fn&& fn) {
  std::vector<std::optional<T>> slots(n);
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) slots[i].emplace(fn(i));
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) slots[i].emplace(fn(i));
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline double position_tolerance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return 1e-12 * (1.0 + mu.position_scale() + nu.position_scale());
}

// Optimal plan restricted to pairs sharing a spatial site, with cost
// |w - v|^2. Requires the spatial marginals to coincide.
inline Coupling equal_positions_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double tol) {
  WeightedPoints both = spatial_marginal(mu);
  const WeightedPoints sn = spatial_marginal(nu);
  both.points.insert(both.points.end(), sn.points.begin(), sn.points.end());
  both.weights.insert(both.weights.end(), sn.weights.begin(), sn.weights.end());
  const CollapsedSites sites = collapse_sites(both, tol);
  const std::size_t m = mu.size();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, nu.size());
  for (std::size_t s = 0; s < sites.sites.size(); ++s) {
    std::vector<std::size_t> rows, cols;
    for (std::size_t i = 0; i < m; ++i) {
      if (sites.site_of[i] == static_cast<int>(s)) rows.push_back(i);
    }
    for (std::size_t j = 0; j < nu.size(); ++j) {
      if (sites.site_of[m + j] == static_cast<int>(s)) cols.push_back(j);
    }
    if (rows.empty() || cols.empty()) throw SolverError("equal_positions_plan: spatial marginals differ");
    Eigen::VectorXd a(rows.size()), b(cols.size());
    Eigen::MatrixXd C(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) a(r) = mu[rows[r]].weight;
    for (std::size_t c = 0; c < cols.size(); ++c) b(c) = nu[cols[c]].weight;
    // Site masses agree within 1e-9; make them agree exactly for the LP.
    b *= a.sum() / b.sum();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        C(r, c) = (nu[cols[c]].state.v - mu[rows[r]].state.v).squaredNorm();
      }
    }
    const Eigen::MatrixXd Ps = solve_transport_auto(a, b, C).plan;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) P(rows[r], cols[c]) = Ps(r, c);
    }
  }
  return Coupling(std::move(P));
}

inline Regime regime_for(const OptimalTime& t) {
  if (t.is_finite()) return Regime::kFiniteT;
  if (t.is_infinite()) return Regime::kInfiniteT;
  return Regime::kEqualPositions;
}

}  // namespace detail

// ---- fixed horizon ----------------------------------------------------------

inline SolveResult solve_fixed_T(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double T) {
  detail::require(T > 0.0 && std::isfinite(T), "solve_fixed_T: horizon must be > 0");
  detail::require(mu.dim() == nu.dim(), "solve_fixed_T: dimension mismatch");
  const Eigen::MatrixXd C = detail::cost_matrix(
      mu, nu, [T](const PhaseState& a, const PhaseState& b) { return tilde_dT_sq(a, b, T); });
  SolveResult r;
  r.plan = detail::lp_plan(mu, nu, C);
  r.moments = plan_moments(mu, nu, r.plan);
  r.cost_sq = std::max(0.0, cost_tilde_c_T(r.moments, T));
  r.optimal_time = OptimalTime::finite(T);
  r.regime = Regime::kFixedT;
  r.iterations = 1;
  return r;
}

// ---- d and d~ ---------------------------------------------------------------

namespace detail {

struct Candidate {
  Coupling plan;
  PlanMoments moments;
  Regime origin;
};

struct AltRun {
  std::vector<Candidate> visited;
  std::vector<double> trace;
  int iterations = 0;
  bool exhausted = false;
};

inline AltRun alternate(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double T0,
                        const SolverOptions& opts) {
  AltRun run;
  double T = T0;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    if (it >= opts.max_alt_iters) {
      run.exhausted = true;
      break;
    }
    SolveResult step = solve_fixed_T(mu, nu, T);
    ++run.iterations;
    const double val = cost_tilde_c(step.moments);
    run.trace.push_back(val);
    const OptimalTime next = optimal_time_plan(step.moments);
    run.visited.push_back({step.plan, step.moments, Regime::kFiniteT});
    if (!next.is_finite()) break;
    if (prev - val < opts.cost_tol * (1.0 + std::abs(prev)) && it > 0) break;
    prev = val;
    T = next.value();
  }
  return run;
}

enum class Objective { kD, kTildeD };

inline double objective(Objective o, const PlanMoments& m) {
  return o == Objective::kD ? cost_c(m) : cost_tilde_c(m);
}

inline SolveResult solve_discrepancy(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     const SolverOptions& opts, Objective obj) {
  detail::require(mu.dim() == nu.dim(), "solve: dimension mismatch");
  detail::require(opts.max_alt_iters >= 1 && opts.cost_tol > 0.0, "solve: invalid solver options");

  std::vector<Candidate> cands;
  SolveResult result;

  // (1) equal spatial marginals.
  const double tol = position_tolerance(mu, nu);
  if (same_weighted_point_set(spatial_marginal(mu), spatial_marginal(nu), tol)) {
    Coupling P = equal_positions_plan(mu, nu, tol);
    PlanMoments mo = plan_moments(mu, nu, P);
    cands.push_back({std::move(P), mo, Regime::kEqualPositions});
  }

  // (2) alternating minimisation from each starting horizon.
  std::vector<double> grid = opts.T_grid.empty() ? SolverOptions::default_T_grid() : opts.T_grid;
  const OptimalTime prod_T = optimal_time_plan(plan_moments(mu, nu, product_coupling(mu, nu)));
  if (prod_T.is_finite()) grid.push_back(prod_T.value());
  for (double T : grid) detail::require(T > 0.0 && std::isfinite(T), "solve: T_grid entries must be > 0");
  std::vector<AltRun> runs =
      parallel_map<AltRun>(grid.size(), opts.threads, [&](std::size_t i) { return alternate(mu, nu, grid[i], opts); });
  for (AltRun& run : runs) {
    result.iterations += run.iterations;
    result.budget_exhausted = result.budget_exhausted || run.exhausted;
    result.descent_traces.push_back(std::move(run.trace));
    for (Candidate& c : run.visited) cands.push_back(std::move(c));
  }
  result.restarts_used = static_cast<int>(grid.size());

  // (3) infinite horizon: linear cost 3|v+w|^2 + |w-v|^2.
  {
    const Eigen::MatrixXd C = cost_matrix(mu, nu, [](const PhaseState& a, const PhaseState& b) {
      return 3.0 * (a.v + b.v).squaredNorm() + (b.v - a.v).squaredNorm();
    });
    Coupling P = lp_plan(mu, nu, C);
    PlanMoments mo = plan_moments(mu, nu, P);
    cands.push_back({std::move(P), mo, Regime::kInfiniteT});
  }

  // First candidate wins ties (deterministic order: equal positions, grid
  // order, infinite horizon).
  std::size_t best = 0;
  double best_val = objective(obj, cands[0].moments);
  for (std::size_t i = 1; i < cands.size(); ++i) {
    const double v = objective(obj, cands[i].moments);
    if (v < best_val - 1e-12 * (1.0 + std::abs(best_val))) {
      best = i;
      best_val = v;
    }
  }
  const Candidate& w = cands[best];
  result.cost_sq = std::max(0.0, best_val);
  result.plan = w.plan;
  result.moments = w.moments;
  result.optimal_time = optimal_time_plan(w.moments);
  result.regime = w.origin == Regime::kEqualPositions ? Regime::kEqualPositions
                                                      : regime_for(result.optimal_time);
  return result;
}

}  // namespace detail

// d^2(mu, nu): minimum of c over couplings.
inline SolveResult solve_d(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const SolverOptions& opts = {}) {
  return detail::solve_discrepancy(mu, nu, opts, detail::Objective::kD);
}

// d~^2(mu, nu): same search evaluated through c~. The infimum over couplings
// of c~ need not be attained; the value returned is then an upper bound.
inline SolveResult solve_tilde_d(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 const SolverOptions& opts = {}) {
  return detail::solve_discrepancy(mu, nu, opts, detail::Objective::kTildeD);
}

// ---- exhaustive oracle -----------------------------------------------------

struct OracleVertex {
  Coupling plan;
  double cost_sq;
  OptimalTime optimal_time;
  std::vector<int> permutation;  // empty for non-uniform instances
};

struct OracleResult {
  SolveResult best;
  std::vector<OracleVertex> optima;  // every vertex attaining the minimum
  std::size_t vertices_enumerated = 0;
};

namespace detail {

// Unique flow on a spanning tree of the bipartite graph, found by peeling
// leaves. Returns nullopt if the tree is infeasible (negative flow).
inline std::optional<Eigen::MatrixXd> tree_flow(const std::vector<std::pair<int, int>>& cells,
                                                Eigen::VectorXd a, Eigen::VectorXd b) {
  const int m = static_cast<int>(a.size());
  const int k = static_cast<int>(b.size());
  std::vector<int> degree(m + k, 0);
  std::vector<char> done(cells.size(), 0);
  for (const auto& [i, j] : cells) {
    ++degree[i];
    ++degree[m + j];
  }
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, k);
  for (std::size_t round = 0; round < cells.size(); ++round) {
    bool progressed = false;
    for (std::size_t e = 0; e < cells.size(); ++e) {
      if (done[e]) continue;
      const auto [i, j] = cells[e];
      double f;
      if (degree[i] == 1) {
        f = a(i);
      } else if (degree[m + j] == 1) {
        f = b(j);
      } else {
        continue;
      }
      if (f < -1e-12) return std::nullopt;
      f = std::max(f, 0.0);
      P(i, j) = f;
      a(i) -= f;
      b(j) -= f;
      --degree[i];
      --degree[m + j];
      done[e] = 1;
      progressed = true;
      break;
    }
    if (!progressed) return std::nullopt;
  }
  if (a.cwiseAbs().maxCoeff() > 1e-9 || b.cwiseAbs().maxCoeff() > 1e-9) return std::nullopt;
  return P;
}

inline bool is_spanning_tree(const std::vector<std::pair<int, int>>& cells, int m, int k) {
  std::vector<int> parent(m + k);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (const auto& [i, j] : cells) {
    const int ri = find(i), rj = find(m + j);
    if (ri == rj) return false;
    parent[ri] = rj;
  }
  return true;
}

}  // namespace detail

// Global minimum of c by enumerating vertices of the transportation
// polytope: permutations when both measures are uniform of equal size
// m <= oracle_cap, otherwise spanning-tree basic solutions when m + k <= oracle_cap.
inline OracleResult brute_force_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       const SolverOptions& opts = {}) {
  detail::require(mu.dim() == nu.dim(), "brute_force_oracle: dimension mismatch");
  const int m = static_cast<int>(mu.size());
  const int k = static_cast<int>(nu.size());
  const Eigen::VectorXd a = mu.weights(), b = nu.weights();
  const bool uniform = m == k && detail::is_uniform(a) && detail::is_uniform(b);

  std::vector<OracleVertex> verts;
  if (uniform && m <= opts.oracle_cap) {
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) P(i, perm[i]) = a(i);
      Coupling C(std::move(P));
      const PlanMoments mo = plan_moments(mu, nu, C);
      verts.push_back({std::move(C), cost_c(mo), optimal_time_plan(mo), perm});
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else if (m + k <= opts.oracle_cap) {
    // Choose m + k - 1 of the m * k cells; keep spanning trees with a
    // nonnegative flow.
    const int cells_total = m * k;
    const int pick = m + k - 1;
    std::vector<int> idx(pick);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      std::vector<std::pair<int, int>> cells;
      for (int c : idx) cells.emplace_back(c / k, c % k);
      if (detail::is_spanning_tree(cells, m, k)) {
        if (auto P = detail::tree_flow(cells, a, b)) {
          Coupling C(std::move(*P));
          const PlanMoments mo = plan_moments(mu, nu, C);
          verts.push_back({std::move(C), cost_c(mo), optimal_time_plan(mo), {}});
        }
      }
      int pos = pick - 1;
      while (pos >= 0 && idx[pos] == cells_total - pick + pos) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int q = pos + 1; q < pick; ++q) idx[q] = idx[q - 1] + 1;
    }
  } else {
    throw InvalidArgument("brute_force_oracle: instance too large for oracle_cap");
  }
  if (verts.empty()) throw SolverError("brute_force_oracle: no feasible vertex found");

  OracleResult out;
  out.vertices_enumerated = verts.size();
  double best = verts.front().cost_sq;
  for (const auto& v : verts) best = std::min(best, v.cost_sq);
  const double tie = 1e-9 * (1.0 + std::abs(best));
  for (auto& v : verts) {
    if (v.cost_sq > best + tie) continue;
    // Degenerate trees can repeat a vertex; keep distinct plans only.
    const bool dup = std::any_of(out.optima.begin(), out.optima.end(), [&](const OracleVertex& o) {
      return (o.plan.matrix() - v.plan.matrix()).cwiseAbs().maxCoeff() <= 1e-12;
    });
    if (!dup) out.optima.push_back(std::move(v));
  }
  const OracleVertex& w = out.optima.front();
  out.best.cost_sq = std::max(0.0, w.cost_sq);
  out.best.plan = w.plan;
  out.best.moments = plan_moments(mu, nu, w.plan);
  out.best.optimal_time = w.optimal_time;
  out.best.regime = detail::regime_for(w.optimal_time);
  out.best.iterations = static_cast<int>(out.vertices_enumerated);
  return out;
}

// ---- zero set ---------------------------------------------------------------

struct FreeTransportMatch {
  enum class Kind { kNone, kFreeTransport, kBothRest };
  Kind kind = Kind::kNone;
  double T = 0.0;
};

// Decides whether nu = (G_T)#mu for some T >= 0 (unique when the velocity
// marginal of mu is not a point mass at 0), or whether both velocity
// marginals are at rest. Candidate horizons come from displacement ratios of
// the fastest atom of mu against the atoms of nu with matching velocity.
inline FreeTransportMatch detect_free_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                double tol) {
  detail::require(tol > 0.0, "detect_free_transport: tolerance must be > 0");
  detail::require(mu.dim() == nu.dim(), "detect_free_transport: dimension mismatch");
  const WeightedPoints target = phase_points(nu);

  std::size_t fast = 0;
  for (std::size_t i = 1; i < mu.size(); ++i) {
    if (mu[i].state.v.norm() > mu[fast].state.v.norm()) fast = i;
  }
  const PhaseState& a = mu[fast].state;
  const double speed_sq = a.v.squaredNorm();

  if (std::sqrt(speed_sq) <= tol) {
    bool nu_rest = true;
    for (const Atom& b : nu.atoms()) nu_rest = nu_rest && b.state.v.norm() <= tol;
    if (!nu_rest) return {};
    if (same_weighted_point_set(phase_points(mu), target, tol)) return {FreeTransportMatch::Kind::kFreeTransport, 0.0};
    return {FreeTransportMatch::Kind::kBothRest, 0.0};
  }

  std::vector<double> candidates;
  for (const Atom& b : nu.atoms()) {
    if ((b.state.v - a.v).norm() > tol) continue;
    const double T = (b.state.x - a.x).dot(a.v) / speed_sq;
    if (T < -tol) continue;
    candidates.push_back(std::max(T, 0.0));
  }
  std::sort(candidates.begin(), candidates.end());
  for (double T : candidates) {
    if (same_weighted_point_set(phase_points(pushforward_free_transport(mu, T)), target, tol)) {
      return {FreeTransportMatch::Kind::kFreeTransport, T};
    }
  }
  return {};
}

}  // namespace otikin

#endif  // OTIKIN_SOLVER_HPP_
