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

// Exact linear optimal transport between finite marginals.
//
// Two backends, both returning extreme points of the transportation
// polytope:
//  - solve_assignment: O(n^3) shortest augmenting path (potentials) for the
//    square uniform case;
//  - solve_transport: primal transportation simplex (MODI / u-v method) on a
//    spanning-tree basis, started from the northwest corner rule.

#ifndef OTIKIN_TRANSPORT_LP_HPP_
#define OTIKIN_TRANSPORT_LP_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "otikin/error.hpp"

namespace otikin {

struct TransportSolution {
  Eigen::MatrixXd plan;
  double cost = 0.0;
  int pivots = 0;
};

// Minimum-cost perfect matching on a square cost matrix; returns the column
// assigned to each row.
inline std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  detail::require(n >= 1 && cost.cols() == n, "solve_assignment: cost must be square and nonempty");
  detail::require(cost.allFinite(), "solve_assignment: non-finite cost");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based arrays with a virtual column 0, as in the classical formulation.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (j1 == 0) throw SolverError("solve_assignment: no augmenting path");
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

namespace detail {

// Basis of the transportation simplex: m + k - 1 cells forming a spanning
// tree of the bipartite row/column graph (degenerate zero flows included).
class TransportBasis {
 public:
  TransportBasis(int m, int k) : m_(m), k_(k), basic_(m, k), flow_(Eigen::MatrixXd::Zero(m, k)) {
    basic_.setZero();
  }

  void add(int i, int j, double f) {
    basic_(i, j) = 1;
    flow_(i, j) = f;
    cells_.emplace_back(i, j);
  }

  void remove(int i, int j) {
    basic_(i, j) = 0;
    flow_(i, j) = 0.0;
    cells_.erase(std::find(cells_.begin(), cells_.end(), std::make_pair(i, j)));
  }

  bool is_basic(int i, int j) const { return basic_(i, j) != 0; }
  double& flow(int i, int j) { return flow_(i, j); }
  const Eigen::MatrixXd& flows() const { return flow_; }
  const std::vector<std::pair<int, int>>& cells() const { return cells_; }

  // Node ids: rows 0..m-1, columns m..m+k-1.
  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(m_ + k_);
    for (const auto& [i, j] : cells_) {
      adj[i].push_back(m_ + j);
      adj[m_ + j].push_back(i);
    }
    return adj;
  }

 private:
  int m_, k_;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> basic_;
  Eigen::MatrixXd flow_;
  std::vector<std::pair<int, int>> cells_;
};

}  // namespace detail

// Exact minimiser of <P, cost> over nonnegative P with row sums `supply` and
// column sums `demand`. The two totals must agree to 1e-9 relative.
inline TransportSolution solve_transport(const Eigen::VectorXd& supply,
                                         const Eigen::VectorXd& demand,
                                         const Eigen::MatrixXd& cost) {
  const int m = static_cast<int>(supply.size());
  const int k = static_cast<int>(demand.size());
  detail::require(m >= 1 && k >= 1, "solve_transport: empty marginal");
  detail::require(cost.rows() == m && cost.cols() == k, "solve_transport: cost shape mismatch");
  detail::require(cost.allFinite(), "solve_transport: non-finite cost");
  detail::require((supply.array() >= 0.0).all() && (demand.array() >= 0.0).all(),
                  "solve_transport: negative marginal mass");
  const double total = supply.sum();
  if (std::abs(total - demand.sum()) > 1e-9 * std::max(1.0, total)) {
    throw SolverError("solve_transport: infeasible (marginal totals differ)");
  }

  detail::TransportBasis basis(m, k);

  // Northwest corner start. On a tie both residuals vanish and the walk
  // moves along one axis only, so the next cell enters with zero flow; this
  // keeps exactly m + k - 1 basic cells.
  {
    Eigen::VectorXd a = supply, b = demand;
    const double tie = 1e-14 * std::max(1.0, total);
    int i = 0, j = 0;
    while (true) {
      const double q = std::min(a(i), b(j));
      basis.add(i, j, q);
      a(i) -= q;
      b(j) -= q;
      if (i == m - 1 && j == k - 1) break;
      if (i == m - 1) {
        ++j;
      } else if (j == k - 1) {
        ++i;
      } else if (a(i) <= tie) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  const double cscale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const double rc_tol = 1e-12 * cscale;
  const int max_pivots = 50 * (m + k) * (m + k) + 1000;
  int degenerate_streak = 0;
  bool bland = false;
  int pivots = 0;

  Eigen::VectorXd u(m), v(k);
  std::vector<int> parent(m + k);
  std::vector<char> seen(m + k);

  while (true) {
    const auto adj = basis.adjacency();

    // Potentials u_i + v_j = c_ij on basic cells, by BFS from row 0.
    std::fill(seen.begin(), seen.end(), 0);
    std::queue<int> bfs;
    bfs.push(0);
    seen[0] = 1;
    u(0) = 0.0;
    int reached = 1;
    while (!bfs.empty()) {
      const int node = bfs.front();
      bfs.pop();
      for (int nb : adj[node]) {
        if (seen[nb]) continue;
        seen[nb] = 1;
        ++reached;
        if (node < m) {
          v(nb - m) = cost(node, nb - m) - u(node);
        } else {
          u(nb) = cost(nb, node - m) - v(node - m);
        }
        bfs.push(nb);
      }
    }
    if (reached != m + k) throw SolverError("solve_transport: basis is not a spanning tree");

    // Entering cell: Dantzig (most negative reduced cost), or Bland (first
    // negative in row-major order) once degeneracy has stalled progress.
    int ei = -1, ej = -1;
    double best = -rc_tol;
    for (int i = 0; i < m && !(bland && ei >= 0); ++i) {
      for (int j = 0; j < k; ++j) {
        if (basis.is_basic(i, j)) continue;
        const double r = cost(i, j) - u(i) - v(j);
        if (r < best) {
          best = r;
          ei = i;
          ej = j;
          if (bland) break;
        }
      }
    }
    if (ei < 0) break;

    if (++pivots > max_pivots) throw SolverError("solve_transport: pivot limit exceeded");

    // Tree path from row ei to column ej; with the entering cell it closes
    // the unique cycle. Path edges alternate -, +, -, ... starting from ej.
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(seen.begin(), seen.end(), 0);
    bfs.push(ei);
    seen[ei] = 1;
    while (!bfs.empty()) {
      const int node = bfs.front();
      bfs.pop();
      for (int nb : adj[node]) {
        if (seen[nb]) continue;
        seen[nb] = 1;
        parent[nb] = node;
        bfs.push(nb);
      }
    }
    std::vector<std::pair<int, int>> minus_cells, plus_cells;
    {
      int node = m + ej;
      bool minus = true;
      while (node != ei) {
        const int up = parent[node];
        const std::pair<int, int> cell =
            node < m ? std::make_pair(node, up - m) : std::make_pair(up, node - m);
        (minus ? minus_cells : plus_cells).push_back(cell);
        minus = !minus;
        node = up;
      }
    }
    double theta = std::numeric_limits<double>::infinity();
    std::pair<int, int> leaving{-1, -1};
    for (const auto& c : minus_cells) {
      const double f = basis.flow(c.first, c.second);
      if (f < theta || (f == theta && c < leaving)) {
        theta = f;
        leaving = c;
      }
    }
    theta = std::max(theta, 0.0);
    for (const auto& c : minus_cells) basis.flow(c.first, c.second) -= theta;
    for (const auto& c : plus_cells) basis.flow(c.first, c.second) += theta;
    basis.remove(leaving.first, leaving.second);
    basis.add(ei, ej, theta);

    if (theta <= 0.0) {
      if (++degenerate_streak > m + k) bland = true;
    } else {
      degenerate_streak = 0;
      bland = false;
    }
  }

  TransportSolution out;
  out.plan = basis.flows().cwiseMax(0.0);
  out.cost = (out.plan.array() * cost.array()).sum();
  out.pivots = pivots;
  return out;
}

namespace detail {

inline bool is_uniform(const Eigen::VectorXd& w) {
  const double w0 = w(0);
  return ((w.array() - w0).abs() <= 1e-12 * w0).all();
}

}  // namespace detail

// Dispatches to the assignment solver when both marginals are uniform with
// equal counts, otherwise to the transportation simplex.
inline TransportSolution solve_transport_auto(const Eigen::VectorXd& supply,
                                              const Eigen::VectorXd& demand,
                                              const Eigen::MatrixXd& cost) {
  const Eigen::Index m = supply.size();
  if (m >= 1 && m == demand.size() && detail::is_uniform(supply) && detail::is_uniform(demand)) {
    detail::require(cost.rows() == m && cost.cols() == m, "solve_transport: cost shape mismatch");
    const std::vector<int> perm = solve_assignment(cost);
    TransportSolution out;
    out.plan = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) out.plan(i, perm[i]) = supply(i);
    out.cost = (out.plan.array() * cost.array()).sum();
    return out;
  }
  return solve_transport(supply, demand, cost);
}

}  // namespace otikin

#endif  // OTIKIN_TRANSPORT_LP_HPP_
