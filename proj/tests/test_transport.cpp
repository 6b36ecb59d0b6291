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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "otikin/random.hpp"
#include "otikin/transport_lp.hpp"

namespace otikin {
namespace {

// Independent oracle: minimum over all vertices, each obtained by solving the
// square linear system of marginal constraints restricted to m + k - 1 cells.
double vertex_enumeration_min(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& C) {
  const int m = static_cast<int>(a.size()), k = static_cast<int>(b.size());
  const int cells = m * k, pick = m + k - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> mask(cells, 0);
  std::fill(mask.begin(), mask.begin() + pick, 1);
  std::sort(mask.begin(), mask.end());
  do {
    std::vector<int> chosen;
    for (int c = 0; c < cells; ++c) {
      if (mask[c]) chosen.push_back(c);
    }
    // Row constraints, then column constraints minus one (redundant).
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(pick, pick);
    Eigen::VectorXd rhs(pick);
    for (int i = 0; i < m; ++i) rhs(i) = a(i);
    for (int j = 0; j < k - 1; ++j) rhs(m + j) = b(j);
    for (int q = 0; q < pick; ++q) {
      const int i = chosen[q] / k, j = chosen[q] % k;
      M(i, q) = 1.0;
      if (j < k - 1) M(m + j, q) = 1.0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.rank() < pick) continue;
    const Eigen::VectorXd f = lu.solve(rhs);
    if (f.minCoeff() < -1e-12) continue;
    double cost = 0.0;
    for (int q = 0; q < pick; ++q) cost += f(q) * C(chosen[q] / k, chosen[q] % k);
    best = std::min(best, cost);
  } while (std::next_permutation(mask.begin(), mask.end()));
  return best;
}

Eigen::VectorXd random_simplex(Rng& rng, int m) {
  Eigen::VectorXd w(m);
  for (int i = 0; i < m; ++i) w(i) = rng.uniform(0.1, 1.0);
  return w / w.sum();
}

void expect_feasible(const Eigen::MatrixXd& P, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  EXPECT_GE(P.minCoeff(), 0.0);
  EXPECT_LT((P.rowwise().sum() - a).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((P.colwise().sum().transpose() - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Simplex, MatchesVertexEnumeration) {
  Rng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 1 + trial % 3, k = 1 + (trial / 3) % 4;
    const Eigen::VectorXd a = random_simplex(rng, m), b = random_simplex(rng, k);
    Eigen::MatrixXd C(m, k);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < k; ++j) C(i, j) = rng.uniform(-1, 3);
    }
    const TransportSolution s = solve_transport(a, b, C);
    expect_feasible(s.plan, a, b);
    EXPECT_NEAR(s.cost, vertex_enumeration_min(a, b, C), 1e-12);
  }
}

TEST(Simplex, DegenerateUniformMarginals) {
  // Equal masses make every northwest-corner step a tie.
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 2 + trial % 3;
    const Eigen::VectorXd a = Eigen::VectorXd::Constant(m, 1.0 / m);
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(m + 1, 1.0 / (m + 1));
    Eigen::MatrixXd C(m, m + 1);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j <= m; ++j) C(i, j) = static_cast<double>(rng.uniform_int(0, 3));  // many ties
    }
    const TransportSolution s = solve_transport(a, b, C);
    expect_feasible(s.plan, a, b);
    EXPECT_NEAR(s.cost, vertex_enumeration_min(a, b, C), 1e-12);
    // Vertex: support of at most m + k - 1 cells.
    EXPECT_LE((s.plan.array() > 1e-15).count(), 2 * m);
  }
}

TEST(Simplex, LargerInstanceBeatsRandomCouplings) {
  Rng rng(31);
  const int m = 40, k = 35;
  const Eigen::VectorXd a = random_simplex(rng, m), b = random_simplex(rng, k);
  Eigen::MatrixXd C(m, k);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j) C(i, j) = rng.normal();
  }
  const TransportSolution s = solve_transport(a, b, C);
  expect_feasible(s.plan, a, b);
  const double product = (a * b.transpose()).cwiseProduct(C).sum();
  EXPECT_LE(s.cost, product);
}

TEST(Simplex, RejectsBadInput) {
  Eigen::VectorXd a(2), b(2);
  a << 0.5, 0.5;
  b << 0.5, 0.6;
  EXPECT_THROW(solve_transport(a, b, Eigen::MatrixXd::Zero(2, 2)), SolverError);
  b << 0.5, 0.5;
  EXPECT_THROW(solve_transport(a, b, Eigen::MatrixXd::Zero(3, 2)), InvalidArgument);
}

TEST(Assignment, MatchesPermutationEnumeration) {
  Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 7;
    Eigen::MatrixXd C(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) C(i, j) = rng.uniform(-2, 2);
    }
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (int i = 0; i < n; ++i) c += C(i, perm[i]);
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const std::vector<int> got = solve_assignment(C);
    double c = 0.0;
    std::vector<int> seen(n, 0);
    for (int i = 0; i < n; ++i) {
      c += C(i, got[i]);
      ++seen[got[i]];
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
    EXPECT_NEAR(c, best, 1e-12);
  }
}

TEST(Auto, AgreesAcrossBackends) {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 9;
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
    Eigen::MatrixXd C(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) C(i, j) = rng.normal();
    }
    EXPECT_NEAR(solve_transport_auto(w, w, C).cost, solve_transport(w, w, C).cost, 1e-12);
  }
}

}  // namespace
}  // namespace otikin
