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
#include <cmath>
#include <numeric>

#include "otikin/random.hpp"
#include "otikin/scenarios.hpp"
#include "otikin/solver.hpp"

namespace otikin {
namespace {

PhaseState S(double x, double v) { return PhaseState::scalar(x, v); }

// Direct sum of pointwise costs, no moments involved.
double direct_cost_T(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Eigen::MatrixXd& P, double T) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) s += P(i, j) * tilde_dT_sq(mu[i].state, nu[j].state, T);
  }
  return s;
}

// Minimum of T -> c~_T over a log grid, refined around the best node.
double grid_min_T(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Eigen::MatrixXd& P) {
  double best_T = 1.0, best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2000; ++i) {
    const double T = std::pow(10.0, -3.0 + 7.0 * i / 2000.0);
    const double c = direct_cost_T(mu, nu, P, T);
    if (c < best) {
      best = c;
      best_T = T;
    }
  }
  double lo = best_T / 1.01, hi = best_T * 1.01;
  for (int it = 0; it < 200; ++it) {
    const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
    if (direct_cost_T(mu, nu, P, a) < direct_cost_T(mu, nu, P, b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  return std::min(best, direct_cost_T(mu, nu, P, 0.5 * (lo + hi)));
}

Eigen::MatrixXd random_permutation_plan(Rng& rng, int m) {
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = m - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(0, i)]);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) P(i, perm[i]) = 1.0 / m;
  return P;
}

TEST(PlanCosts, MomentFormMatchesDirectSum) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const DiscreteMeasure mu = random_weighted_measure(rng, 4, 2), nu = random_weighted_measure(rng, 3, 2);
    const Coupling P = product_coupling(mu, nu);
    const PlanMoments m = plan_moments(mu, nu, P);
    for (double T : {0.1, 1.0, 7.0}) {
      const double direct = direct_cost_T(mu, nu, P.matrix(), T);
      EXPECT_NEAR(cost_tilde_c_T(m, T), direct, 1e-11 * (1.0 + direct));
    }
  }
}

TEST(PlanCosts, InfimumOverHorizonMatchesGridSearch) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const DiscreteMeasure mu = random_uniform_measure(rng, 4, 2), nu = random_uniform_measure(rng, 4, 2);
    const Coupling P(random_permutation_plan(rng, 4));
    const PlanMoments m = plan_moments(mu, nu, P);
    const double grid = grid_min_T(mu, nu, P.matrix());
    const double exact = cost_tilde_c(m);
    EXPECT_GE(grid, exact - 1e-10 * (1.0 + exact));
    if (optimal_time_plan(m).is_finite()) {
      EXPECT_LE(grid - exact, 1e-6 * (1.0 + exact));
      EXPECT_NEAR(cost_tilde_c_T(m, optimal_time_plan(m).value()), exact, 1e-10 * (1.0 + exact));
    }
    EXPECT_LE(cost_c(m), exact + 1e-15);
  }
}

TEST(PlanCosts, OptimalTimeTrichotomy) {
  PlanMoments m;
  m.A = 0.0;
  EXPECT_TRUE(optimal_time_plan(m).is_zero());
  m.A = 2.0;
  m.B = 4.0;
  EXPECT_DOUBLE_EQ(optimal_time_plan(m).value(), 1.0);
  m.B = -1.0;
  EXPECT_TRUE(optimal_time_plan(m).is_infinite());
  m.B = 0.0;
  EXPECT_TRUE(optimal_time_plan(m).is_infinite());
  EXPECT_THROW(cost_tilde_c_T(m, 0.0), InvalidArgument);
}

TEST(FixedT, BeatsRandomCouplings) {
  Rng rng(7);
  const DiscreteMeasure mu = random_uniform_measure(rng, 6, 2), nu = random_uniform_measure(rng, 6, 2);
  for (double T : {0.3, 1.0, 4.0}) {
    const SolveResult r = solve_fixed_T(mu, nu, T);
    EXPECT_EQ(r.regime, Regime::kFixedT);
    EXPECT_DOUBLE_EQ(r.optimal_time.value(), T);
    EXPECT_TRUE(check_coupling(mu, nu, r.plan.matrix()).valid());
    for (int k = 0; k < 100; ++k) {
      Eigen::MatrixXd P = Eigen::MatrixXd::Zero(6, 6);
      const double c = rng.uniform();
      P += c * random_permutation_plan(rng, 6) + (1 - c) * random_permutation_plan(rng, 6);
      EXPECT_LE(r.cost_sq, direct_cost_T(mu, nu, P, T) + 1e-12);
    }
  }
  EXPECT_THROW(solve_fixed_T(mu, nu, -1.0), InvalidArgument);
}

TEST(SolveD, NonUniquenessExample) {
  const auto [mu, nu] = scenarios::nonunique_pair();
  const SolveResult r = solve_d(mu, nu);
  EXPECT_NEAR(r.cost_sq, 30.0, 1e-8);
  EXPECT_EQ(r.regime, Regime::kFiniteT);
  EXPECT_NEAR(solve_fixed_T(mu, nu, 1.0).cost_sq, 30.0, 1e-10);
  const OracleResult o = brute_force_oracle(mu, nu);
  ASSERT_EQ(o.optima.size(), 2u);
  std::vector<double> ts{o.optima[0].optimal_time.value(), o.optima[1].optimal_time.value()};
  std::sort(ts.begin(), ts.end());
  EXPECT_NEAR(ts[0], 1.0, 1e-12);
  EXPECT_NEAR(ts[1], 2.0, 1e-12);
}

TEST(SolveD, EqualPositions) {
  const DiscreteMeasure mu = DiscreteMeasure::uniform(1, {S(0, 1), S(0, -1)});
  const DiscreteMeasure nu = DiscreteMeasure::uniform(1, {S(0, 0), S(0, 2)});
  const SolveResult r = solve_d(mu, nu);
  EXPECT_NEAR(r.cost_sq, 1.0, 1e-12);
  EXPECT_EQ(r.regime, Regime::kEqualPositions);
  EXPECT_TRUE(r.optimal_time.is_zero());
}

TEST(SolveD, LowerSemicontinuousEnvelope) {
  const DiscreteMeasure mu = DiscreteMeasure::uniform(1, {S(0, 1)});
  const DiscreteMeasure nu = DiscreteMeasure::uniform(1, {S(0, 3)});
  EXPECT_NEAR(solve_tilde_d(mu, nu).cost_sq, 52.0, 1e-9);
  EXPECT_NEAR(solve_d(mu, nu).cost_sq, 4.0, 1e-12);
  const DiscreteMeasure near = DiscreteMeasure::uniform(1, {S(1e-3, 3)});
  const double td = solve_tilde_d(mu, near).cost_sq;
  EXPECT_NEAR(td, 4.0, 1e-2);
  EXPECT_NEAR(solve_d(mu, near).cost_sq, td, 1e-12);
}

TEST(SolveD, DominatesOracle) {
  Rng rng(11);
  int equal = 0;
  const int trials = 40;
  for (int trial = 0; trial < trials; ++trial) {
    const int m = 2 + trial % 4;
    const DiscreteMeasure mu = random_uniform_measure(rng, m, 1 + trial % 3);
    const DiscreteMeasure nu = random_uniform_measure(rng, m, 1 + trial % 3);
    const double s = solve_d(mu, nu).cost_sq;
    const double o = brute_force_oracle(mu, nu).best.cost_sq;
    EXPECT_GE(s, o - 1e-9);
    if (std::abs(s - o) <= 1e-8 * std::max(1.0, o)) ++equal;
  }
  EXPECT_GE(equal, trials * 9 / 10);
}

TEST(SolveD, DescentTracesAreMonotone) {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const DiscreteMeasure mu = random_uniform_measure(rng, 7, 2), nu = random_uniform_measure(rng, 7, 2);
    const SolveResult r = solve_d(mu, nu);
    EXPECT_EQ(r.restarts_used, static_cast<int>(r.descent_traces.size()));
    for (const auto& tr : r.descent_traces) {
      for (std::size_t k = 1; k < tr.size(); ++k) EXPECT_LE(tr[k], tr[k - 1] + 1e-10 * (1.0 + tr[k - 1]));
    }
  }
}

TEST(SolveD, ThreadCountDoesNotChangeResult) {
  Rng rng(17);
  const DiscreteMeasure mu = random_uniform_measure(rng, 9, 2), nu = random_uniform_measure(rng, 9, 2);
  SolverOptions one, four;
  four.threads = 4;
  const SolveResult a = solve_d(mu, nu, one), b = solve_d(mu, nu, four);
  EXPECT_EQ(a.cost_sq, b.cost_sq);
  EXPECT_EQ(a.plan.matrix(), b.plan.matrix());
}

TEST(SolveD, WeightedInstancesAgainstTreeOracle) {
  Rng rng(19);
  SolverOptions opts;
  opts.oracle_cap = 7;
  for (int trial = 0; trial < 15; ++trial) {
    const DiscreteMeasure mu = random_weighted_measure(rng, 3, 2), nu = random_weighted_measure(rng, 4, 2);
    const OracleResult o = brute_force_oracle(mu, nu, opts);
    EXPECT_TRUE(check_coupling(mu, nu, o.best.plan.matrix()).valid());
    EXPECT_GE(solve_d(mu, nu).cost_sq, o.best.cost_sq - 1e-9);
  }
  EXPECT_THROW(brute_force_oracle(random_weighted_measure(rng, 5, 1), random_weighted_measure(rng, 5, 1), opts),
               InvalidArgument);
}

TEST(ZeroSet, FreeTransportAndRest) {
  Rng rng(23);
  for (double T : {0.0, 0.25, 3.0}) {
    const DiscreteMeasure mu = random_uniform_measure(rng, 5, 2);
    const DiscreteMeasure nu = pushforward_free_transport(mu, T);
    EXPECT_LE(solve_d(mu, nu).cost_sq, 1e-10);
    const FreeTransportMatch m = detect_free_transport(mu, nu, 1e-9);
    EXPECT_EQ(m.kind, FreeTransportMatch::Kind::kFreeTransport);
    EXPECT_NEAR(m.T, T, 1e-8);
  }
  const DiscreteMeasure a = DiscreteMeasure::uniform(1, {S(0, 0), S(1, 0)});
  const DiscreteMeasure b = DiscreteMeasure::uniform(1, {S(5, 0), S(-2, 0)});
  EXPECT_LE(solve_d(a, b).cost_sq, 1e-10);
  EXPECT_EQ(detect_free_transport(a, b, 1e-9).kind, FreeTransportMatch::Kind::kBothRest);

  const DiscreteMeasure c = DiscreteMeasure::uniform(1, {S(0, 1), S(1, -1)});
  const DiscreteMeasure e = DiscreteMeasure::uniform(1, {S(2, 0), S(-1, 2)});
  EXPECT_EQ(detect_free_transport(c, e, 1e-9).kind, FreeTransportMatch::Kind::kNone);
  EXPECT_GT(solve_d(c, e).cost_sq, 1e-2);
}

TEST(Circle, ShiftedCouplingsApproachZeroOnlyInTheLimit) {
  double prev = std::numeric_limits<double>::infinity();
  for (int N : {16, 64, 256}) {
    const DiscreteMeasure mu = scenarios::circle(N);
    const double c = cost_tilde_c(plan_moments(mu, mu, scenarios::cyclic_shift(N, 1)));
    EXPECT_LT(c, prev);
    EXPECT_GT(c, 0.0);
    prev = c;
  }
  EXPECT_LT(prev, 0.02);
  // The identity is at rest in position: c~ = 12 |v|^2 = 12, c = 0.
  const DiscreteMeasure mu = scenarios::circle(16);
  const PlanMoments id = plan_moments(mu, mu, scenarios::cyclic_shift(16, 0));
  EXPECT_NEAR(cost_tilde_c(id), 12.0, 1e-12);
  EXPECT_EQ(cost_c(id), 0.0);
}

}  // namespace
}  // namespace otikin
