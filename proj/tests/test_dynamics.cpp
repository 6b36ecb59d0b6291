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

#include <cmath>

#include "otikin/dynamics.hpp"
#include "otikin/random.hpp"
#include "otikin/scenarios.hpp"

namespace otikin {
namespace {

PhaseState S(double x, double v) { return PhaseState::scalar(x, v); }

TEST(Ensemble, ActionEqualsFixedHorizonCost) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const DiscreteMeasure mu = random_uniform_measure(rng, 6, 2), nu = random_uniform_measure(rng, 6, 2);
    const double T = rng.uniform(0.2, 3.0);
    const SolveResult r = solve_fixed_T(mu, nu, T);
    const SplineEnsemble e = build_dynamical_plan(mu, nu, r.plan, T);
    EXPECT_NEAR(ensemble_action(e), r.cost_sq, 1e-10 * std::max(1.0, r.cost_sq));
    EXPECT_TRUE(same_weighted_point_set(phase_points(interpolate_at(e, 0.0)), phase_points(mu), 1e-12));
    EXPECT_TRUE(same_weighted_point_set(phase_points(interpolate_at(e, T)), phase_points(nu), 1e-12));
  }
}

TEST(Ensemble, RejectsBadInput) {
  const DiscreteMeasure mu = DiscreteMeasure::uniform(1, {S(0, 0), S(1, 0)});
  Eigen::MatrixXd bad = Eigen::MatrixXd::Constant(2, 2, 0.3);
  EXPECT_THROW(build_dynamical_plan(mu, mu, Coupling(bad), 1.0), InvalidArgument);
  const SplineEnsemble e = build_dynamical_plan(mu, mu, product_coupling(mu, mu), 1.0);
  EXPECT_THROW(interpolate_at(e, 1.5), InvalidArgument);
}

TEST(MongeMather, OptimalPlansSeparateCrossingFlagged) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const DiscreteMeasure mu = random_uniform_measure(rng, 5, 2), nu = random_uniform_measure(rng, 5, 2);
    const SolveResult r = solve_fixed_T(mu, nu, 1.0);
    const MongeMatherReport rep = monge_mather_check(build_dynamical_plan(mu, nu, r.plan, 1.0), 50, 0.0);
    EXPECT_FALSE(rep.violated);
    EXPECT_GT(rep.min_separation, 0.0);
  }
  const MongeMatherReport rep = monge_mather_check(crossing_pair_ensemble(), 50, 1e-9);
  EXPECT_TRUE(rep.violated);
  EXPECT_NEAR(rep.time_of_min, 0.5, 1e-6);
  ASSERT_TRUE(rep.offending.has_value());
}

TEST(MongeMather, CrossingTargetIsTheHandComputedState) {
  // Midpoint of (0,1) -> (1,0) over T = 1 is (0.625, 0.75); the spline from
  // (1,-1) passes through it when the target is (4, 14).
  const SplineEnsemble e = crossing_pair_ensemble();
  EXPECT_NEAR(e.entries[1].spline.target().x(0), 4.0, 1e-12);
  EXPECT_NEAR(e.entries[1].spline.target().v(0), 14.0, 1e-12);
}

TEST(Vlasov, FreeAndHarmonicFlows) {
  const DiscreteMeasure mu = DiscreteMeasure::uniform(1, {S(1, 0), S(0, 1)});
  const Trajectory fr = vlasov_integrate(mu, free_force(), 0.0, 2.0, 0.1);
  EXPECT_NEAR(fr.states.back()[1].x(0), 2.0, 1e-14);
  EXPECT_EQ(path_action(fr), 0.0);

  const Trajectory h = vlasov_integrate(mu, harmonic_force(), 0.0, 1.0, 0.01);
  EXPECT_NEAR(h.states.back()[0].x(0), std::cos(1.0), 1e-9);
  EXPECT_NEAR(h.states.back()[1].x(0), std::sin(1.0), 1e-9);
  // ||F_t||^2 = |x|^2 averages cos^2 and sin^2: constant 1/2.
  EXPECT_NEAR(path_action(h), 0.5, 1e-9);
  EXPECT_NEAR(force_l1(h), std::sqrt(0.5), 1e-9);
  EXPECT_EQ(h.index_of(0.5), 50u);
  EXPECT_THROW(h.index_of(0.505), InvalidArgument);
  EXPECT_THROW(vlasov_integrate(mu, free_force(), 0.0, 1.0, 0.0), InvalidArgument);
}

TEST(Vlasov, PiecewiseForceSteppedExactly) {
  const auto s = scenarios::factor_two_curve(0.01, 0.03);  // breakpoint off the regular grid
  const PhaseState end = s.trajectory.states.back()[0];
  // Closed form: (eps, 2 eps) after phase one, then constant -2 for sqrt(eps).
  const double eps = 0.01, tau = 0.1;
  EXPECT_NEAR(end.v(0), 2 * eps - 2 * tau, 1e-13);
  EXPECT_NEAR(end.x(0), eps + 2 * eps * tau - tau * tau, 1e-13);
  EXPECT_NEAR(force_l1(s.trajectory), 2 * eps + 2 * tau, 1e-13);
}

TEST(Vlasov, SplineForcingReproducesEnsemble) {
  Rng rng(6);
  const DiscreteMeasure mu = random_uniform_measure(rng, 6, 2), nu = random_uniform_measure(rng, 6, 2);
  const SolveResult r = solve_fixed_T(mu, nu, 1.0);
  const SplineEnsemble e = build_dynamical_plan(mu, nu, r.plan, 1.0);
  const Trajectory tr = vlasov_integrate(interpolate_at(e, 0.0), spline_force_field(e), 0.0, 1.0, 0.01);
  EXPECT_TRUE(same_weighted_point_set(phase_points(tr.measure_at(tr.times.size() - 1)), phase_points(nu), 1e-9));
  EXPECT_NEAR(path_action(tr), r.cost_sq, 1e-9 * std::max(1.0, r.cost_sq));
}

TEST(Moments, HoldOnPackagedScenarios) {
  for (const auto& sc : scenarios::packaged_simulations()) {
    const MomentReport rep = moment_report(sc.trajectory);
    EXPECT_TRUE(rep.ok) << sc.name << " worst excess " << rep.worst_excess;
    EXPECT_EQ(rep.rows.size(), sc.trajectory.times.size());
  }
}

TEST(Moments, CoarseLongHarmonicRun) {
  // A huge step: the integrator is inaccurate but the checker must not crash
  // and must report finite numbers.
  const DiscreteMeasure mu = scenarios::gaussian_cloud(3, 8, 1);
  const Trajectory tr = vlasov_integrate(mu, harmonic_force(), 0.0, 60.0, 3.0);
  const MomentReport rep = moment_report(tr);
  EXPECT_TRUE(std::isfinite(rep.worst_excess));
}

TEST(Physicality, BoundHolds) {
  const auto sc = scenarios::harmonic_cloud();
  Rng rng(8);
  for (int k = 0; k < 10; ++k) {
    const auto i = static_cast<std::size_t>(rng.uniform_int(0, 60));
    const auto j = i + 1 + static_cast<std::size_t>(rng.uniform_int(0, 50));
    for (const auto& row : physicality_check(sc.trajectory, {{i, j}})) EXPECT_TRUE(row.ok);
  }
}

TEST(Probes, HarmonicSingleMetricDerivativeAndTimeRatio) {
  const auto sc = scenarios::harmonic_single();
  const std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
  for (double t : sc.probe_times) {
    const auto rows = metric_derivative_probe(sc.trajectory, t, hs);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
      const double err = std::abs(r.ratio_tilde - r.force_norm);
      EXPECT_LT(err, prev);
      EXPECT_LE(r.ratio_d, r.ratio_tilde + 1e-12);
      prev = err;
    }
    EXPECT_LT(prev, 0.05 * rows.back().force_norm);

    // T_{t,t+h} = 2 tan(h/2) for the unit oscillator.
    for (const auto& r : optimal_time_ratio_probe(sc.trajectory, t, hs)) {
      ASSERT_EQ(r.kind, OptimalTime::Kind::kFinite);
      EXPECT_NEAR(r.T_ratio, 2.0 * std::tan(r.h / 2.0) / r.h, 1e-6);
    }
  }
}

TEST(Reparametrize, ConstantRateDoublesForcesAndHalvesTimes) {
  const auto sc = scenarios::harmonic_single();
  const Trajectory re = reparametrize(sc.trajectory, [](double) { return 2.0; });
  EXPECT_NEAR(re.times.back(), 0.75, 1e-12);
  EXPECT_NEAR(force_norm_at(re, 40), 2.0 * force_norm_at(sc.trajectory, 40), 1e-12);
  // Half the span, four times the squared force over half the time: the
  // action is invariant.
  EXPECT_NEAR(path_action(re), path_action(sc.trajectory), 1e-9);
  EXPECT_THROW(reparametrize(sc.trajectory, [](double) { return -1.0; }), InvalidArgument);
}

}  // namespace
}  // namespace otikin
