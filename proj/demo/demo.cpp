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

// Minimal tour: discrepancy between two small measures, the optimal plan,
// and the spline interpolation halfway through.

#include <cstdio>

#include "otikin/dynamics.hpp"
#include "otikin/random.hpp"
#include "otikin/solver.hpp"

int main() {
  using namespace otikin;
  Rng rng(42);
  const DiscreteMeasure mu = random_uniform_measure(rng, 4, 2);
  const DiscreteMeasure nu = random_uniform_measure(rng, 4, 2);

  const SolveResult r = solve_d(mu, nu);
  std::printf("d^2(mu, nu) = %.10g  regime = %s\n", r.cost_sq, regime_name(r.regime));
  if (!r.optimal_time.is_finite()) return 0;

  const double T = r.optimal_time.value();
  std::printf("optimal horizon T = %.10g\n", T);
  const SplineEnsemble e = build_dynamical_plan(mu, nu, r.plan, T);
  std::printf("spline action = %.10g\n", ensemble_action(e));
  const DiscreteMeasure mid = interpolate_at(e, 0.5 * T);
  for (const Atom& a : mid.atoms()) {
    std::printf("  x = (%+.4f, %+.4f)  v = (%+.4f, %+.4f)  mass %.3f\n", a.state.x(0), a.state.x(1), a.state.v(0),
                a.state.v(1), a.weight);
  }
  return 0;
}
