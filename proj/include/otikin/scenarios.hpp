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

// Named instances shared by the verification suites, the tests and the
// files under data/.

#ifndef OTIKIN_SCENARIOS_HPP_
#define OTIKIN_SCENARIOS_HPP_

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "otikin/dynamics.hpp"
#include "otikin/measures.hpp"
#include "otikin/phase.hpp"
#include "otikin/random.hpp"

namespace otikin::scenarios {

inline PhaseState state2(double x1, double x2, double v1, double v2) {
  Vec x(2), v(2);
  x << x1, x2;
  v << v1, v2;
  return PhaseState(std::move(x), std::move(v));
}

// Two particles at the origin with velocities (2, 0) and (0, sqrt 5); the
// target moves the first one by unit-time free transport. Two distinct
// vertex plans are optimal, with horizons 1 and 2.
inline std::pair<DiscreteMeasure, DiscreteMeasure> nonunique_pair() {
  const PhaseState a = state2(0, 0, 2, 0);
  const PhaseState b = state2(0, 0, 0, std::sqrt(5.0));
  return {DiscreteMeasure::uniform(2, {a, b}), DiscreteMeasure::uniform(2, {free_transport(a, 1.0), b})};
}

// N equispaced points on the unit circle with unit tangent velocities.
inline DiscreteMeasure circle(int N) {
  std::vector<PhaseState> s;
  for (int k = 0; k < N; ++k) {
    const double th = 2.0 * std::numbers::pi * k / N;
    s.push_back(state2(std::cos(th), std::sin(th), -std::sin(th), std::cos(th)));
  }
  return DiscreteMeasure::uniform(2, s);
}

// Sends atom k to atom k + shift (mod N), mass 1/N each.
inline Coupling cyclic_shift(int N, int shift) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(N, N);
  for (int k = 0; k < N; ++k) P(k, ((k + shift) % N + N) % N) = 1.0 / N;
  return Coupling(std::move(P));
}

inline DiscreteMeasure gaussian_cloud(std::uint64_t seed, int m, int n) {
  Rng rng(seed);
  return random_uniform_measure(rng, m, n);
}

// ---- simulation scenarios -----------------------------------------------------

struct SimScenario {
  std::string name;
  Trajectory trajectory;
  std::vector<double> probe_times;
  bool moving_mean;  // <v>_t != 0 at the probe times
};

// Harmonic oscillator from (1, 0). Probe times avoid the zeros of both the
// force and the velocity.
inline SimScenario harmonic_single(double dt = 0.0125) {
  const DiscreteMeasure mu = DiscreteMeasure::uniform(1, {PhaseState::scalar(1.0, 0.0)});
  return {"harmonic_single", vlasov_integrate(mu, harmonic_force(), 0.0, 1.5, dt), {0.3, 0.7, 1.1}, true};
}

inline SimScenario harmonic_cloud(std::uint64_t seed = 42, double dt = 0.0125) {
  return {"harmonic_cloud32", vlasov_integrate(gaussian_cloud(seed, 32, 2), harmonic_force(), 0.0, 1.5, dt),
          {0.3, 0.7, 1.1}, true};
}

// Two mirror-image particles: the mean velocity vanishes for all times while
// the velocity spread does not.
inline SimScenario opposite_pair(double dt = 0.0125) {
  const DiscreteMeasure mu =
      DiscreteMeasure::uniform(1, {PhaseState::scalar(1.0, 0.5), PhaseState::scalar(-1.0, -0.5)});
  return {"opposite_pair", vlasov_integrate(mu, harmonic_force(), 0.0, 1.5, dt), {0.3, 0.7, 1.1}, false};
}

inline SimScenario free_cloud(std::uint64_t seed = 7, double dt = 0.0125) {
  return {"free_cloud", vlasov_integrate(gaussian_cloud(seed, 16, 2), free_force(), 0.0, 1.5, dt), {0.3, 0.7, 1.1},
          true};
}

inline SimScenario damped_cloud(std::uint64_t seed = 11, double dt = 0.0125) {
  return {"damped_cloud", vlasov_integrate(gaussian_cloud(seed, 16, 2), damped_force(0.5), 0.0, 1.5, dt),
          {0.3, 0.7, 1.1}, true};
}

// Single particle from rest: constant acceleration 2 eps on [0, 1], then -2
// on [1, 1 + sqrt eps]. The d-distance between the endpoints approaches
// twice the force integral as eps -> 0.
inline SimScenario factor_two_curve(double eps, double dt = 1e-3) {
  const double t1 = 1.0 + std::sqrt(eps);
  const DiscreteMeasure mu = DiscreteMeasure::uniform(1, {PhaseState::scalar(0.0, 0.0)});
  const ForceField F = piecewise_constant_force({0.0, 1.0, t1}, {2.0 * eps, -2.0});
  return {"factor_two", vlasov_integrate(mu, F, 0.0, t1, dt), {}, false};
}

inline std::vector<SimScenario> packaged_simulations() {
  std::vector<SimScenario> s;
  s.push_back(harmonic_single());
  s.push_back(harmonic_cloud());
  s.push_back(opposite_pair());
  s.push_back(free_cloud());
  s.push_back(damped_cloud());
  s.push_back(factor_two_curve(0.01));
  return s;
}

}  // namespace otikin::scenarios

#endif  // OTIKIN_SCENARIOS_HPP_
