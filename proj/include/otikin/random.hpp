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

// Reproducible random instances.
//
// The engine is std::mt19937_64, whose output sequence the standard fixes
// exactly. The standard distributions are implementation-defined, so
// uniforms (top 53 bits) and normals (Box-Muller) are derived here to get
// identical numbers on every platform.

#ifndef OTIKIN_RANDOM_HPP_
#define OTIKIN_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "otikin/measures.hpp"
#include "otikin/phase.hpp"

namespace otikin {

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 42) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer uniform on [lo, hi].
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform() * static_cast<double>(hi - lo + 1));
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vec normal_vec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  PhaseState normal_state(int n) {
    Vec x = normal_vec(n);
    Vec v = normal_vec(n);
    return PhaseState(std::move(x), std::move(v));
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Uniform measure on m standard-normal phase states.
inline DiscreteMeasure random_uniform_measure(Rng& rng, int m, int n) {
  std::vector<PhaseState> s;
  for (int i = 0; i < m; ++i) s.push_back(rng.normal_state(n));
  return DiscreteMeasure::uniform(n, s);
}

// Measure with m standard-normal atoms and weights drawn from [0.5, 1.5),
// normalised.
inline DiscreteMeasure random_weighted_measure(Rng& rng, int m, int n) {
  std::vector<Atom> atoms;
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    atoms.push_back({rng.normal_state(n), rng.uniform(0.5, 1.5)});
    total += atoms.back().weight;
  }
  for (auto& a : atoms) a.weight /= total;
  return DiscreteMeasure(n, std::move(atoms));
}

}  // namespace otikin

#endif  // OTIKIN_RANDOM_HPP_
