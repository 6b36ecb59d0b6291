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

// Self-checks behind `otikin verify --suite ...`. Each check reports a
// pass/fail line with the numbers it compared.

#ifndef OTIKIN_VERIFY_HPP_
#define OTIKIN_VERIFY_HPP_

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "otikin/dynamics.hpp"
#include "otikin/io.hpp"
#include "otikin/random.hpp"
#include "otikin/scenarios.hpp"
#include "otikin/solver.hpp"

namespace otikin::verify {

struct Check {
  std::string name;
  bool passed;
  std::string detail;
};

struct Context {
  std::filesystem::path data_dir;
  std::uint64_t seed = 42;
  int threads = 1;
};

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

inline bool all_passed(const std::vector<Check>& cs) {
  for (const auto& c : cs) {
    if (!c.passed) return false;
  }
  return true;
}

inline std::vector<Check> paper_examples(const Context& ctx) {
  std::vector<Check> out;
  SolverOptions opts;
  opts.threads = ctx.threads;

  {
    const DiscreteMeasure mu = load_measure(ctx.data_dir / "nonunique_mu.json");
    const DiscreteMeasure nu = load_measure(ctx.data_dir / "nonunique_nu.json");
    const SolveResult r = solve_d(mu, nu, opts);
    out.push_back({"nonuniqueness: d^2 = 30", std::abs(r.cost_sq - 30.0) <= 1e-8, fmt("cost_sq=%.12g", r.cost_sq)});
    const OracleResult o = brute_force_oracle(mu, nu, opts);
    bool times_ok = o.optima.size() == 2;
    if (times_ok) {
      std::vector<double> ts;
      for (const auto& v : o.optima) ts.push_back(v.optimal_time.is_finite() ? v.optimal_time.value() : -1.0);
      std::sort(ts.begin(), ts.end());
      times_ok = std::abs(ts[0] - 1.0) <= 1e-9 && std::abs(ts[1] - 2.0) <= 1e-9;
    }
    out.push_back({"nonuniqueness: two optimal permutations, T = 1 and 2", times_ok,
                   fmt("optima=%g", static_cast<double>(o.optima.size()))});
  }
  {
    const CubicSpline s = spline_from_endpoints(PhaseState::scalar(0, 0), PhaseState::scalar(1, 0), 1.0);
    out.push_back({"spline action (0,0)->(1,0), T=1 is 12", std::abs(spline_action(s) - 12.0) <= 1e-12,
                   fmt("action=%.17g", spline_action(s))});
  }
  {
    const PhaseState p1 = PhaseState::scalar(0, 1), p2 = PhaseState::scalar(1, 0), p3 = PhaseState::scalar(-1, 0);
    const double lhs = d(p1, p3), rhs = d(p1, p2) + d(p2, p3);
    out.push_back({"asymmetry: triangle inequality fails", lhs > rhs, fmt("d13=%.6g d12+d23=%.6g", lhs, rhs)});
  }
  {
    const DiscreteMeasure mu = DiscreteMeasure::uniform(1, {PhaseState::scalar(0, 1), PhaseState::scalar(0, -1)});
    const DiscreteMeasure nu = DiscreteMeasure::uniform(1, {PhaseState::scalar(0, 0), PhaseState::scalar(0, 2)});
    const SolveResult r = solve_d(mu, nu, opts);
    out.push_back({"equal positions: d^2 = 1", std::abs(r.cost_sq - 1.0) <= 1e-12 && r.regime == Regime::kEqualPositions,
                   fmt("cost_sq=%.12g", r.cost_sq)});
  }
  {
    const auto s = scenarios::factor_two_curve(0.01);
    const double ratio = d(s.trajectory.states.front()[0], s.trajectory.states.back()[0]) / force_l1(s.trajectory);
    out.push_back({"factor-two curve ratio 1.6364", std::abs(ratio - 0.36 / 0.22) <= 1e-3, fmt("ratio=%.6f", ratio)});
  }
  {
    double prev = std::numeric_limits<double>::infinity();
    bool dec = true;
    double last = 0.0;
    for (int N : {16, 64, 256}) {
      const DiscreteMeasure mu = scenarios::circle(N);
      last = cost_tilde_c(plan_moments(mu, mu, scenarios::cyclic_shift(N, 1)));
      dec = dec && last < prev;
      prev = last;
    }
    out.push_back({"circle: shifted c~ decreasing below 0.02", dec && last < 0.02, fmt("c~(N=256)=%.6g", last)});
  }
  {
    const DiscreteMeasure mu = DiscreteMeasure::uniform(1, {PhaseState::scalar(0.0, 1.0)});
    const DiscreteMeasure at_x = DiscreteMeasure::uniform(1, {PhaseState::scalar(0.0, 3.0)});
    const double at = solve_tilde_d(mu, at_x, opts).cost_sq;
    double prev = std::numeric_limits<double>::infinity(), last = 0.0;
    bool mono = true;
    for (int k : {10, 100, 1000}) {
      const DiscreteMeasure nu = DiscreteMeasure::uniform(1, {PhaseState::scalar(4.0 / k, 3.0)});
      last = solve_tilde_d(mu, nu, opts).cost_sq;
      mono = mono && last <= prev + 1e-12;
      prev = last;
    }
    out.push_back({"envelope: perturbed d~^2 -> d^2 = 4 (52 at x = y)",
                   mono && std::abs(last - 4.0) <= 1e-2 && std::abs(at - 52.0) <= 1e-9,
                   fmt("d~^2(k=1000)=%.12g d~^2(x=y)=%.12g", last, at)});
  }
  {
    Rng rng(ctx.seed);
    const DiscreteMeasure mu = random_uniform_measure(rng, 5, 2);
    const DiscreteMeasure nu = pushforward_free_transport(mu, 0.7);
    const SolveResult r = solve_d(mu, nu, opts);
    const FreeTransportMatch m = detect_free_transport(mu, nu, 1e-9);
    out.push_back({"free transport: d^2 = 0, T recovered",
                   r.cost_sq <= 1e-10 && m.kind == FreeTransportMatch::Kind::kFreeTransport && std::abs(m.T - 0.7) <= 1e-8,
                   fmt("cost_sq=%.3g T=%.12g", r.cost_sq, m.T)});
  }
  return out;
}

inline std::vector<Check> monge_mather(const Context& ctx) {
  std::vector<Check> out;
  Rng rng(ctx.seed);
  SolverOptions opts;
  opts.threads = ctx.threads;
  double worst = std::numeric_limits<double>::infinity();
  for (int inst = 0; inst < 20; ++inst) {
    const int m = 2 + inst % 5;
    const DiscreteMeasure mu = random_uniform_measure(rng, m, 2);
    const DiscreteMeasure nu = random_uniform_measure(rng, m, 2);
    const OracleResult o = brute_force_oracle(mu, nu, opts);
    if (!o.best.optimal_time.is_finite()) continue;
    const auto rep = monge_mather_check(build_dynamical_plan(mu, nu, o.best.plan, o.best.optimal_time.value()), 50, 0.0);
    worst = std::min(worst, rep.min_separation);
  }
  out.push_back({"optimal ensembles never meet in phase space", worst > 0.0, fmt("min separation=%.6g", worst)});
  {
    const DiscreteMeasure mu = load_measure(ctx.data_dir / "crossing_mu.json");
    const DiscreteMeasure nu = load_measure(ctx.data_dir / "crossing_nu.json");
    const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2, 2) * 0.5;
    const auto rep = monge_mather_check(build_dynamical_plan(mu, nu, make_coupling(mu, nu, P), 1.0), 50, 1e-9);
    out.push_back({"crossing pair flagged", rep.violated, fmt("min separation=%.3g at t=%.6f", rep.min_separation, rep.time_of_min)});
  }
  return out;
}

// 20 random grid-index pairs per scenario for the physicality bound.
inline std::vector<std::pair<std::size_t, std::size_t>> random_index_pairs(Rng& rng, std::size_t nt, int count) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  while (static_cast<int>(pairs.size()) < count) {
    auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(nt) - 1));
    auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(nt) - 1));
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    pairs.emplace_back(i, j);
  }
  return pairs;
}

inline std::vector<Check> moments(const Context& ctx) {
  std::vector<Check> out;
  Rng rng(ctx.seed);
  for (const auto& sc : scenarios::packaged_simulations()) {
    const MomentReport rep = moment_report(sc.trajectory);
    out.push_back({sc.name + ": moment bounds", rep.ok, fmt("worst excess=%.3g", rep.worst_excess)});
    const auto rows = physicality_check(sc.trajectory, random_index_pairs(rng, sc.trajectory.times.size(), 20));
    bool ok = true;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
      ok = ok && r.ok;
      worst = std::max(worst, r.tilde_d - r.bound);
    }
    out.push_back({sc.name + ": d~ <= 2 int |F|", ok, fmt("max(d~ - bound)=%.3g", worst)});
  }
  return out;
}

inline std::vector<Check> benamou_brenier(const Context& ctx) {
  std::vector<Check> out;
  Rng rng(ctx.seed);
  double worst = 0.0;
  for (int inst = 0; inst < 5; ++inst) {
    const int m = 4 + 3 * inst;
    const DiscreteMeasure mu = random_uniform_measure(rng, m, 2);
    const DiscreteMeasure nu = random_uniform_measure(rng, m, 2);
    const SolveResult r = solve_fixed_T(mu, nu, 1.0);
    const double act = ensemble_action(build_dynamical_plan(mu, nu, r.plan, 1.0));
    worst = std::max(worst, std::abs(act - r.cost_sq) / std::max(1.0, r.cost_sq));
  }
  out.push_back({"ensemble spline action = fixed-T cost", worst <= 1e-10, fmt("max rel err=%.3g", worst)});

  const DiscreteMeasure mu = random_uniform_measure(rng, 8, 2);
  const DiscreteMeasure nu = random_uniform_measure(rng, 8, 2);
  const SolveResult r = solve_fixed_T(mu, nu, 1.0);
  const SplineEnsemble e = build_dynamical_plan(mu, nu, r.plan, 1.0);
  const DiscreteMeasure start = interpolate_at(e, 0.0);
  double worst_path = 0.0;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    const Trajectory tr = vlasov_integrate(start, spline_force_field(e), 0.0, 1.0, dt);
    worst_path = std::max(worst_path, std::abs(path_action(tr) - r.cost_sq) / std::max(1.0, r.cost_sq));
  }
  out.push_back({"particle path action matches", worst_path <= 1e-6, fmt("max rel err=%.3g", worst_path)});
  return out;
}

inline std::vector<Check> run_suite(const std::string& name, const Context& ctx) {
  if (name == "paper-examples") return paper_examples(ctx);
  if (name == "monge-mather") return monge_mather(ctx);
  if (name == "moments") return moments(ctx);
  if (name == "benamou-brenier") return benamou_brenier(ctx);
  throw InvalidArgument("unknown suite '" + name + "'");
}

}  // namespace otikin::verify

#endif  // OTIKIN_VERIFY_HPP_
