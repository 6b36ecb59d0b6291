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

// Command-line front end. parse_args and run are separate so the tests can
// drive them without spawning processes.
//
// Exit codes: 0 ok, 2 usage error or missing file, 3 malformed measure,
// 4 solver failure, 5 verification failure.

#ifndef OTIKIN_TOOLS_CLI_HPP_
#define OTIKIN_TOOLS_CLI_HPP_

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "otikin/dynamics.hpp"
#include "otikin/io.hpp"
#include "otikin/scenarios.hpp"
#include "otikin/solver.hpp"
#include "otikin/verify.hpp"

#ifndef OTIKIN_DATA_DIR
#define OTIKIN_DATA_DIR "data"
#endif

namespace otikin::cli {

enum ExitCode { kOk = 0, kUsage = 2, kBadMeasure = 3, kSolverFailure = 4, kVerifyFailure = 5 };

struct Command {
  std::string sub;
  std::filesystem::path mu_path, nu_path, out;
  std::optional<DiscreteMeasure> mu, nu;
  MeasureFormat format = MeasureFormat::kAuto;

  // discrepancy / interpolate
  std::optional<double> T;
  bool optimize_T = false;
  bool tilde = false;
  int steps = 10;

  // simulate / probe
  std::string force = "free";
  double t0 = 0.0, t1 = 1.0, dt = 1e-3;
  std::string scenario;
  std::vector<double> probe_times;
  std::vector<double> h_list{0.2, 0.1, 0.05, 0.025};
  double lambda = 1.0;

  // probe / verify
  std::string suite;
  std::filesystem::path data_dir = OTIKIN_DATA_DIR;

  std::uint64_t seed = 42;
  int threads = 1;
};

struct ParseOutcome {
  std::optional<Command> command;
  int exit_code = kOk;
  std::string message;
};

namespace detail {

inline int default_threads() {
  if (const char* env = std::getenv("OTIKIN_THREADS")) {
    try {
      const int k = std::stoi(env);
      if (k >= 1) return k;
    } catch (const std::exception&) {
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace detail

inline ParseOutcome parse_args(int argc, const char* const* argv) {
  Command c;
  c.threads = detail::default_threads();
  std::string format = "auto";

  CLI::App app{"otikin: second-order kinetic optimal transport between discrete phase-space measures"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "otikin 1.0.0");
  app.add_option("--format", format, "Measure parser: auto, json or csv")
      ->check(CLI::IsMember({"auto", "json", "csv"}));
  app.add_option("--seed", c.seed, "Seed for randomized checks (mt19937_64)");
  app.add_option("--threads", c.threads, "Worker cap (env OTIKIN_THREADS)")->check(CLI::PositiveNumber);

  auto measure_opts = [&](CLI::App* s, bool need_nu) {
    s->add_option("--mu", c.mu_path, "Source measure file")->required();
    if (need_nu) s->add_option("--nu", c.nu_path, "Target measure file")->required();
  };

  CLI::App* disc = app.add_subcommand("discrepancy", "Compute d~_T, d or d~ and the optimal plan");
  measure_opts(disc, true);
  auto* optT = disc->add_option("--T", c.T, "Fixed horizon (d~_T)")->check(CLI::PositiveNumber);
  auto* optOpt = disc->add_flag("--optimize-T", c.optimize_T, "Optimise the horizon (d, default)");
  auto* optTilde = disc->add_flag("--tilde", c.tilde, "Optimise the horizon, evaluate d~");
  optT->excludes(optOpt)->excludes(optTilde);
  optOpt->excludes(optTilde);
  disc->add_option("--out", c.out, "Result JSON path (default stdout)");

  CLI::App* orc = app.add_subcommand("oracle", "Exhaustive vertex enumeration for d (small instances)");
  measure_opts(orc, true);
  orc->add_option("--out", c.out, "Result JSON path (default stdout)");

  CLI::App* interp = app.add_subcommand("interpolate", "Spline interpolation along the optimal fixed-T plan");
  measure_opts(interp, true);
  interp->add_option("--T", c.T, "Horizon")->required()->check(CLI::PositiveNumber);
  interp->add_option("--steps", c.steps, "Number of intervals (writes steps+1 files)")->check(CLI::PositiveNumber);
  interp->add_option("--out", c.out, "Output directory")->required();

  CLI::App* sim = app.add_subcommand("simulate", "Particle integration of Vlasov's equation");
  measure_opts(sim, false);
  sim->add_option("--force", c.force, "free | harmonic | damped:<g> | poly:<file>");
  sim->add_option("--t0", c.t0);
  sim->add_option("--t1", c.t1);
  sim->add_option("--dt", c.dt)->check(CLI::PositiveNumber);
  sim->add_option("--out", c.out, "Output directory")->required();

  CLI::App* probe = app.add_subcommand("probe", "Metric-derivative or optimal-time-ratio probe on a simulated curve");
  probe->add_option("--suite", c.suite)->required()->check(CLI::IsMember({"metric-derivative", "t-ratio"}));
  auto* scen = probe->add_option("--scenario", c.scenario, "Packaged scenario instead of --mu/--force")
                   ->check(CLI::IsMember({"harmonic_single", "harmonic_cloud32", "opposite_pair", "free_cloud",
                                          "damped_cloud"}));
  auto* pmu = probe->add_option("--mu", c.mu_path, "Initial measure");
  pmu->excludes(scen);
  probe->add_option("--force", c.force);
  probe->add_option("--t0", c.t0);
  probe->add_option("--t1", c.t1);
  probe->add_option("--dt", c.dt)->check(CLI::PositiveNumber);
  probe->add_option("--t", c.probe_times, "Probe times (grid-aligned)");
  probe->add_option("--h-list", c.h_list, "Increments, comma-separated")->delimiter(',');
  probe->add_option("--lambda", c.lambda, "Constant time-change rate")->check(CLI::PositiveNumber);
  probe->add_option("--out", c.out, "CSV path (default stdout)");

  CLI::App* ver = app.add_subcommand("verify", "Run a packaged verification suite");
  ver->add_option("--suite", c.suite)
      ->required()
      ->check(CLI::IsMember({"paper-examples", "monge-mather", "moments", "benamou-brenier"}));
  ver->add_option("--data-dir", c.data_dir, "Directory with the packaged instances");

  for (CLI::App* s : {disc, orc, interp, sim, probe, ver}) s->fallthrough();

  std::ostringstream out, err;
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    ParseOutcome po;
    po.exit_code = app.exit(e, out, err) == 0 ? kOk : kUsage;
    po.message = out.str() + err.str();
    return po;
  }
  c.sub = app.get_subcommands().front()->get_name();
  c.format = format == "json" ? MeasureFormat::kJson : format == "csv" ? MeasureFormat::kCsv : MeasureFormat::kAuto;
  if (c.sub == "discrepancy" && !c.T && !c.tilde) c.optimize_T = true;
  if (c.sub == "probe" && c.scenario.empty() && c.mu_path.empty()) {
    return {std::nullopt, kUsage, "probe: one of --scenario or --mu is required\n"};
  }

  try {
    if (!c.mu_path.empty()) c.mu = load_measure(c.mu_path, c.format);
    if (!c.nu_path.empty()) c.nu = load_measure(c.nu_path, c.format);
  } catch (const FileError& e) {
    return {std::nullopt, kUsage, std::string(e.what()) + "\n"};
  } catch (const MeasureError& e) {
    return {std::nullopt, kBadMeasure, std::string(e.what()) + "\n"};
  } catch (const InvalidArgument& e) {
    return {std::nullopt, kBadMeasure, std::string(e.what()) + "\n"};
  }
  return {std::move(c), kOk, ""};
}

namespace detail {

inline void emit(const Command& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
  } else {
    write_file(c.out, text);
  }
}

inline const char* kind_name(OptimalTime::Kind k) {
  switch (k) {
    case OptimalTime::Kind::kZero: return "zero";
    case OptimalTime::Kind::kFinite: return "finite";
    case OptimalTime::Kind::kInfinite: return "inf";
  }
  return "?";
}

inline Trajectory probe_trajectory(const Command& c, std::vector<double>& times) {
  Trajectory tr;
  if (!c.scenario.empty()) {
    scenarios::SimScenario s = c.scenario == "harmonic_single"  ? scenarios::harmonic_single()
                               : c.scenario == "harmonic_cloud32" ? scenarios::harmonic_cloud(c.seed)
                               : c.scenario == "opposite_pair"    ? scenarios::opposite_pair()
                               : c.scenario == "free_cloud"       ? scenarios::free_cloud()
                                                                  : scenarios::damped_cloud();
    tr = std::move(s.trajectory);
    if (times.empty()) times = s.probe_times;
  } else {
    tr = vlasov_integrate(*c.mu, parse_force_spec(c.force), c.t0, c.t1, c.dt);
  }
  if (c.lambda != 1.0) {
    const double lam = c.lambda;
    tr = reparametrize(tr, [lam](double) { return lam; });
    for (double& t : times) t = tr.times.front() + (t - tr.times.front()) / lam;
  }
  if (times.empty()) times.push_back(tr.times.front());
  return tr;
}

inline int run_probe(const Command& c, std::ostream& out) {
  std::vector<double> times = c.probe_times;
  const Trajectory tr = probe_trajectory(c, times);
  SolverOptions opts;
  opts.threads = c.threads;
  std::string csv;
  std::vector<double> hs = c.h_list;
  if (c.lambda != 1.0) {
    for (double& h : hs) h /= c.lambda;
  }
  if (c.suite == "metric-derivative") {
    csv = "t,h,ratio_tilde,ratio_d,force_norm\n";
    for (double t : times) {
      for (const auto& r : metric_derivative_probe(tr, t, hs, opts)) {
        csv += fmt_double(t) + "," + fmt_double(r.h) + "," + fmt_double(r.ratio_tilde) + "," +
               fmt_double(r.ratio_d) + "," + fmt_double(r.force_norm) + "\n";
      }
    }
  } else {
    csv = "t,h,kind,T_ratio,second_order,mean_velocity,velocity_l2\n";
    for (double t : times) {
      for (const auto& r : optimal_time_ratio_probe(tr, t, hs, opts)) {
        csv += fmt_double(t) + "," + fmt_double(r.h) + "," + kind_name(r.kind) + "," + fmt_double(r.T_ratio) + "," +
               fmt_double(r.second_order) + "," + fmt_double(r.mean_velocity) + "," + fmt_double(r.velocity_l2) +
               "\n";
      }
    }
  }
  emit(c, csv, out);
  return kOk;
}

}  // namespace detail

inline int run(const Command& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  SolverOptions opts;
  opts.threads = c.threads;
  try {
    if (c.sub == "discrepancy") {
      SolveResult r = c.T ? solve_fixed_T(*c.mu, *c.nu, *c.T)
                          : (c.tilde ? solve_tilde_d(*c.mu, *c.nu, opts) : solve_d(*c.mu, *c.nu, opts));
      if (r.budget_exhausted) err << "warning: alternating iteration budget exhausted; best result reported\n";
      detail::emit(c, result_to_json(r), out);
      return kOk;
    }
    if (c.sub == "oracle") {
      detail::emit(c, result_to_json(brute_force_oracle(*c.mu, *c.nu, opts).best), out);
      return kOk;
    }
    if (c.sub == "interpolate") {
      const SolveResult r = solve_fixed_T(*c.mu, *c.nu, *c.T);
      const SplineEnsemble e = build_dynamical_plan(*c.mu, *c.nu, r.plan, *c.T);
      std::filesystem::create_directories(c.out);
      for (int i = 0; i <= c.steps; ++i) {
        const double t = i == c.steps ? *c.T : *c.T * i / c.steps;
        char name[32];
        std::snprintf(name, sizeof name, "t_%05d.csv", i);
        write_file(c.out / name, measure_to_csv(interpolate_at(e, t)));
      }
      return kOk;
    }
    if (c.sub == "simulate") {
      export_trajectory(c.out, vlasov_integrate(*c.mu, parse_force_spec(c.force), c.t0, c.t1, c.dt));
      return kOk;
    }
    if (c.sub == "probe") return detail::run_probe(c, out);
    if (c.sub == "verify") {
      verify::Context ctx{c.data_dir, c.seed, c.threads};
      const auto checks = verify::run_suite(c.suite, ctx);
      for (const auto& ch : checks) {
        out << (ch.passed ? "PASS  " : "FAIL  ") << ch.name << "  (" << ch.detail << ")\n";
      }
      return verify::all_passed(checks) ? kOk : kVerifyFailure;
    }
  } catch (const FileError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const MeasureError& e) {
    err << "error: " << e.what() << "\n";
    return kBadMeasure;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  err << "error: unknown subcommand\n";
  return kUsage;
}

}  // namespace otikin::cli

#endif  // OTIKIN_TOOLS_CLI_HPP_
