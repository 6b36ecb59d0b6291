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

#include <json.hpp>

#include <filesystem>

#include "otikin/io.hpp"
#include "otikin/random.hpp"
#include "otikin/scenarios.hpp"

namespace otikin {
namespace {

namespace fs = std::filesystem;

fs::path tmp_dir(const std::string& name) {
  const fs::path p = fs::path(OTIKIN_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

bool identical(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.dim() != b.dim() || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].state == b[i].state) || a[i].weight != b[i].weight) return false;
  }
  return true;
}

TEST(MeasureIo, RoundTripsBitExactly) {
  Rng rng(1);
  const fs::path dir = tmp_dir("roundtrip");
  for (int n : {1, 2, 3}) {
    const DiscreteMeasure mu = random_weighted_measure(rng, 7, n);
    EXPECT_TRUE(identical(parse_measure_json(measure_to_json(mu)), mu));
    EXPECT_TRUE(identical(parse_measure_csv(measure_to_csv(mu)), mu));
    save_measure(dir / "m.json", mu);
    save_measure(dir / "m.csv", mu);
    EXPECT_TRUE(identical(load_measure(dir / "m.json"), mu));
    EXPECT_TRUE(identical(load_measure(dir / "m.csv"), mu));
  }
}

TEST(MeasureIo, RejectsMalformedInput) {
  EXPECT_THROW(parse_measure_json("{"), MeasureError);
  EXPECT_THROW(parse_measure_json("{\"pts\": []}"), MeasureError);
  EXPECT_THROW(parse_measure_json("{\"points\": [{\"x\": [0], \"v\": [0]}]}"), MeasureError);
  EXPECT_THROW(parse_measure_json("{\"points\": [{\"x\": [0], \"v\": [0, 1], \"w\": 1}]}"), MeasureError);
  EXPECT_THROW(parse_measure_json("{\"points\": [{\"x\": [0], \"v\": [0], \"w\": 0.5}]}"), MeasureError);
  EXPECT_THROW(parse_measure_csv(""), MeasureError);
  EXPECT_THROW(parse_measure_csv("x1,v1\n0,0\n"), MeasureError);
  EXPECT_THROW(parse_measure_csv("x1,v1,w\n0,0\n"), MeasureError);
  EXPECT_THROW(parse_measure_csv("x1,v1,w\n0,abc,1\n"), MeasureError);
  EXPECT_THROW(parse_measure_csv("x1,v1,w\n0,1,-1\n1,1,2\n"), MeasureError);
  EXPECT_THROW(load_measure("/nonexistent/otikin.json"), FileError);
  // Blank lines are ignored; a trailing mass error within 1e-6 is rescaled.
  const DiscreteMeasure ok = parse_measure_csv("x1,v1,w\n0,1,0.5\n\n2,3,0.5000001\n");
  EXPECT_EQ(ok.size(), 2u);
}

TEST(ResultJson, StableAndParseable) {
  const auto [mu, nu] = scenarios::nonunique_pair();
  const std::string a = result_to_json(solve_d(mu, nu));
  const std::string b = result_to_json(solve_d(mu, nu));
  EXPECT_EQ(a, b);
  const auto j = nlohmann::json::parse(a);
  EXPECT_NEAR(j.at("cost_sq").get<double>(), 30.0, 1e-8);
  EXPECT_EQ(j.at("regime").get<std::string>(), "finite_T");
  EXPECT_EQ(j.at("plan").size(), 2u);

  SolveResult inf;
  inf.optimal_time = OptimalTime::infinite();
  inf.plan = Coupling(Eigen::MatrixXd::Identity(1, 1));
  EXPECT_EQ(nlohmann::json::parse(result_to_json(inf)).at("T").get<std::string>(), "inf");
  EXPECT_EQ(fmt_double(0.1), "0.10000000000000001");
}

TEST(Forces, SpecParsing) {
  Vec x = Vec::Constant(1, 2.0), v = Vec::Constant(1, 3.0);
  EXPECT_EQ(parse_force_spec("harmonic").eval(0, x, v, Side::kRight)(0), -2.0);
  EXPECT_EQ(parse_force_spec("damped:0.5").eval(0, x, v, Side::kRight)(0), -1.5);
  EXPECT_EQ(parse_force_spec("free").eval(0, x, v, Side::kRight)(0), 0.0);
  EXPECT_THROW(parse_force_spec("damped:x"), InvalidArgument);
  EXPECT_THROW(parse_force_spec("gravity"), InvalidArgument);
  EXPECT_THROW(parse_force_spec("poly:/nonexistent.json"), FileError);

  // F = a0 + t a1 + B x + C v.
  const ForceField f = parse_force_poly_json(R"({"dim": 1, "a": [[1], [2]], "B": [[-1]], "C": [[0.5]]})");
  EXPECT_DOUBLE_EQ(f.eval(3.0, x, v, Side::kRight)(0), 1 + 6 - 2 + 1.5);
  EXPECT_THROW(parse_force_poly_json(R"({"dim": 2, "B": [[1]]})"), InvalidArgument);
  EXPECT_THROW(parse_force_poly_json("[1"), InvalidArgument);
}

TEST(Trajectory, ExportWritesFramesAndManifest) {
  const fs::path dir = tmp_dir("traj");
  const DiscreteMeasure mu = DiscreteMeasure::uniform(1, {PhaseState::scalar(1, 0)});
  const Trajectory tr = vlasov_integrate(mu, harmonic_force(), 0.0, 0.1, 0.025);
  export_trajectory(dir / "out", tr);
  const auto j = nlohmann::json::parse(read_file(dir / "out" / "manifest.json"));
  ASSERT_EQ(j.at("files").size(), tr.times.size());
  EXPECT_EQ(j.at("force").get<std::string>(), "harmonic");
  const DiscreteMeasure last = load_measure(dir / "out" / j.at("files").back().get<std::string>());
  EXPECT_TRUE(last[0].state == tr.states.back()[0]);
}

}  // namespace
}  // namespace otikin
