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

// File formats.
//
//   measure JSON  {"dim": n, "points": [{"x": [...], "v": [...], "w": weight}, ...]}
//   measure CSV   header x1..xn,v1..vn,w; one atom per row
//   result JSON   {"cost_sq", "regime", "T", "plan": [[i, j, mass], ...], "iterations"}
//   trajectory    one measure CSV per grid time plus manifest.json
//   force spec    free | harmonic | damped:<gamma> | poly:<file.json>
//
// Every float is written with "%.17g" so identical runs give identical bytes.

#ifndef OTIKIN_IO_HPP_
#define OTIKIN_IO_HPP_

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "otikin/dynamics.hpp"
#include "otikin/error.hpp"
#include "otikin/measures.hpp"
#include "otikin/solver.hpp"

namespace otikin {

// A path could not be read or written.
class FileError : public Error {
 public:
  using Error::Error;
};

inline std::string fmt_double(double x) {
  if (std::isnan(x)) return "null";
  if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FileError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw FileError("cannot write " + p.string());
  out << content;
  if (!out) throw FileError("write failed for " + p.string());
}

// ---- measures -------------------------------------------------------------------

inline DiscreteMeasure parse_measure_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw MeasureError(std::string("malformed measure JSON: ") + e.what());
  }
  RawMeasure raw;
  try {
    if (!j.is_object() || !j.contains("points")) throw MeasureError("measure JSON needs a \"points\" array");
    if (j.contains("dim")) raw.dim = j.at("dim").get<int>();
    for (const auto& p : j.at("points")) {
      raw.x.push_back(p.at("x").get<std::vector<double>>());
      raw.v.push_back(p.at("v").get<std::vector<double>>());
      raw.w.push_back(p.at("w").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw MeasureError(std::string("malformed measure JSON: ") + e.what());
  }
  return validate_measure(raw);
}

inline std::string measure_to_json(const DiscreteMeasure& mu) {
  std::string s = "{\"dim\": " + std::to_string(mu.dim()) + ", \"points\": [";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Atom& a = mu[i];
    s += i ? ",\n  " : "\n  ";
    s += "{\"x\": [";
    for (int k = 0; k < mu.dim(); ++k) s += (k ? ", " : "") + fmt_double(a.state.x(k));
    s += "], \"v\": [";
    for (int k = 0; k < mu.dim(); ++k) s += (k ? ", " : "") + fmt_double(a.state.v(k));
    s += "], \"w\": " + fmt_double(a.weight) + "}";
  }
  s += "\n]}\n";
  return s;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw MeasureError("malformed number '" + s + "' in measure CSV");
  }
  if (used != s.size()) throw MeasureError("malformed number '" + s + "' in measure CSV");
  return v;
}

}  // namespace detail

inline DiscreteMeasure parse_measure_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw MeasureError("measure CSV is empty");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 3 || header.size() % 2 == 0) throw MeasureError("measure CSV header must be x1..xn,v1..vn,w");
  const int n = static_cast<int>((header.size() - 1) / 2);
  for (int k = 0; k < n; ++k) {
    if (header[k] != "x" + std::to_string(k + 1) || header[n + k] != "v" + std::to_string(k + 1)) {
      throw MeasureError("measure CSV header must be x1..xn,v1..vn,w");
    }
  }
  if (header.back() != "w") throw MeasureError("measure CSV header must end with w");
  RawMeasure raw;
  raw.dim = n;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) throw MeasureError("ragged row in measure CSV");
    std::vector<double> x(n), v(n);
    for (int k = 0; k < n; ++k) {
      x[k] = detail::parse_number(cells[k]);
      v[k] = detail::parse_number(cells[n + k]);
    }
    raw.x.push_back(std::move(x));
    raw.v.push_back(std::move(v));
    raw.w.push_back(detail::parse_number(cells.back()));
  }
  return validate_measure(raw);
}

inline std::string measure_to_csv(const DiscreteMeasure& mu) {
  std::string s;
  const int n = mu.dim();
  for (int k = 0; k < n; ++k) s += "x" + std::to_string(k + 1) + ",";
  for (int k = 0; k < n; ++k) s += "v" + std::to_string(k + 1) + ",";
  s += "w\n";
  for (const Atom& a : mu.atoms()) {
    for (int k = 0; k < n; ++k) s += fmt_double(a.state.x(k)) + ",";
    for (int k = 0; k < n; ++k) s += fmt_double(a.state.v(k)) + ",";
    s += fmt_double(a.weight) + "\n";
  }
  return s;
}

enum class MeasureFormat { kAuto, kJson, kCsv };

inline DiscreteMeasure load_measure(const std::filesystem::path& p, MeasureFormat fmt = MeasureFormat::kAuto) {
  if (!std::filesystem::is_regular_file(p)) throw FileError("no such file: " + p.string());
  const std::string text = read_file(p);
  if (fmt == MeasureFormat::kAuto) fmt = p.extension() == ".csv" ? MeasureFormat::kCsv : MeasureFormat::kJson;
  return fmt == MeasureFormat::kCsv ? parse_measure_csv(text) : parse_measure_json(text);
}

inline void save_measure(const std::filesystem::path& p, const DiscreteMeasure& mu,
                         MeasureFormat fmt = MeasureFormat::kAuto) {
  if (fmt == MeasureFormat::kAuto) fmt = p.extension() == ".csv" ? MeasureFormat::kCsv : MeasureFormat::kJson;
  write_file(p, fmt == MeasureFormat::kCsv ? measure_to_csv(mu) : measure_to_json(mu));
}

// ---- results --------------------------------------------------------------------

inline std::string optimal_time_json(const OptimalTime& t) {
  if (t.is_finite()) return fmt_double(t.value());
  if (t.is_infinite()) return "\"inf\"";
  return "null";
}

inline std::string result_to_json(const SolveResult& r) {
  std::string s = "{\"cost_sq\": " + fmt_double(r.cost_sq);
  s += ", \"regime\": \"" + std::string(regime_name(r.regime)) + "\"";
  s += ", \"T\": " + optimal_time_json(r.optimal_time);
  s += ", \"plan\": [";
  bool first = true;
  const Eigen::MatrixXd& P = r.plan.matrix();
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      if (P(i, j) < 1e-15) continue;
      s += first ? "" : ", ";
      s += "[" + std::to_string(i) + ", " + std::to_string(j) + ", " + fmt_double(P(i, j)) + "]";
      first = false;
    }
  }
  s += "], \"iterations\": " + std::to_string(r.iterations) + "}\n";
  return s;
}

// ---- trajectories ---------------------------------------------------------------

inline void export_trajectory(const std::filesystem::path& dir, const Trajectory& tr) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FileError("cannot create directory " + dir.string());
  std::string files, times;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "t_%05zu.csv", i);
    write_file(dir / name, measure_to_csv(tr.measure_at(i)));
    files += (i ? ", \"" : "\"") + std::string(name) + "\"";
    times += (i ? ", " : "") + fmt_double(tr.times[i]);
  }
  std::string m = "{\"times\": [" + times + "],\n \"dt\": " + fmt_double(tr.dt) + ",\n \"force\": \"" +
                  tr.force_tag + "\",\n \"action\": " + fmt_double(path_action(tr)) + ",\n \"files\": [" + files +
                  "]}\n";
  write_file(dir / "manifest.json", m);
}

// ---- force specs ----------------------------------------------------------------

inline ForceField parse_force_poly_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed force JSON: ") + e.what());
  }
  try {
    const int n = j.at("dim").get<int>();
    detail::require(n >= 1, "force JSON: dim must be >= 1");
    std::vector<Vec> a;
    if (j.contains("a")) {
      for (const auto& row : j.at("a")) {
        const auto v = row.get<std::vector<double>>();
        detail::require(static_cast<int>(v.size()) == n, "force JSON: coefficient length != dim");
        a.push_back(Eigen::Map<const Vec>(v.data(), n));
      }
    }
    auto matrix = [&](const char* key) {
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
      if (!j.contains(key)) return M;
      const auto rows = j.at(key).get<std::vector<std::vector<double>>>();
      detail::require(static_cast<int>(rows.size()) == n, std::string("force JSON: ") + key + " must be dim x dim");
      for (int r = 0; r < n; ++r) {
        detail::require(static_cast<int>(rows[r].size()) == n, std::string("force JSON: ") + key + " must be dim x dim");
        for (int c = 0; c < n; ++c) M(r, c) = rows[r][c];
      }
      return M;
    };
    return poly_force(std::move(a), matrix("B"), matrix("C"));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed force JSON: ") + e.what());
  }
}

inline ForceField parse_force_spec(const std::string& spec) {
  if (spec == "free") return free_force();
  if (spec == "harmonic") return harmonic_force();
  if (spec.rfind("damped:", 0) == 0) {
    double g;
    try {
      std::size_t used = 0;
      g = std::stod(spec.substr(7), &used);
      if (used != spec.size() - 7) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InvalidArgument("bad damping coefficient in '" + spec + "'");
    }
    return damped_force(g);
  }
  if (spec.rfind("poly:", 0) == 0) {
    const std::filesystem::path p = spec.substr(5);
    if (!std::filesystem::is_regular_file(p)) throw FileError("no such file: " + p.string());
    ForceField f = parse_force_poly_json(read_file(p));
    f.tag = "poly:" + p.filename().string();
    return f;
  }
  throw InvalidArgument("unknown force '" + spec + "' (free | harmonic | damped:<g> | poly:<file>)");
}

}  // namespace otikin

#endif  // OTIKIN_IO_HPP_
