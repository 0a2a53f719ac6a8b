// Copyright 2026 The phasediff Authors
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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "phasediff/config.hpp"
#include "phasediff/error.hpp"
#include "phasediff/experiment.hpp"
#include "phasediff/moments.hpp"

using namespace phasediff;
using json = nlohmann::json;

namespace {

ExperimentConfig config_for(const std::string& name, const ConfigOverrides& overrides = {}) {
  auto r = validate_config("experiment = " + name + "\nseed = 42\n", overrides);
  if (!r.ok()) {
    std::string msg;
    for (const auto& e : r.errors) msg += e.field + ": " + e.message + "\n";
    FAIL(msg);
  }
  return r.config;
}

const CsvTable& table(const ResultBundle& b, const std::string& name) {
  for (const auto& t : b.tables) {
    if (t.name == name) return t;
  }
  throw std::runtime_error("no table " + name);
}

const CsvColumn& column(const CsvTable& t, const std::string& name) {
  for (const auto& c : t.columns) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("no column " + name);
}

std::string bodies(const ResultBundle& b) {
  std::string out;
  for (const auto& t : b.tables) out += t.name + "\n" + t.to_csv();
  return out;
}

ErrorCode code_of(const ExperimentConfig& c) {
  try {
    run_experiment(c);
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

}  // namespace

TEST_CASE("csv rendering uses 17 significant digits and a header row") {
  CsvTable t{"demo", {}};
  t.add("x", "grid").numbers = {0.1, 1.0 / 3.0, 2.0};
  t.add_text("label", "label").text = {"a", "b", "c"};
  CHECK(t.to_csv() ==
        "x,label\n0.10000000000000001,a\n0.33333333333333331,b\n2,c\n");
  // 17 digits round-trip every double.
  std::istringstream in(t.to_csv());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::getline(in, row);
  CHECK(std::stod(row.substr(0, row.find(','))) == 1.0 / 3.0);
}

TEST_CASE("csv rendering refuses non-finite values and ragged columns") {
  CsvTable t{"bad", {}};
  t.add("x", "grid").numbers = {1.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(t.to_csv(), Error);
  CsvTable r{"ragged", {}};
  r.add("x", "grid").numbers = {1.0, 2.0};
  r.add("y", "grid").numbers = {1.0};
  CHECK_THROWS_AS(r.to_csv(), Error);
}

TEST_CASE("snr-input columns equal the analytic inverse SNR") {
  const auto c = config_for("snr-input", {{"time_points", "11"}});
  const auto b = run_experiment(c);
  const auto& t = table(b, "snr_input");
  const auto& time = column(t, "time").numbers;
  REQUIRE(time.size() == 11);
  CHECK(std::is_sorted(time.begin(), time.end()));
  const AmplifierParams p(1.0, 0.0);
  for (double a : {2.0, 3.0, 6.0, 13.0}) {
    char name[32];
    std::snprintf(name, sizeof name, "inv_snr_%g", a);
    const auto& col = column(t, name);
    CHECK(col.provenance == "analytic:inverse_snr");
    for (std::size_t k = 0; k < time.size(); ++k) {
      CHECK(col.numbers[k] == inverse_snr(p, {a, 0.0}, time[k]));
    }
  }
}

TEST_CASE("snr-nonideal gain-limit sweep starts at one and orders by ideality") {
  const auto b = run_experiment(config_for("snr-nonideal", {{"time_points", "6"}}));
  const auto& t = table(b, "snr_nonideal_gain_limit");
  const auto& a = column(t, "amplitude_sq").numbers;
  const char* order[] = {"sigma_1_0", "sigma_0.8_0.2", "sigma_0.7_0.3", "sigma_0.6_0.4"};
  for (const char* name : order) CHECK(column(t, name).numbers.front() == 1.0);
  for (std::size_t j = 1; j < a.size(); ++j) {
    for (int i = 0; i + 1 < 4; ++i) {
      CHECK(column(t, order[i]).numbers[j] < column(t, order[i + 1]).numbers[j]);
    }
  }
  CHECK(table(b, "snr_nonideal_time").columns.size() == 5);
}

TEST_CASE("number-fan output is independent of the thread count and rerunnable from its echo") {
  auto c = config_for("number-fan", {{"n_traj", "24"}, {"paths_kept", "3"}});
  const auto serial = run_experiment(c);
  c.threads = 4;
  const auto parallel = run_experiment(c);
  CHECK(bodies(serial) == bodies(parallel));

  const auto again = validate_config(serial.config_echo);
  REQUIRE(again.ok());
  CHECK(bodies(run_experiment(again.config)) == bodies(serial));
  CHECK(table(serial, "number_paths").columns.size() == 4);
}

TEST_CASE("metadata records seed, echo, provenance and diagnostics") {
  const auto b = run_experiment(config_for("number-fan", {{"n_traj", "10"}}));
  const auto meta = json::parse(b.metadata_json);
  CHECK(meta["seed"] == 42);
  CHECK(meta["experiment"] == "number-fan");
  CHECK(meta["config_echo"] == b.config_echo);
  CHECK(meta["version"] == library_version());
  CHECK(meta["wall_time_seconds"].is_number());
  CHECK(meta["diagnostics"]["ensemble"]["n_traj"] == 10);
  bool found = false;
  for (const auto& t : meta["tables"]) {
    for (const auto& col : t["columns"]) {
      if (col["name"] == "mean_number_mc") {
        CHECK(col["provenance"] == "monte_carlo");
        found = true;
      }
    }
  }
  CHECK(found);
}

TEST_CASE("variance-compare emits the four variance columns with the Jensen ordering") {
  const auto b = run_experiment(
      config_for("variance-compare", {{"n_traj", "40"}, {"t_end", "1"}, {"time_points", "11"}}));
  const auto& t = table(b, "variance_compare");
  const auto& sample = column(t, "variance_mc");
  const auto& k4 = column(t, "variance_expansion_k4");
  const auto& k1 = column(t, "variance_expansion_k1");
  const auto& small = column(t, "variance_small_noise");
  CHECK(sample.provenance == "monte_carlo");
  CHECK(k4.provenance == "analytic:inverse_number_expansion");
  CHECK(small.provenance == "analytic:small_noise");
  REQUIRE(t.rows() == 22);
  for (std::size_t i = 0; i < t.rows(); ++i) CHECK(small.numbers[i] <= k4.numbers[i]);
  CHECK(k1.numbers.size() == t.rows());
}

TEST_CASE("inverse-expansion partial sums reach the configured order") {
  const auto b = run_experiment(
      config_for("inverse-expansion", {{"n_traj", "20"}, {"time_points", "11"}}));
  const auto& t = table(b, "inverse_expansion");
  for (const char* name : {"mean_upsilon_k1", "mean_upsilon_k2", "mean_upsilon_k3"}) {
    CHECK(column(t, name).numbers.front() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  CHECK(column(t, "mean_upsilon_mc").numbers.front() == 1.0 / 3.0);
  CHECK(table(b, "upsilon_paths").columns.size() == 6);
}

TEST_CASE("too many floor crossings raise a numerical guard error") {
  // A floor above the input forces most trajectories to abort.
  const auto c = config_for("number-fan", {{"floor_epsilon", "2.9"}, {"n_traj", "20"}});
  CHECK(code_of(c) == ErrorCode::NumericalGuard);
  const auto tolerant = config_for(
      "number-fan", {{"floor_epsilon", "2.9"}, {"n_traj", "20"}, {"max_abort_fraction", "1"}});
  const auto meta = json::parse(run_experiment(tolerant).metadata_json);
  const auto& report = meta["diagnostics"]["ensemble"];
  CHECK(report["aborted"].get<int>() > 0);
  CHECK(report["aborted_indices"].size() == report["aborted"].get<std::size_t>());
}

TEST_CASE("dist-converge densities are labelled and normalised") {
  const auto b = run_experiment(config_for(
      "dist-converge", {{"snapshot_times", "0.5"}, {"cutoff", "60"}, {"phase_points", "256"}}));
  const auto& t = table(b, "phase_density");
  const auto& origin = column(t, "origin").text;
  const auto& density = column(t, "density").numbers;
  REQUIRE(origin.size() == 256 + 61);
  CHECK(origin.front() == "p_function");
  CHECK(origin.back() == "pegg_barnett");
  double p_mass = 0.0;
  double pb_mass = 0.0;
  for (std::size_t i = 0; i < 256; ++i) p_mass += density[i] * 2.0 * std::numbers::pi / 256.0;
  for (std::size_t i = 256; i < origin.size(); ++i) pb_mass += density[i] * 2.0 * std::numbers::pi / 61.0;
  CHECK(p_mass == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pb_mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("an undersized Fock cutoff trips the top-population guard") {
  const auto c = config_for("variance-from-dist", {{"cutoff", "12"}, {"t_end", "2"},
                                                   {"time_points", "3"}});
  CHECK(code_of(c) == ErrorCode::NumericalGuard);
}

TEST_CASE("write_bundle creates the directory with tables, metadata and echo") {
  const auto b = run_experiment(config_for("snr-input", {{"time_points", "3"}}));
  const auto dir = std::filesystem::temp_directory_path() / "phasediff_write_bundle_test";
  std::filesystem::remove_all(dir);
  write_bundle(b, (dir / "nested").string());
  for (const char* f : {"snr_input.csv", "metadata.json", "config.txt"}) {
    CHECK(std::filesystem::exists(dir / "nested" / f));
  }
  std::ifstream in(dir / "nested" / "config.txt");
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == b.config_echo);
  std::filesystem::remove_all(dir);
}
