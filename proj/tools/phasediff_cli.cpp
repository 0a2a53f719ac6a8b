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

// Command-line front end. Talks to the library only through phasediff.h.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "phasediff.h"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitGuard = 3;

struct Options {
  std::string config_path;
  std::string out;
  std::optional<std::string> seed;
  std::optional<std::string> k_order;
  std::optional<std::string> n_traj;
  std::optional<std::string> threads;
  std::vector<std::string> sets;
};

int exit_code(pd_status status) {
  switch (status) {
    case PD_OK: return kExitOk;
    case PD_ERR_VALIDATION: return kExitValidation;
    case PD_ERR_NUMERICAL_GUARD: return kExitGuard;
    default: return kExitFailure;
  }
}

// One JSON line on stderr per failure.
int report(pd_status status, const pd_config* config = nullptr) {
  json record;
  record["status"] = pd_status_name(status);
  record["exit_code"] = exit_code(status);
  if (status == PD_ERR_VALIDATION && config && pd_config_error_count(config) > 0) {
    json errors = json::array();
    for (size_t i = 0; i < pd_config_error_count(config); ++i) {
      errors.push_back({{"field", pd_config_error_field(config, i)},
                        {"message", pd_config_error_message(config, i)}});
    }
    record["errors"] = errors;
  } else {
    record["message"] = pd_last_error();
  }
  std::cerr << record.dump() << '\n';
  return exit_code(status);
}

struct ConfigHandle {
  pd_config* ptr = nullptr;
  ~ConfigHandle() { pd_config_destroy(ptr); }
};

struct ResultHandle {
  pd_result* ptr = nullptr;
  ~ResultHandle() { pd_result_destroy(ptr); }
};

// Loads the document, applies flag overrides and validates. Returns an exit
// code, or kExitOk with `handle` ready.
int prepare(const Options& opt, const std::string& experiment, ConfigHandle& handle) {
  pd_status st = pd_config_create(&handle.ptr);
  if (st != PD_OK) return report(st);
  if (!opt.config_path.empty()) {
    st = pd_config_load_file(handle.ptr, opt.config_path.c_str());
    if (st != PD_OK) return report(st);
  }
  std::vector<std::pair<std::string, std::string>> overrides;
  if (!experiment.empty()) overrides.emplace_back("experiment", experiment);
  if (opt.seed) overrides.emplace_back("seed", *opt.seed);
  if (opt.k_order) overrides.emplace_back("k_order", *opt.k_order);
  if (opt.n_traj) overrides.emplace_back("n_traj", *opt.n_traj);
  if (opt.threads) overrides.emplace_back("threads", *opt.threads);
  for (const auto& kv : opt.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      overrides.emplace_back(kv, "");
    } else {
      overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
  }
  for (const auto& [key, value] : overrides) {
    st = pd_config_override(handle.ptr, key.c_str(), value.c_str());
    if (st != PD_OK) return report(st);
  }
  st = pd_config_validate(handle.ptr);
  if (st != PD_OK) return report(st, handle.ptr);
  return kExitOk;
}

int run(const Options& opt, const std::string& experiment) {
  ConfigHandle config;
  if (const int rc = prepare(opt, experiment, config); rc != kExitOk) return rc;
  const std::string name = pd_config_experiment(config.ptr);
  const std::string out = opt.out.empty() ? "out/" + name : opt.out;

  ResultHandle result;
  pd_status st = pd_run(config.ptr, &result.ptr);
  if (st != PD_OK) return report(st);
  st = pd_result_write(result.ptr, out.c_str());
  if (st != PD_OK) return report(st);
  for (size_t i = 0; i < pd_result_table_count(result.ptr); ++i) {
    std::cout << out << '/' << pd_result_table_name(result.ptr, i) << ".csv\n";
  }
  std::cout << out << "/metadata.json\n" << out << "/config.txt\n";
  return kExitOk;
}

void add_common(CLI::App* cmd, Options& opt, bool with_out) {
  cmd->add_option("-c,--config", opt.config_path, "Config document (key = value lines)");
  cmd->add_option("--seed", opt.seed, "Master seed");
  cmd->add_option("--k-order", opt.k_order, "Inverse-number expansion order");
  cmd->add_option("--n-traj", opt.n_traj, "Trajectory count");
  cmd->add_option("--threads", opt.threads, "Worker threads for trajectories (0 = all cores)");
  cmd->add_option("--set", opt.sets, "Override any config key: --set key=value");
  if (with_out) cmd->add_option("-o,--out", opt.out, "Output directory (default out/<experiment>)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase diffusion in linear amplifiers: experiments and reference data"};
  app.set_version_flag("--version", std::string(pd_version()));
  app.require_subcommand(1);

  Options opt;
  std::string chosen;

  auto* list = app.add_subcommand("list", "List registered experiments");
  list->callback([&] { chosen = "list"; });

  auto* validate = app.add_subcommand("validate", "Validate a config and print its canonical echo");
  add_common(validate, opt, false);
  validate->callback([&] { chosen = "validate"; });

  auto* run_cmd = app.add_subcommand("run", "Run the experiment named in the config");
  add_common(run_cmd, opt, true);
  run_cmd->callback([&] { chosen = "run"; });

  for (size_t i = 0; i < pd_experiment_count(); ++i) {
    const std::string name = pd_experiment_name(i);
    auto* cmd = app.add_subcommand(name, pd_experiment_description(i));
    add_common(cmd, opt, true);
    cmd->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  if (chosen == "list") {
    for (size_t i = 0; i < pd_experiment_count(); ++i) {
      std::printf("%-20s %s\n", pd_experiment_name(i), pd_experiment_description(i));
    }
    return kExitOk;
  }
  if (chosen == "validate") {
    ConfigHandle config;
    if (const int rc = prepare(opt, "", config); rc != kExitOk) return rc;
    std::cout << pd_config_echo(config.ptr);
    return kExitOk;
  }
  return run(opt, chosen == "run" ? "" : chosen);
}
