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

#pragma once

#include <deque>
#include <string>
#include <vector>

#include "phasediff/config.hpp"

namespace phasediff {

const char* library_version();

/// One CSV column. Exactly one of `numbers` / `text` is populated.
struct CsvColumn {
  std::string name;
  /// Where the values come from, e.g. "monte_carlo" or "analytic:mean_photon".
  std::string provenance;
  std::vector<double> numbers;
  std::vector<std::string> text;
  bool is_text = false;

  std::size_t size() const noexcept { return is_text ? text.size() : numbers.size(); }
};

struct CsvTable {
  std::string name;  ///< file stem
  std::deque<CsvColumn> columns;  ///< references from add() stay valid


  CsvColumn& add(std::string name, std::string provenance);
  CsvColumn& add_text(std::string name, std::string provenance);
  std::size_t rows() const;

  /// Header row then one line per row; numbers with 17 significant digits.
  /// Throws Error(Internal) on ragged columns or non-finite values.
  std::string to_csv() const;
};

struct ResultBundle {
  std::string experiment;
  std::string config_echo;
  std::vector<CsvTable> tables;
  /// JSON document: seed, version, echoed config, column provenance,
  /// diagnostics and wall time.
  std::string metadata_json;
};

/// Runs a validated configuration. Throws Error(NumericalGuard) when a guard
/// trips beyond its allowance; nothing is returned in that case.
ResultBundle run_experiment(const ExperimentConfig& config);

/// Writes <table>.csv, metadata.json and config.txt into `directory`,
/// creating it if needed. Throws Error(Io).
void write_bundle(const ResultBundle& bundle, const std::string& directory);

}  // namespace phasediff
