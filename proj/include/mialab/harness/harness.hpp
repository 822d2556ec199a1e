//
// Copyright 2026 The mialab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef MIALAB_HARNESS_HARNESS_HPP
#define MIALAB_HARNESS_HARNESS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "mialab/harness/config.hpp"
#include "mialab/metrics/metrics.hpp"

namespace mialab {

struct AttackCellResult {
  std::string attack;
  double accuracy_no_defense = 0.0;
  double accuracy_with_defense = 0.0;
  std::size_t n_eval = 0;
};

struct StageSeconds {
  double train = 0.0;
  double defense = 0.0;
  double attacks = 0.0;
};

struct CellResult {
  std::string dataset;
  std::string model;
  bool ok = false;
  std::string error;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  int resolved_m = 0;
  std::vector<AttackCellResult> attacks;
  DistortionReport distortion;
  std::uint64_t cell_seed = 0;
  double seconds = 0.0;
  StageSeconds stage_seconds;
};

struct RunResult {
  std::vector<CellResult> cells;
  std::string out_dir;
  std::vector<std::string> files_written;

  const CellResult* find_cell(const std::string& dataset, const std::string& model) const;
  bool all_ok() const;
};

/// Full pipeline for every (dataset, model) cell: train target, build the
/// candidate index, evaluate each attack with and without the defense on
/// balanced eval sets, measure distortion, and emit CSV tables plus a JSON
/// manifest. Cells run in a work pool of `jobs` threads; outputs are
/// independent of the parallelism degree.
RunResult run_experiment(const ExperimentConfig& cfg, int jobs = 1);

struct AuditOutcome {
  bool all_passed = false;
  std::size_t checks_run = 0;
  std::size_t checks_failed = 0;
  nlohmann::json records;
};

/// Randomized verification of the sampler guarantees: the exponential
/// mechanism ratio bound (pass/fail), the gumbel-vs-Plackett-Luce total
/// variation (pass/fail), m = 1 mode equivalence (pass/fail), and the
/// utility tail bound (pass/fail). The gumbel-mode ratio is reported as a
/// diagnostic only.
AuditOutcome sampler_audit(const AuditConfig& cfg);

/// Write audit records to <out_dir>/audit.json.
void write_audit_records(const AuditOutcome& outcome, const std::string& out_dir);

/// Aggregate a results directory into the two heatmap matrices (rows =
/// datasets, columns = models; absent cells stay blank) plus the
/// correlation table; writes CSV grids and renders text to `out`.
int report(const std::string& results_dir, std::ostream& out);

}  // namespace mialab

#endif  // MIALAB_HARNESS_HARNESS_HPP
