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

#ifndef MIALAB_HARNESS_CONFIG_HPP
#define MIALAB_HARNESS_CONFIG_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mialab/attacks/attacks.hpp"
#include "mialab/data/dataset.hpp"
#include "mialab/defense/defense.hpp"
#include "mialab/models/classifier.hpp"

namespace mialab {

/// Configuration errors carry the offending field path; typos in
/// privacy-critical keys must not pass silently.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SplitSpec {
  double target_train = 0.3;
  double target_test = 0.3;
  double shadow_pool = 0.4;
  std::optional<std::size_t> eval_size;  // absent: min(500, |target_train|/4)
};

struct DatasetSpec {
  enum class Kind { csv, synth };
  std::string name;
  Kind kind = Kind::csv;
  // csv
  std::string path;
  std::string label_column;
  std::set<std::string> categorical_columns;
  // synth
  int classes = 2;
  std::size_t dim = 2;
  std::size_t per_class = 50;
  double spread = 0.1;
  // overrides the experiment-wide split when present
  std::optional<SplitSpec> split;
};

struct DefenseSpec {
  std::optional<int> m;  // absent: 5 for dense buckets, 3 for sparse
  double epsilon = 1.0;  // kEpsilonInf allowed ("inf" in the file)
  SamplerMode sampler = SamplerMode::gumbel;
  double delta_u = 2.0;
};

struct AttacksSpec {
  std::vector<std::string> kinds = {"shadow", "confidence", "entropy", "modified_entropy"};
  int num_shadow_models = 4;
  double shadow_train_fraction = 0.5;
  bool per_class_attack_models = false;
  bool per_class_thresholds = true;
  bool adaptive = true;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  NormOrder norm_p = NormOrder::l2;
  std::vector<DatasetSpec> datasets;
  SplitSpec split;
  std::vector<TrainConfig> models;
  DefenseSpec defense;
  AttacksSpec attacks;

  nlohmann::json to_json() const;  // resolved form, embedded in the manifest
};

/// Parse and validate; unknown keys anywhere raise ConfigError with the
/// field path.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

struct AuditConfig {
  std::uint64_t seed = 1;
  std::vector<std::size_t> candidate_sizes = {4, 5, 6};
  std::vector<std::size_t> subset_sizes = {1, 2, 3};
  std::vector<double> epsilons = {0.5, 1.0, 4.0};
  std::size_t ratio_instances = 200;
  std::size_t tv_instances = 50;
  std::size_t tv_draws = 200000;
  double tv_limit = 0.01;
  std::vector<double> tail_ts = {1.0, 2.0, 3.0};
  std::size_t tail_trials = 50000;
  std::size_t tail_instances = 5;

  nlohmann::json to_json() const;
};

AuditConfig parse_audit_config(const nlohmann::json& j);
AuditConfig load_audit_config(const std::string& path);

}  // namespace mialab

#endif  // MIALAB_HARNESS_CONFIG_HPP
