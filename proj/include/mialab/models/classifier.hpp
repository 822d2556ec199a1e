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

#ifndef MIALAB_MODELS_CLASSIFIER_HPP
#define MIALAB_MODELS_CLASSIFIER_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "mialab/data/dataset.hpp"

namespace mialab {

/// Per-class probability vector: entries in [0,1], summing to 1.
using ConfidenceVector = std::vector<double>;

/// Argmax with the lowest-index tie-break used everywhere a label is read
/// off a confidence vector.
int argmax_lowest(std::span<const double> v);

bool is_valid_confidence(std::span<const double> v, double tol = 1e-9);

enum class ModelKind { logreg, tree_ensemble, mlp };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct TrainConfig {
  ModelKind kind = ModelKind::logreg;
  double learning_rate = 0.1;
  int epochs = 300;
  std::vector<int> hidden = {64, 32};  // mlp only
  int batch_size = 32;                 // mlp only
  int num_trees = 15;                  // tree ensemble only
  int max_depth = -1;                  // -1 = unbounded
  double leaf_alpha = 1e-3;            // Laplace smoothing at leaves
  // features considered per split: 0 = ceil(sqrt(d)) (library-forest
  // default), -1 = all features (plain bagging)
  int max_features = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic post-training classifier. Implementations are immutable
/// once trained and safe for concurrent prediction.
class TrainedClassifier {
 public:
  virtual ~TrainedClassifier() = default;
  virtual ConfidenceVector predict_proba(std::span<const double> x) const = 0;
  virtual int num_classes() const = 0;
  virtual ModelKind kind() const = 0;
  virtual nlohmann::json to_json() const = 0;

  int predicted_label(std::span<const double> x) const {
    auto probs = predict_proba(x);
    return argmax_lowest(probs);
  }
};

std::unique_ptr<TrainedClassifier> train_logreg(const Dataset& ds,
                                                std::span<const std::size_t> idx,
                                                const TrainConfig& cfg);
std::unique_ptr<TrainedClassifier> train_tree_ensemble(const Dataset& ds,
                                                       std::span<const std::size_t> idx,
                                                       const TrainConfig& cfg);
std::unique_ptr<TrainedClassifier> train_mlp(const Dataset& ds,
                                             std::span<const std::size_t> idx,
                                             const TrainConfig& cfg);

/// Dispatch on cfg.kind.
std::unique_ptr<TrainedClassifier> train_model(const Dataset& ds,
                                               std::span<const std::size_t> idx,
                                               const TrainConfig& cfg);

/// Rebuild a classifier from its versioned JSON document.
std::unique_ptr<TrainedClassifier> model_from_json(const nlohmann::json& j);

/// Fraction of samples whose predicted label matches ground truth.
double task_accuracy(const TrainedClassifier& model, const Dataset& ds,
                     std::span<const std::size_t> idx);

}  // namespace mialab

#endif  // MIALAB_MODELS_CLASSIFIER_HPP
