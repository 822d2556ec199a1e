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

#ifndef MIALAB_MODELS_TREE_ENSEMBLE_HPP
#define MIALAB_MODELS_TREE_ENSEMBLE_HPP

#include "mialab/models/classifier.hpp"

namespace mialab {

/// Bagged ensemble of CART-style trees: Gini splits, growth to pure leaves
/// (unless depth-capped), per-leaf class counts with Laplace smoothing.
/// Memorizes its training data by construction, which is the high-leakage
/// regime the attack suite needs.
class TreeEnsembleClassifier final : public TrainedClassifier {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> counts;  // leaf only: per-class sample counts
  };

  ConfidenceVector predict_proba(std::span<const double> x) const override;
  int num_classes() const override { return num_classes_; }
  ModelKind kind() const override { return ModelKind::tree_ensemble; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<TreeEnsembleClassifier> from_json(const nlohmann::json& j);

  void fit(const Dataset& ds, std::span<const std::size_t> idx, const TrainConfig& cfg);

  std::size_t tree_count() const { return trees_.size(); }

 private:
  int num_classes_ = 0;
  std::size_t dim_ = 0;
  double leaf_alpha_ = 1e-3;
  std::vector<std::vector<Node>> trees_;
  nlohmann::json hyperparameters_;

  int leaf_for(const std::vector<Node>& tree, std::span<const double> x) const;
};

}  // namespace mialab

#endif  // MIALAB_MODELS_TREE_ENSEMBLE_HPP
