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

#ifndef MIALAB_MODELS_MLP_HPP
#define MIALAB_MODELS_MLP_HPP

#include "mialab/models/classifier.hpp"

namespace mialab {

/// Feed-forward ReLU network with a softmax head, trained by mini-batch SGD
/// on cross-entropy. Zero hidden layers reduces it to logistic regression.
class MlpClassifier final : public TrainedClassifier {
 public:
  ConfidenceVector predict_proba(std::span<const double> x) const override;
  int num_classes() const override { return num_classes_; }
  ModelKind kind() const override { return ModelKind::mlp; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<MlpClassifier> from_json(const nlohmann::json& j);

  void fit(const Dataset& ds, std::span<const std::size_t> idx, const TrainConfig& cfg);

  // Flat-parameter access used by the gradient check: mean cross-entropy
  // loss and its analytic gradient over a fixed batch.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> theta);
  double batch_loss(const Dataset& ds, std::span<const std::size_t> idx) const;
  std::vector<double> batch_gradient(const Dataset& ds, std::span<const std::size_t> idx) const;

 private:
  struct Layer {
    std::vector<double> weights;  // out x in, row-major
    std::vector<double> bias;     // out
    int in = 0;
    int out = 0;
  };

  int num_classes_ = 0;
  std::size_t dim_ = 0;
  std::vector<Layer> layers_;
  nlohmann::json hyperparameters_;

  void init(std::size_t dim, const std::vector<int>& hidden, int num_classes,
            std::uint64_t seed);
  // Forward pass keeping post-activation values per layer.
  std::vector<std::vector<double>> forward(std::span<const double> x) const;
  void accumulate_gradient(std::span<const double> x, int label,
                           std::vector<Layer>& grads) const;
};

}  // namespace mialab

#endif  // MIALAB_MODELS_MLP_HPP
