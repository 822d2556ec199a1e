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

#ifndef MIALAB_MODELS_LOGREG_HPP
#define MIALAB_MODELS_LOGREG_HPP

#include "mialab/models/classifier.hpp"

namespace mialab {

/// Multinomial logistic regression fit by full-batch gradient descent on
/// cross-entropy.
class LogRegClassifier final : public TrainedClassifier {
 public:
  LogRegClassifier(int num_classes, std::size_t dim);

  ConfidenceVector predict_proba(std::span<const double> x) const override;
  int num_classes() const override { return num_classes_; }
  ModelKind kind() const override { return ModelKind::logreg; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<LogRegClassifier> from_json(const nlohmann::json& j);

  /// Fit in place; throws on non-finite loss with the epoch index.
  void fit(const Dataset& ds, std::span<const std::size_t> idx, const TrainConfig& cfg);

  std::size_t dim() const { return dim_; }

 private:
  int num_classes_;
  std::size_t dim_;
  std::vector<double> weights_;  // num_classes_ x dim_, row-major
  std::vector<double> bias_;     // num_classes_
  nlohmann::json hyperparameters_;
};

/// Numerically stable in-place softmax.
void softmax_inplace(std::span<double> z);

}  // namespace mialab

#endif  // MIALAB_MODELS_LOGREG_HPP
