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

#include "mialab/models/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mialab/kernels/kernels.hpp"

namespace mialab {

int argmax_lowest(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("argmax_lowest: empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return static_cast<int>(best);
}

bool is_valid_confidence(std::span<const double> v, double tol) {
  if (v.empty()) return false;
  double sum = 0.0;
  for (double p : v) {
    if (!(p >= 0.0 && p <= 1.0)) return false;
    sum += p;
  }
  return std::fabs(sum - 1.0) <= tol;
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::logreg:
      return "logreg";
    case ModelKind::tree_ensemble:
      return "tree_ensemble";
    case ModelKind::mlp:
      return "mlp";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "logreg") return ModelKind::logreg;
  if (s == "tree_ensemble") return ModelKind::tree_ensemble;
  if (s == "mlp") return ModelKind::mlp;
  throw std::invalid_argument("unknown model kind '" + s + "'");
}

void TrainConfig::validate() const {
  if (learning_rate <= 0) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (epochs <= 0) throw std::invalid_argument("TrainConfig: epochs must be > 0");
  if (batch_size <= 0) throw std::invalid_argument("TrainConfig: batch_size must be > 0");
  if (num_trees <= 0) throw std::invalid_argument("TrainConfig: num_trees must be > 0");
  if (leaf_alpha <= 0) throw std::invalid_argument("TrainConfig: leaf_alpha must be > 0");
  if (max_features < -1)
    throw std::invalid_argument("TrainConfig: max_features must be -1 (all), 0 (sqrt), or > 0");
  for (int h : hidden)
    if (h <= 0) throw std::invalid_argument("TrainConfig: hidden widths must be > 0");
}

void softmax_inplace(std::span<double> z) {
  double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

LogRegClassifier::LogRegClassifier(int num_classes, std::size_t dim)
    : num_classes_(num_classes),
      dim_(dim),
      weights_(static_cast<std::size_t>(num_classes) * dim, 0.0),
      bias_(static_cast<std::size_t>(num_classes), 0.0) {}

ConfidenceVector LogRegClassifier::predict_proba(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("predict_proba: dimension mismatch");
  ConfidenceVector z(static_cast<std::size_t>(num_classes_));
  for (int c = 0; c < num_classes_; ++c)
    z[c] = kernels::dot(weights_.data() + static_cast<std::size_t>(c) * dim_, x.data(), dim_) +
           bias_[c];
  softmax_inplace(z);
  return z;
}

void LogRegClassifier::fit(const Dataset& ds, std::span<const std::size_t> idx,
                           const TrainConfig& cfg) {
  cfg.validate();
  if (idx.empty()) throw std::invalid_argument("train_logreg: empty training set");
  std::vector<int> class_seen(static_cast<std::size_t>(num_classes_), 0);
  for (std::size_t i : idx) class_seen[ds.labels[i]] = 1;
  for (int c = 0; c < num_classes_; ++c)
    if (!class_seen[c])
      throw std::invalid_argument("train_logreg: class " + std::to_string(c) +
                                  " has no training samples");
  if (num_classes_ < 2) throw std::invalid_argument("train_logreg: need >= 2 classes");

  hyperparameters_ = {{"learning_rate", cfg.learning_rate},
                      {"epochs", cfg.epochs},
                      {"seed", cfg.seed}};

  const std::size_t n = idx.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> grad_w(weights_.size());
  std::vector<double> grad_b(bias_.size());
  std::vector<double> probs(static_cast<std::size_t>(num_classes_));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    double loss = 0.0;
    for (std::size_t i : idx) {
      auto x = ds.sample(i);
      for (int c = 0; c < num_classes_; ++c)
        probs[c] =
            kernels::dot(weights_.data() + static_cast<std::size_t>(c) * dim_, x.data(), dim_) +
            bias_[c];
      softmax_inplace(probs);
      const int y = ds.labels[i];
      loss -= std::log(std::max(probs[y], 1e-300));
      for (int c = 0; c < num_classes_; ++c) {
        const double coef = probs[c] - (c == y ? 1.0 : 0.0);
        kernels::axpy(coef, x.data(), grad_w.data() + static_cast<std::size_t>(c) * dim_, dim_);
        grad_b[c] += coef;
      }
    }
    if (!std::isfinite(loss))
      throw std::runtime_error("train_logreg: loss diverged at epoch " + std::to_string(epoch));
    kernels::axpy(-cfg.learning_rate * inv_n, grad_w.data(), weights_.data(), weights_.size());
    kernels::axpy(-cfg.learning_rate * inv_n, grad_b.data(), bias_.data(), bias_.size());
  }
}

nlohmann::json LogRegClassifier::to_json() const {
  return {{"format_version", 1}, {"kind", "logreg"},       {"num_classes", num_classes_},
          {"dim", dim_},         {"weights", weights_},    {"bias", bias_},
          {"hyperparameters", hyperparameters_}};
}

std::unique_ptr<LogRegClassifier> LogRegClassifier::from_json(const nlohmann::json& j) {
  auto model = std::make_unique<LogRegClassifier>(j.at("num_classes").get<int>(),
                                                  j.at("dim").get<std::size_t>());
  model->weights_ = j.at("weights").get<std::vector<double>>();
  model->bias_ = j.at("bias").get<std::vector<double>>();
  if (j.contains("hyperparameters")) model->hyperparameters_ = j.at("hyperparameters");
  if (model->weights_.size() != static_cast<std::size_t>(model->num_classes_) * model->dim_ ||
      model->bias_.size() != static_cast<std::size_t>(model->num_classes_))
    throw std::runtime_error("logreg document has inconsistent shapes");
  return model;
}

std::unique_ptr<TrainedClassifier> train_logreg(const Dataset& ds,
                                                std::span<const std::size_t> idx,
                                                const TrainConfig& cfg) {
  auto model = std::make_unique<LogRegClassifier>(ds.num_classes, ds.dim);
  model->fit(ds, idx, cfg);
  return model;
}

double task_accuracy(const TrainedClassifier& model, const Dataset& ds,
                     std::span<const std::size_t> idx) {
  if (idx.empty()) throw std::invalid_argument("task_accuracy: empty evaluation set");
  std::size_t hits = 0;
  for (std::size_t i : idx)
    if (model.predicted_label(ds.sample(i)) == ds.labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(idx.size());
}

std::unique_ptr<TrainedClassifier> train_model(const Dataset& ds,
                                               std::span<const std::size_t> idx,
                                               const TrainConfig& cfg) {
  switch (cfg.kind) {
    case ModelKind::logreg:
      return train_logreg(ds, idx, cfg);
    case ModelKind::tree_ensemble:
      return train_tree_ensemble(ds, idx, cfg);
    case ModelKind::mlp:
      return train_mlp(ds, idx, cfg);
  }
  throw std::invalid_argument("train_model: bad kind");
}

}  // namespace mialab
