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

#include "mialab/models/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mialab/common/rng.hpp"
#include "mialab/kernels/kernels.hpp"
#include "mialab/models/logreg.hpp"
#include "mialab/models/tree_ensemble.hpp"

namespace mialab {

void MlpClassifier::init(std::size_t dim, const std::vector<int>& hidden, int num_classes,
                         std::uint64_t seed) {
  num_classes_ = num_classes;
  dim_ = dim;
  layers_.clear();
  Rng rng(derive_seed(seed, "mlp.init"));
  int in = static_cast<int>(dim);
  std::vector<int> widths = hidden;
  widths.push_back(num_classes);
  for (int out : widths) {
    Layer layer;
    layer.in = in;
    layer.out = out;
    layer.weights.resize(static_cast<std::size_t>(in) * out);
    layer.bias.assign(static_cast<std::size_t>(out), 0.0);
    const double scale = std::sqrt(2.0 / static_cast<double>(in));  // He init
    for (auto& w : layer.weights) w = scale * rng.normal();
    layers_.push_back(std::move(layer));
    in = out;
  }
}

std::vector<std::vector<double>> MlpClassifier::forward(std::span<const double> x) const {
  std::vector<std::vector<double>> activations;
  activations.reserve(layers_.size() + 1);
  activations.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const auto& a = activations.back();
    std::vector<double> z(static_cast<std::size_t>(layer.out));
    for (int o = 0; o < layer.out; ++o)
      z[o] = kernels::dot(layer.weights.data() + static_cast<std::size_t>(o) * layer.in,
                          a.data(), static_cast<std::size_t>(layer.in)) +
             layer.bias[o];
    if (l + 1 < layers_.size()) {
      for (double& v : z) v = std::max(v, 0.0);  // ReLU
    } else {
      softmax_inplace(z);
    }
    activations.push_back(std::move(z));
  }
  return activations;
}

ConfidenceVector MlpClassifier::predict_proba(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("predict_proba: dimension mismatch");
  return forward(x).back();
}

void MlpClassifier::accumulate_gradient(std::span<const double> x, int label,
                                        std::vector<Layer>& grads) const {
  auto activations = forward(x);
  // delta starts as softmax - onehot and is propagated backwards.
  std::vector<double> delta = activations.back();
  delta[label] -= 1.0;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Layer& layer = layers_[l];
    const auto& a_in = activations[l];
    for (int o = 0; o < layer.out; ++o) {
      kernels::axpy(delta[o], a_in.data(),
                    grads[l].weights.data() + static_cast<std::size_t>(o) * layer.in,
                    static_cast<std::size_t>(layer.in));
      grads[l].bias[o] += delta[o];
    }
    if (l == 0) break;
    std::vector<double> prev(static_cast<std::size_t>(layer.in), 0.0);
    for (int o = 0; o < layer.out; ++o)
      kernels::axpy(delta[o], layer.weights.data() + static_cast<std::size_t>(o) * layer.in,
                    prev.data(), static_cast<std::size_t>(layer.in));
    // ReLU subgradient: zero where the unit was inactive
    for (int i = 0; i < layer.in; ++i)
      if (activations[l][i] <= 0.0) prev[i] = 0.0;
    delta = std::move(prev);
  }
}

void MlpClassifier::fit(const Dataset& ds, std::span<const std::size_t> idx,
                        const TrainConfig& cfg) {
  cfg.validate();
  if (idx.empty()) throw std::invalid_argument("train_mlp: empty training set");
  if (ds.num_classes < 2) throw std::invalid_argument("train_mlp: need >= 2 classes");
  init(ds.dim, cfg.hidden, ds.num_classes, cfg.seed);
  hyperparameters_ = {{"hidden", cfg.hidden},
                      {"learning_rate", cfg.learning_rate},
                      {"epochs", cfg.epochs},
                      {"batch_size", cfg.batch_size},
                      {"seed", cfg.seed}};

  Rng shuffle_rng(derive_seed(cfg.seed, "mlp.shuffle"));
  std::vector<std::size_t> order(idx.begin(), idx.end());
  std::vector<Layer> grads = layers_;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      for (auto& g : grads) {
        std::fill(g.weights.begin(), g.weights.end(), 0.0);
        std::fill(g.bias.begin(), g.bias.end(), 0.0);
      }
      for (std::size_t k = start; k < stop; ++k)
        accumulate_gradient(ds.sample(order[k]), ds.labels[order[k]], grads);
      const double step = -cfg.learning_rate / static_cast<double>(stop - start);
      for (std::size_t l = 0; l < layers_.size(); ++l) {
        kernels::axpy(step, grads[l].weights.data(), layers_[l].weights.data(),
                      layers_[l].weights.size());
        kernels::axpy(step, grads[l].bias.data(), layers_[l].bias.data(),
                      layers_[l].bias.size());
      }
    }
    const double loss = batch_loss(ds, idx);
    if (!std::isfinite(loss))
      throw std::runtime_error("train_mlp: loss diverged at epoch " + std::to_string(epoch));
  }
}

std::vector<double> MlpClassifier::parameters() const {
  std::vector<double> theta;
  for (const auto& layer : layers_) {
    theta.insert(theta.end(), layer.weights.begin(), layer.weights.end());
    theta.insert(theta.end(), layer.bias.begin(), layer.bias.end());
  }
  return theta;
}

void MlpClassifier::set_parameters(std::span<const double> theta) {
  std::size_t off = 0;
  for (auto& layer : layers_) {
    std::copy(theta.begin() + off, theta.begin() + off + layer.weights.size(),
              layer.weights.begin());
    off += layer.weights.size();
    std::copy(theta.begin() + off, theta.begin() + off + layer.bias.size(), layer.bias.begin());
    off += layer.bias.size();
  }
  if (off != theta.size()) throw std::invalid_argument("set_parameters: size mismatch");
}

double MlpClassifier::batch_loss(const Dataset& ds, std::span<const std::size_t> idx) const {
  double loss = 0.0;
  for (std::size_t i : idx) {
    auto probs = forward(ds.sample(i)).back();
    loss -= std::log(std::max(probs[ds.labels[i]], 1e-300));
  }
  return loss / static_cast<double>(idx.size());
}

std::vector<double> MlpClassifier::batch_gradient(const Dataset& ds,
                                                  std::span<const std::size_t> idx) const {
  std::vector<Layer> grads = layers_;
  for (auto& g : grads) {
    std::fill(g.weights.begin(), g.weights.end(), 0.0);
    std::fill(g.bias.begin(), g.bias.end(), 0.0);
  }
  for (std::size_t i : idx) accumulate_gradient(ds.sample(i), ds.labels[i], grads);
  std::vector<double> flat;
  const double inv_n = 1.0 / static_cast<double>(idx.size());
  for (const auto& g : grads) {
    for (double w : g.weights) flat.push_back(w * inv_n);
    for (double b : g.bias) flat.push_back(b * inv_n);
  }
  return flat;
}

nlohmann::json MlpClassifier::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : layers_)
    layers.push_back({{"in", layer.in},
                      {"out", layer.out},
                      {"weights", layer.weights},
                      {"bias", layer.bias}});
  return {{"format_version", 1}, {"kind", "mlp"}, {"num_classes", num_classes_},
          {"dim", dim_},         {"layers", layers}, {"hyperparameters", hyperparameters_}};
}

std::unique_ptr<MlpClassifier> MlpClassifier::from_json(const nlohmann::json& j) {
  auto model = std::make_unique<MlpClassifier>();
  model->num_classes_ = j.at("num_classes").get<int>();
  model->dim_ = j.at("dim").get<std::size_t>();
  if (j.contains("hyperparameters")) model->hyperparameters_ = j.at("hyperparameters");
  for (const auto& layer_j : j.at("layers")) {
    Layer layer;
    layer.in = layer_j.at("in").get<int>();
    layer.out = layer_j.at("out").get<int>();
    layer.weights = layer_j.at("weights").get<std::vector<double>>();
    layer.bias = layer_j.at("bias").get<std::vector<double>>();
    if (layer.weights.size() != static_cast<std::size_t>(layer.in) * layer.out ||
        layer.bias.size() != static_cast<std::size_t>(layer.out))
      throw std::runtime_error("mlp document has inconsistent layer shapes");
    model->layers_.push_back(std::move(layer));
  }
  if (model->layers_.empty()) throw std::runtime_error("mlp document has no layers");
  return model;
}

std::unique_ptr<TrainedClassifier> train_mlp(const Dataset& ds,
                                             std::span<const std::size_t> idx,
                                             const TrainConfig& cfg) {
  auto model = std::make_unique<MlpClassifier>();
  model->fit(ds, idx, cfg);
  return model;
}

std::unique_ptr<TrainedClassifier> model_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("unsupported model format_version");
  if (kind == "logreg") return LogRegClassifier::from_json(j);
  if (kind == "tree_ensemble") return TreeEnsembleClassifier::from_json(j);
  if (kind == "mlp") return MlpClassifier::from_json(j);
  throw std::runtime_error("unknown model kind '" + kind + "'");
}

}  // namespace mialab
