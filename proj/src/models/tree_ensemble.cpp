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

#include "mialab/models/tree_ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mialab/common/rng.hpp"

namespace mialab {

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
};

double gini(const std::vector<double>& counts, double total) {
  if (total <= 0) return 0.0;
  double g = 1.0;
  for (double c : counts) {
    double p = c / total;
    g -= p * p;
  }
  return g;
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& ds, int num_classes, int max_depth, std::size_t features_per_split)
      : ds_(ds),
        num_classes_(num_classes),
        max_depth_(max_depth),
        features_per_split_(features_per_split) {}

  std::vector<TreeEnsembleClassifier::Node> build(std::vector<std::size_t> samples, Rng& rng) {
    nodes_.clear();
    rng_ = &rng;
    grow(std::move(samples), 0);
    return std::move(nodes_);
  }

 private:
  const Dataset& ds_;
  int num_classes_;
  int max_depth_;
  std::size_t features_per_split_;
  std::vector<TreeEnsembleClassifier::Node> nodes_;
  Rng* rng_ = nullptr;

  int make_leaf(const std::vector<std::size_t>& samples) {
    TreeEnsembleClassifier::Node leaf;
    leaf.counts.assign(static_cast<std::size_t>(num_classes_), 0.0);
    for (std::size_t i : samples) leaf.counts[ds_.labels[i]] += 1.0;
    nodes_.push_back(std::move(leaf));
    return static_cast<int>(nodes_.size() - 1);
  }

  bool is_pure(const std::vector<std::size_t>& samples) const {
    for (std::size_t k = 1; k < samples.size(); ++k)
      if (ds_.labels[samples[k]] != ds_.labels[samples[0]]) return false;
    return true;
  }

  // Gini sweep over the given features and every boundary between distinct
  // values; ties resolve to the lowest (feature, threshold).
  SplitChoice best_split(const std::vector<std::size_t>& samples,
                         std::span<const std::size_t> features) const {
    SplitChoice best;
    const double total = static_cast<double>(samples.size());
    std::vector<std::pair<double, int>> column(samples.size());
    std::vector<double> left_counts(static_cast<std::size_t>(num_classes_));
    std::vector<double> right_counts(static_cast<std::size_t>(num_classes_));

    for (std::size_t f : features) {
      for (std::size_t k = 0; k < samples.size(); ++k)
        column[k] = {ds_.sample(samples[k])[f], ds_.labels[samples[k]]};
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;

      std::fill(left_counts.begin(), left_counts.end(), 0.0);
      std::fill(right_counts.begin(), right_counts.end(), 0.0);
      for (const auto& [v, y] : column) right_counts[y] += 1.0;

      double n_left = 0.0;
      for (std::size_t k = 0; k + 1 < column.size(); ++k) {
        left_counts[column[k].second] += 1.0;
        right_counts[column[k].second] -= 1.0;
        n_left += 1.0;
        if (column[k].first == column[k + 1].first) continue;
        const double n_right = total - n_left;
        const double impurity =
            (n_left * gini(left_counts, n_left) + n_right * gini(right_counts, n_right)) / total;
        // ascending iteration makes strict < keep the lowest (feature,
        // threshold) among ties
        if (impurity < best.impurity) {
          best.impurity = impurity;
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (column[k].first + column[k + 1].first);
        }
      }
    }
    return best;
  }

  SplitChoice choose_split(const std::vector<std::size_t>& samples) {
    std::vector<std::size_t> all(ds_.dim);
    std::iota(all.begin(), all.end(), std::size_t{0});
    if (features_per_split_ >= ds_.dim) return best_split(samples, all);

    // library-forest style: try a random feature subset first, fall back
    // to the full set when it yields no valid split
    std::vector<std::size_t> subset = all;
    for (std::size_t i = 0; i < features_per_split_; ++i) {
      const std::size_t j = i + rng_->next_below(subset.size() - i);
      std::swap(subset[i], subset[j]);
    }
    subset.resize(features_per_split_);
    std::sort(subset.begin(), subset.end());
    SplitChoice choice = best_split(samples, subset);
    if (choice.feature < 0) choice = best_split(samples, all);
    return choice;
  }

  int grow(std::vector<std::size_t> samples, int depth) {
    if (is_pure(samples) || samples.size() < 2 ||
        (max_depth_ >= 0 && depth >= max_depth_))
      return make_leaf(samples);
    SplitChoice split = choose_split(samples);
    if (split.feature < 0) return make_leaf(samples);  // duplicate rows, conflicting labels

    std::vector<std::size_t> left, right;
    for (std::size_t i : samples) {
      if (ds_.sample(i)[split.feature] < split.threshold)
        left.push_back(i);
      else
        right.push_back(i);
    }
    samples.clear();
    samples.shrink_to_fit();

    TreeEnsembleClassifier::Node node;
    node.feature = split.feature;
    node.threshold = split.threshold;
    nodes_.push_back(std::move(node));
    const int self = static_cast<int>(nodes_.size() - 1);
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    nodes_[self].left = l;
    nodes_[self].right = r;
    return self;
  }
};

}  // namespace

void TreeEnsembleClassifier::fit(const Dataset& ds, std::span<const std::size_t> idx,
                                 const TrainConfig& cfg) {
  cfg.validate();
  if (idx.empty()) throw std::invalid_argument("train_tree_ensemble: empty training set");
  if (ds.num_classes < 2) throw std::invalid_argument("train_tree_ensemble: need >= 2 classes");
  num_classes_ = ds.num_classes;
  dim_ = ds.dim;
  leaf_alpha_ = cfg.leaf_alpha;
  trees_.clear();
  trees_.reserve(static_cast<std::size_t>(cfg.num_trees));

  hyperparameters_ = {{"num_trees", cfg.num_trees},
                      {"max_depth", cfg.max_depth},
                      {"leaf_alpha", cfg.leaf_alpha},
                      {"max_features", cfg.max_features},
                      {"seed", cfg.seed}};

  std::size_t features_per_split = ds.dim;
  if (cfg.max_features == 0)
    features_per_split = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(ds.dim))));
  else if (cfg.max_features > 0)
    features_per_split = std::min<std::size_t>(ds.dim, cfg.max_features);

  TreeBuilder builder(ds, num_classes_, cfg.max_depth, features_per_split);
  for (int t = 0; t < cfg.num_trees; ++t) {
    Rng rng(derive_seed(cfg.seed, "tree_ensemble.bootstrap", static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> bag(idx.size());
    for (auto& s : bag) s = idx[rng.next_below(idx.size())];
    trees_.push_back(builder.build(std::move(bag), rng));
  }
}

int TreeEnsembleClassifier::leaf_for(const std::vector<Node>& tree,
                                     std::span<const double> x) const {
  int cur = 0;
  while (tree[cur].feature >= 0)
    cur = (x[tree[cur].feature] < tree[cur].threshold) ? tree[cur].left : tree[cur].right;
  return cur;
}

ConfidenceVector TreeEnsembleClassifier::predict_proba(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("predict_proba: dimension mismatch");
  ConfidenceVector probs(static_cast<std::size_t>(num_classes_), 0.0);
  for (const auto& tree : trees_) {
    const Node& leaf = tree[leaf_for(tree, x)];
    double total = std::accumulate(leaf.counts.begin(), leaf.counts.end(), 0.0) +
                   leaf_alpha_ * num_classes_;
    for (int c = 0; c < num_classes_; ++c)
      probs[c] += (leaf.counts[c] + leaf_alpha_) / total;
  }
  for (double& p : probs) p /= static_cast<double>(trees_.size());
  return probs;
}

nlohmann::json TreeEnsembleClassifier::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree) {
      nlohmann::json node = {{"feature", n.feature}};
      if (n.feature >= 0) {
        node["threshold"] = n.threshold;
        node["left"] = n.left;
        node["right"] = n.right;
      } else {
        node["counts"] = n.counts;
      }
      nodes.push_back(std::move(node));
    }
    trees.push_back(std::move(nodes));
  }
  return {{"format_version", 1},       {"kind", "tree_ensemble"},
          {"num_classes", num_classes_}, {"dim", dim_},
          {"leaf_alpha", leaf_alpha_},   {"trees", trees},
          {"hyperparameters", hyperparameters_}};
}

std::unique_ptr<TreeEnsembleClassifier> TreeEnsembleClassifier::from_json(
    const nlohmann::json& j) {
  auto model = std::make_unique<TreeEnsembleClassifier>();
  model->num_classes_ = j.at("num_classes").get<int>();
  model->dim_ = j.at("dim").get<std::size_t>();
  model->leaf_alpha_ = j.at("leaf_alpha").get<double>();
  if (j.contains("hyperparameters")) model->hyperparameters_ = j.at("hyperparameters");
  for (const auto& tree_j : j.at("trees")) {
    std::vector<Node> tree;
    for (const auto& node_j : tree_j) {
      Node n;
      n.feature = node_j.at("feature").get<int>();
      if (n.feature >= 0) {
        n.threshold = node_j.at("threshold").get<double>();
        n.left = node_j.at("left").get<int>();
        n.right = node_j.at("right").get<int>();
      } else {
        n.counts = node_j.at("counts").get<std::vector<double>>();
      }
      tree.push_back(std::move(n));
    }
    model->trees_.push_back(std::move(tree));
  }
  if (model->trees_.empty()) throw std::runtime_error("tree_ensemble document has no trees");
  return model;
}

std::unique_ptr<TrainedClassifier> train_tree_ensemble(const Dataset& ds,
                                                       std::span<const std::size_t> idx,
                                                       const TrainConfig& cfg) {
  auto model = std::make_unique<TreeEnsembleClassifier>();
  model->fit(ds, idx, cfg);
  return model;
}

}  // namespace mialab
