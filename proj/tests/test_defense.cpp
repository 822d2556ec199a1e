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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mialab/defense/defense.hpp"
#include "mialab/models/tree_ensemble.hpp"

using namespace mialab;

namespace {

std::vector<std::size_t> all_indices(const Dataset& ds) {
  std::vector<std::size_t> idx(ds.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

// a classifier with canned outputs per stored sample, nearest-sample lookup
class CannedClassifier final : public TrainedClassifier {
 public:
  CannedClassifier(const Dataset& ds, std::vector<ConfidenceVector> outputs)
      : ds_(ds), outputs_(std::move(outputs)) {}

  ConfidenceVector predict_proba(std::span<const double> x) const override {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < ds_.size(); ++i) {
      const double d = lp_distance(ds_.sample(i), x, NormOrder::l2);
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    return outputs_[arg];
  }
  int num_classes() const override { return static_cast<int>(outputs_[0].size()); }
  ModelKind kind() const override { return ModelKind::logreg; }
  nlohmann::json to_json() const override { return {}; }

 private:
  const Dataset& ds_;
  std::vector<ConfidenceVector> outputs_;
};

Dataset grid_dataset(std::size_t n) {
  Dataset ds;
  ds.dim = 1;
  ds.num_classes = 2;
  for (std::size_t i = 0; i < n; ++i) {
    ds.features.push_back(static_cast<double>(i) / static_cast<double>(n));
    ds.labels.push_back(static_cast<int>(i % 2));
  }
  return ds;
}

}  // namespace

TEST_CASE("utility scores are negative Lp distances on the bounded domain") {
  // 3-4-5 triangle: q = (0,0), x = (0.3,0.4) gives -0.5 under L2
  const std::vector<double> q = {0.0, 0.0};
  const std::vector<double> candidates = {0.3, 0.4, 0.0, 0.0};
  auto scores = utility_scores(q, candidates, 2, NormOrder::l2);
  CHECK(scores[0] == doctest::Approx(-0.5));
  CHECK(scores[1] == doctest::Approx(0.0));  // identical point

  // L1: q = (0,0), x = (0.25,0.25) gives -0.5
  const std::vector<double> l1_candidates = {0.25, 0.25};
  CHECK(utility_scores(q, l1_candidates, 2, NormOrder::l1)[0] == doctest::Approx(-0.5));

  CHECK_THROWS_AS(utility_scores(q, {l1_candidates.data(), 1}, 2, NormOrder::l2),
                  std::invalid_argument);
}

TEST_CASE("logits follow the exponential-mechanism scaling") {
  const std::vector<double> u = {-0.5};
  CHECK(logits(u, 1.0, 2.0)[0] == doctest::Approx(-0.125));
  CHECK(logits(u, 0.0, 2.0)[0] == 0.0);

  // shifting utilities shifts logits by a constant: softmax unchanged
  const std::vector<double> base = {-0.2, -0.7, -1.1};
  std::vector<double> shifted = base;
  for (double& v : shifted) v -= 0.3;
  const auto phi_a = logits(base, 2.0, 2.0);
  const auto phi_b = logits(shifted, 2.0, 2.0);
  auto softmax = [](std::vector<double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
      v = std::exp(v - m);
      sum += v;
    }
    for (double& v : z) v /= sum;
    return z;
  };
  const auto pa = softmax(phi_a);
  const auto pb = softmax(phi_b);
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == doctest::Approx(pb[i]));
}

TEST_CASE("candidate index partitions the training set by predicted label") {
  const Dataset ds = synth_blobs(3, 2, 30, 0.05, 17);
  TrainConfig cfg;
  cfg.kind = ModelKind::tree_ensemble;
  cfg.num_trees = 9;
  cfg.seed = 3;
  const auto model = train_tree_ensemble(ds, all_indices(ds), cfg);
  const auto index = build_candidate_index(*model, ds, all_indices(ds));

  std::set<std::size_t> seen;
  std::size_t total = 0;
  for (int c = 0; c < index.num_classes; ++c) {
    const auto& bucket = index.buckets[c];
    total += bucket.size();
    for (std::size_t k = 0; k < bucket.size(); ++k) {
      seen.insert(bucket.indices[k]);
      // cache coherence: stored vector equals a fresh prediction
      const auto fresh = model->predict_proba(ds.sample(bucket.indices[k]));
      for (int j = 0; j < index.num_classes; ++j)
        CHECK(bucket.proba[k * index.num_classes + j] == fresh[j]);
      CHECK(argmax_lowest(fresh) == c);
    }
  }
  CHECK(total == ds.size());
  CHECK(seen.size() == ds.size());

  // memorizing model: bucket sizes match ground-truth class counts
  for (int c = 0; c < 3; ++c) CHECK(index.buckets[c].size() == 30);
}

TEST_CASE("single-class predictor sends everything to one bucket") {
  Dataset ds = grid_dataset(10);
  std::vector<ConfidenceVector> outputs(ds.size(), ConfidenceVector{0.9, 0.1});
  CannedClassifier model(ds, outputs);
  const auto index = build_candidate_index(model, ds, all_indices(ds));
  CHECK(index.buckets[0].size() == 10);
  CHECK(index.buckets[1].size() == 0);
}

TEST_CASE("gumbel_top_m basics") {
  Rng rng(100);
  const std::vector<double> phi = {0.0, -0.5, -1.0, -1.5};

  SUBCASE("m equal to the candidate count returns everything") {
    const auto all = gumbel_top_m(phi, 4, rng);
    CHECK(all == std::vector<std::size_t>{0, 1, 2, 3});
  }

  SUBCASE("m larger than the candidate count is rejected") {
    CHECK_THROWS_AS(gumbel_top_m(phi, 5, rng), std::invalid_argument);
  }

  SUBCASE("equal logits select uniformly (100k draws, +-0.01)") {
    const std::vector<double> flat = {0.0, 0.0, 0.0, 0.0};
    std::vector<double> counts(4, 0.0);
    const int draws = 100000;
    for (int d = 0; d < draws; ++d) counts[gumbel_top_m(flat, 1, rng)[0]] += 1.0;
    for (double c : counts) CHECK(c / draws == doctest::Approx(0.25).epsilon(0.04));
  }
}

TEST_CASE("infinite epsilon selects the deterministic nearest candidates") {
  const std::vector<double> u = {-0.9, -0.1, -0.5, -0.1};
  // ties at -0.1 break to the lowest index
  CHECK(top_m_by_utility(u, 2) == std::vector<std::size_t>{1, 3});
  CHECK(top_m_by_utility(u, 3) == std::vector<std::size_t>{1, 2, 3});
  Rng rng(5);
  CHECK(exact_em_sample(u, 2, kEpsilonInf, 2.0, rng) == std::vector<std::size_t>{1, 3});
}

TEST_CASE("exact_em_sample matches the two-candidate softmax") {
  // u = (0, -2), eps = 2, delta_u = 2: P(0) = 1/(1+e^{-1}) ~ 0.7311
  const std::vector<double> u = {0.0, -2.0};
  Rng rng(42);
  const int draws = 100000;
  int zero_picks = 0;
  for (int d = 0; d < draws; ++d)
    if (exact_em_sample(u, 1, 2.0, 2.0, rng)[0] == 0) ++zero_picks;
  const double expected = 1.0 / (1.0 + std::exp(-1.0));
  const double sigma = std::sqrt(expected * (1.0 - expected) / draws);
  CHECK(std::fabs(static_cast<double>(zero_picks) / draws - expected) <= 4.0 * sigma);
}

TEST_CASE("exact_em_sample with |S| = m returns the full subset") {
  const std::vector<double> u = {-0.3, -0.6, -0.9};
  Rng rng(1);
  CHECK(exact_em_sample(u, 3, 1.0, 2.0, rng) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("exact_em_sample enforces the enumeration cap") {
  std::vector<double> u(200, -1.0);
  Rng rng(1);
  CHECK_THROWS_AS(exact_em_sample(u, 3, 1.0, 2.0, rng, 1000), EnumerationCapExceeded);
}

TEST_CASE("exact_em_sample at epsilon 0 is uniform over subsets") {
  const std::vector<double> u = {-0.1, -0.9, -1.7, -0.4};
  Rng rng(77);
  std::map<std::vector<std::size_t>, int> counts;
  const int draws = 60000;
  for (int d = 0; d < draws; ++d) ++counts[exact_em_sample(u, 2, 0.0, 2.0, rng)];
  CHECK(counts.size() == 6);
  for (const auto& [subset, count] : counts) {
    const double p = static_cast<double>(count) / draws;
    const double sigma = std::sqrt((1.0 / 6.0) * (5.0 / 6.0) / draws);
    CHECK(std::fabs(p - 1.0 / 6.0) <= 4.0 * sigma);
  }
}

TEST_CASE("defend obeys the fallback ladder and zero label loss") {
  // canned two-class setup: training points on a line, spiky member vectors
  Dataset ds = grid_dataset(8);
  std::vector<ConfidenceVector> outputs;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    // even indices predicted class 0, odd class 1
    outputs.push_back(i % 2 == 0 ? ConfidenceVector{0.8, 0.2} : ConfidenceVector{0.3, 0.7});
  }
  CannedClassifier model(ds, outputs);
  const auto index = build_candidate_index(model, ds, all_indices(ds));
  REQUIRE(index.buckets[0].size() == 4);
  REQUIRE(index.buckets[1].size() == 4);

  DefenseConfig cfg;
  cfg.p = NormOrder::l2;
  cfg.seed = 9;

  SUBCASE("m = 1 with infinite epsilon returns the nearest neighbor's vector") {
    cfg.m = 1;
    cfg.epsilon = kEpsilonInf;
    Rng rng(1);
    const std::vector<double> q = {0.26};  // nearest even-index sample is 0.25 (index 2)
    const auto out = defend(q, model, index, cfg, rng);
    CHECK_FALSE(out.fallback);
    CHECK(out.selection.indices == std::vector<std::size_t>{2});
    CHECK(out.smoothed == ConfidenceVector{0.8, 0.2});
  }

  SUBCASE("mean of neighbor vectors") {
    // force a two-point bucket with distinct vectors
    Dataset two = grid_dataset(2);
    std::vector<ConfidenceVector> v = {{0.8, 0.2}, {0.6, 0.4}};
    CannedClassifier m2(two, v);
    const auto idx2 = build_candidate_index(m2, two, all_indices(two));
    REQUIRE(idx2.buckets[0].size() == 2);
    cfg.m = 2;
    cfg.epsilon = 1.0;
    Rng rng(2);
    const auto out = defend(std::vector<double>{0.1}, m2, idx2, cfg, rng);
    CHECK(out.smoothed[0] == doctest::Approx(0.7));
    CHECK(out.smoothed[1] == doctest::Approx(0.3));
  }

  SUBCASE("bucket smaller than m uses all of it, flagged") {
    cfg.m = 10;
    cfg.epsilon = 1.0;
    Rng rng(3);
    const auto out = defend(std::vector<double>{0.3}, model, index, cfg, rng);
    CHECK(out.fallback);
    CHECK(out.selection.indices.size() == 4);
  }

  SUBCASE("empty bucket returns the original vector, flagged") {
    // model that predicts class 1 for the query but class 0 for all
    // training samples
    Dataset train = grid_dataset(4);
    std::vector<ConfidenceVector> v(4, ConfidenceVector{0.9, 0.1});
    CannedClassifier m0(train, v);
    auto idx0 = build_candidate_index(m0, train, all_indices(train));
    REQUIRE(idx0.buckets[1].size() == 0);
    // hand the index to a different canned model that predicts class 1
    std::vector<ConfidenceVector> v1(4, ConfidenceVector{0.2, 0.8});
    CannedClassifier m1(train, v1);
    cfg.m = 2;
    Rng rng(4);
    const auto out = defend(std::vector<double>{0.3}, m1, idx0, cfg, rng);
    CHECK(out.fallback);
    CHECK(out.smoothed == out.original);
    CHECK(out.selection.indices.empty());
  }

  SUBCASE("zero label loss holds across samplers, epsilons, and queries") {
    Rng qrng(55);
    for (auto sampler : {SamplerMode::gumbel, SamplerMode::exact_em}) {
      for (double eps : {0.1, 1.0, 10.0, kEpsilonInf}) {
        cfg.m = 3;
        cfg.epsilon = eps;
        cfg.sampler = sampler;
        for (int rep = 0; rep < 50; ++rep) {
          Rng rng(derive_seed(7, "q", rep));
          const std::vector<double> q = {qrng.uniform01()};
          const auto out = defend(q, model, index, cfg, rng);
          const int relabel = argmax_lowest(out.smoothed);
          CHECK(relabel == out.predicted_label);
          for (std::size_t c = 0; c < out.smoothed.size(); ++c)
            CHECK(out.smoothed[out.predicted_label] >= out.smoothed[c]);
          CHECK(is_valid_confidence(out.smoothed, 1e-9));
        }
      }
    }
  }
}

TEST_CASE("defense config validation") {
  DefenseConfig cfg;
  cfg.m = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.m = 1;
  cfg.epsilon = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.epsilon = 1.0;
  cfg.delta_u = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("default neighbor count follows the density rule") {
  CHECK(default_neighbor_count(50) == 5);
  CHECK(default_neighbor_count(200) == 5);
  CHECK(default_neighbor_count(49) == 3);
  CHECK(default_neighbor_count(1) == 3);
}

TEST_CASE("monotonicity: raising a utility raises its m = 1 selection rate") {
  // enumerated softmax check, no sampling needed
  const std::vector<double> base = {-1.0, -0.8, -0.6};
  auto prob_of_first = [](std::vector<double> u) {
    const auto phi = logits(u, 2.0, 2.0);
    double z = 0.0;
    for (double p : phi) z += std::exp(p);
    return std::exp(phi[0]) / z;
  };
  std::vector<double> better = base;
  better[0] = -0.5;
  CHECK(prob_of_first(better) > prob_of_first(base));
}
