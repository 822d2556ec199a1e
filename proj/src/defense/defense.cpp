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

#include "mialab/defense/defense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mialab/kernels/kernels.hpp"

namespace mialab {

std::string to_string(SamplerMode mode) {
  return mode == SamplerMode::gumbel ? "gumbel" : "exact_em";
}

SamplerMode sampler_mode_from_string(const std::string& s) {
  if (s == "gumbel") return SamplerMode::gumbel;
  if (s == "exact_em") return SamplerMode::exact_em;
  throw std::invalid_argument("unknown sampler mode '" + s + "'");
}

void DefenseConfig::validate() const {
  if (m < 1) throw std::invalid_argument("DefenseConfig: m must be >= 1");
  if (!(epsilon > 0)) throw std::invalid_argument("DefenseConfig: epsilon must be > 0");
  if (!(delta_u > 0)) throw std::invalid_argument("DefenseConfig: delta_u must be > 0");
}

nlohmann::json DefenseConfig::to_json() const {
  return {{"m", m},
          {"epsilon", std::isinf(epsilon) ? nlohmann::json("inf") : nlohmann::json(epsilon)},
          {"p", to_string(p)},
          {"delta_u", delta_u},
          {"sampler", to_string(sampler)},
          {"seed", seed}};
}

int default_neighbor_count(std::size_t smallest_bucket) {
  return smallest_bucket >= 50 ? 5 : 3;
}

std::size_t CandidateIndex::smallest_nonempty_bucket() const {
  std::size_t smallest = 0;
  bool seen = false;
  for (const auto& b : buckets) {
    if (b.size() == 0) continue;
    if (!seen || b.size() < smallest) smallest = b.size();
    seen = true;
  }
  return seen ? smallest : 0;
}

CandidateIndex build_candidate_index(const TrainedClassifier& model, const Dataset& ds,
                                     std::span<const std::size_t> train_idx) {
  if (train_idx.empty())
    throw std::invalid_argument("build_candidate_index: empty training set");
  CandidateIndex index;
  index.num_classes = model.num_classes();
  index.dim = ds.dim;
  index.buckets.resize(static_cast<std::size_t>(index.num_classes));

  std::vector<std::size_t> sorted(train_idx.begin(), train_idx.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i : sorted) {
    auto x = ds.sample(i);
    auto probs = model.predict_proba(x);
    const int label = argmax_lowest(probs);
    auto& bucket = index.buckets[label];
    bucket.indices.push_back(i);
    bucket.features.insert(bucket.features.end(), x.begin(), x.end());
    bucket.proba.insert(bucket.proba.end(), probs.begin(), probs.end());
  }
  return index;
}

std::vector<double> utility_scores(std::span<const double> query,
                                   std::span<const double> candidates, std::size_t dim,
                                   NormOrder p) {
  if (query.size() != dim) throw std::invalid_argument("utility_scores: dimension mismatch");
  if (candidates.size() % dim != 0)
    throw std::invalid_argument("utility_scores: candidate block not a multiple of dim");
  const std::size_t k = candidates.size() / dim;
  std::vector<double> scores(k);
  const double* q = query.data();
  for (std::size_t i = 0; i < k; ++i) {
    const double* x = candidates.data() + i * dim;
    switch (p) {
      case NormOrder::l1:
        scores[i] = -kernels::l1(x, q, dim);
        break;
      case NormOrder::l2:
        scores[i] = -std::sqrt(kernels::l2_sq(x, q, dim));
        break;
      case NormOrder::linf:
        scores[i] = -kernels::linf(x, q, dim);
        break;
    }
  }
  return scores;
}

std::vector<double> logits(std::span<const double> utilities, double epsilon, double delta_u) {
  if (!(delta_u > 0)) throw std::invalid_argument("logits: delta_u must be > 0");
  std::vector<double> out(utilities.size());
  const double scale = epsilon / (2.0 * delta_u);
  for (std::size_t i = 0; i < utilities.size(); ++i) out[i] = scale * utilities[i];
  return out;
}

namespace {

// Indices of the m largest keys; ties resolve to the lowest index.
std::vector<std::size_t> top_m_positions(std::span<const double> keys, std::size_t m) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a] != keys[b]) return keys[a] > keys[b];
    return a < b;
  });
  order.resize(m);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

std::vector<std::size_t> gumbel_top_m(std::span<const double> logit_values, std::size_t m,
                                      Rng& rng) {
  if (m > logit_values.size())
    throw std::invalid_argument("gumbel_top_m: m exceeds candidate count");
  std::vector<double> scores(logit_values.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = logit_values[i] + rng.gumbel();
  return top_m_positions(scores, m);
}

std::vector<std::size_t> top_m_by_utility(std::span<const double> utilities, std::size_t m) {
  if (m > utilities.size())
    throw std::invalid_argument("top_m_by_utility: m exceeds candidate count");
  return top_m_positions(utilities, m);
}

namespace {

std::size_t binomial_or_cap(std::size_t n, std::size_t m, std::size_t cap) {
  // C(n, m) with an early-out at the cap; the running product after step i
  // is C(n-m+i, i), so it stays exact and bounded by cap * n.
  if (m > n) return 0;
  m = std::min(m, n - m);
  unsigned long long result = 1;
  for (std::size_t i = 1; i <= m; ++i) {
    if (result > cap) return cap + 1;
    result = result * (n - m + i) / i;
  }
  return result > cap ? cap + 1 : static_cast<std::size_t>(result);
}

}  // namespace

std::vector<std::size_t> exact_em_sample(std::span<const double> utilities, std::size_t m,
                                         double epsilon, double delta_u, Rng& rng,
                                         std::size_t enum_cap) {
  const std::size_t n = utilities.size();
  if (m > n) throw std::invalid_argument("exact_em_sample: m exceeds candidate count");
  if (std::isinf(epsilon)) return top_m_by_utility(utilities, m);
  const std::size_t count = binomial_or_cap(n, m, enum_cap);
  if (count > enum_cap)
    throw EnumerationCapExceeded("exact_em_sample: C(" + std::to_string(n) + ", " +
                                 std::to_string(m) + ") exceeds enumeration cap " +
                                 std::to_string(enum_cap) + "; use gumbel mode");

  const auto phi = logits(utilities, epsilon, delta_u);

  // enumerate subsets in lexicographic order, accumulating log-weights
  std::vector<std::size_t> subset(m);
  std::iota(subset.begin(), subset.end(), std::size_t{0});
  std::vector<double> log_w;
  log_w.reserve(count);
  std::vector<std::vector<std::size_t>> subsets;
  subsets.reserve(count);
  for (;;) {
    double lw = 0.0;
    for (std::size_t i : subset) lw += phi[i];
    log_w.push_back(lw);
    subsets.push_back(subset);
    // advance to next combination
    std::size_t k = m;
    while (k > 0 && subset[k - 1] == n - m + k - 1) --k;
    if (k == 0) break;
    ++subset[k - 1];
    for (std::size_t j = k; j < m; ++j) subset[j] = subset[j - 1] + 1;
  }

  const double max_lw = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  std::vector<double> cdf(log_w.size());
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    total += std::exp(log_w[i] - max_lw);
    cdf[i] = total;
  }
  const double r = rng.uniform01() * total;
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
  const std::size_t pick = std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
  return subsets[pick];
}

SmoothedOutput defend(std::span<const double> query, const TrainedClassifier& model,
                      const CandidateIndex& index, const DefenseConfig& cfg, Rng& rng) {
  cfg.validate();
  SmoothedOutput out;
  out.original = model.predict_proba(query);
  out.predicted_label = argmax_lowest(out.original);
  out.selection.mode = cfg.sampler;

  const CandidateBucket& bucket = index.buckets[out.predicted_label];
  if (bucket.size() == 0) {
    out.smoothed = out.original;
    out.fallback = true;
    return out;
  }

  const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(cfg.m), bucket.size());
  out.fallback = m < static_cast<std::size_t>(cfg.m);

  const auto utilities = utility_scores(query, bucket.features, index.dim, cfg.p);

  std::vector<std::size_t> chosen;
  if (std::isinf(cfg.epsilon)) {
    chosen = top_m_by_utility(utilities, m);
  } else if (cfg.sampler == SamplerMode::gumbel) {
    chosen = gumbel_top_m(logits(utilities, cfg.epsilon, cfg.delta_u), m, rng);
  } else {
    chosen = exact_em_sample(utilities, m, cfg.epsilon, cfg.delta_u, rng);
  }

  out.smoothed.assign(static_cast<std::size_t>(index.num_classes), 0.0);
  for (std::size_t pos : chosen) {
    out.selection.indices.push_back(bucket.indices[pos]);
    out.selection.utilities.push_back(utilities[pos]);
    const double* v = bucket.proba.data() + pos * static_cast<std::size_t>(index.num_classes);
    for (int c = 0; c < index.num_classes; ++c) out.smoothed[c] += v[c];
  }
  for (double& p : out.smoothed) p /= static_cast<double>(chosen.size());
  return out;
}

}  // namespace mialab
