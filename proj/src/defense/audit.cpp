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

#include "mialab/defense/audit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mialab {

namespace {

std::vector<std::vector<std::size_t>> enumerate_subsets(std::size_t n, std::size_t m,
                                                        std::size_t enum_cap) {
  std::vector<std::vector<std::size_t>> subsets;
  std::vector<std::size_t> subset(m);
  std::iota(subset.begin(), subset.end(), std::size_t{0});
  for (;;) {
    subsets.push_back(subset);
    if (subsets.size() > enum_cap)
      throw EnumerationCapExceeded("subset enumeration exceeds cap " +
                                   std::to_string(enum_cap));
    std::size_t k = m;
    while (k > 0 && subset[k - 1] == n - m + k - 1) --k;
    if (k == 0) break;
    ++subset[k - 1];
    for (std::size_t j = k; j < m; ++j) subset[j] = subset[j - 1] + 1;
  }
  return subsets;
}

// Plackett-Luce probability of drawing exactly this subset: sum over its
// orderings of the product of sequential softmax terms over the remaining
// candidate pool.
double plackett_luce_subset_prob(const std::vector<std::size_t>& subset,
                                 const std::vector<double>& weights, double total_weight,
                                 std::size_t enum_cap) {
  std::vector<std::size_t> order = subset;
  // m! orderings must stay enumerable too
  double factorial = 1.0;
  for (std::size_t i = 2; i <= order.size(); ++i) factorial *= static_cast<double>(i);
  if (factorial > static_cast<double>(enum_cap))
    throw EnumerationCapExceeded("ordering enumeration exceeds cap");

  double prob = 0.0;
  std::sort(order.begin(), order.end());
  do {
    double term = 1.0;
    double denom = total_weight;
    for (std::size_t i : order) {
      term *= weights[i] / denom;
      denom -= weights[i];
    }
    prob += term;
  } while (std::next_permutation(order.begin(), order.end()));
  return prob;
}

std::vector<double> clip_utilities(std::span<const double> utilities) {
  std::vector<double> out(utilities.begin(), utilities.end());
  for (double& u : out) u = std::clamp(u, -2.0, 0.0);
  return out;
}

}  // namespace

double SubsetDistribution::prob_of(std::span<const std::size_t> subset) const {
  std::vector<std::size_t> key(subset.begin(), subset.end());
  std::sort(key.begin(), key.end());
  for (std::size_t i = 0; i < subsets.size(); ++i)
    if (subsets[i] == key) return probs[i];
  throw std::invalid_argument("prob_of: subset not in distribution");
}

SubsetDistribution subset_distribution(std::span<const double> utilities, std::size_t m,
                                       double epsilon, double delta_u, SamplerMode mode,
                                       std::size_t enum_cap) {
  const std::size_t n = utilities.size();
  if (m > n) throw std::invalid_argument("subset_distribution: m exceeds candidate count");
  if (std::isinf(epsilon))
    throw std::invalid_argument("subset_distribution: epsilon must be finite");

  SubsetDistribution dist;
  dist.subsets = enumerate_subsets(n, m, enum_cap);
  dist.probs.resize(dist.subsets.size());

  const auto phi = logits(utilities, epsilon, delta_u);
  const double max_phi = *std::max_element(phi.begin(), phi.end());

  if (mode == SamplerMode::exact_em) {
    double total = 0.0;
    for (std::size_t i = 0; i < dist.subsets.size(); ++i) {
      double lw = 0.0;
      for (std::size_t j : dist.subsets[i]) lw += phi[j] - max_phi;
      dist.probs[i] = std::exp(lw);
      total += dist.probs[i];
    }
    for (double& p : dist.probs) p /= total;
  } else {
    std::vector<double> weights(n);
    double total_weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      weights[i] = std::exp(phi[i] - max_phi);
      total_weight += weights[i];
    }
    for (std::size_t i = 0; i < dist.subsets.size(); ++i)
      dist.probs[i] =
          plackett_luce_subset_prob(dist.subsets[i], weights, total_weight, enum_cap);
  }
  return dist;
}

double privacy_ratio_audit(std::span<const double> utilities, std::size_t substituted_index,
                           double new_utility, std::size_t m, double epsilon, double delta_u,
                           SamplerMode mode, std::size_t enum_cap) {
  if (substituted_index >= utilities.size())
    throw std::invalid_argument("privacy_ratio_audit: substituted index out of range");
  auto base = clip_utilities(utilities);
  auto adjacent = base;
  adjacent[substituted_index] = std::clamp(new_utility, -2.0, 0.0);

  const auto dist_s = subset_distribution(base, m, epsilon, delta_u, mode, enum_cap);
  const auto dist_s2 = subset_distribution(adjacent, m, epsilon, delta_u, mode, enum_cap);

  double max_ratio = 0.0;
  for (std::size_t i = 0; i < dist_s.probs.size(); ++i) {
    const double r = std::fabs(std::log(dist_s.probs[i]) - std::log(dist_s2.probs[i]));
    max_ratio = std::max(max_ratio, r);
  }
  return max_ratio;
}

TailAuditResult utility_tail_audit(std::span<const double> utilities, std::size_t m,
                                   double epsilon, double delta_u, double t,
                                   std::size_t trials, Rng& rng, std::size_t enum_cap) {
  if (trials < 1) throw std::invalid_argument("utility_tail_audit: trials must be >= 1");
  const std::size_t n = utilities.size();
  if (m > n) throw std::invalid_argument("utility_tail_audit: m exceeds candidate count");

  const auto subsets = enumerate_subsets(n, m, enum_cap);
  std::vector<double> subset_utils(subsets.size());
  double opt = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    double u = 0.0;
    for (std::size_t j : subsets[i]) u += utilities[j];
    subset_utils[i] = u;
    opt = std::max(opt, u);
  }

  TailAuditResult result;
  result.opt = opt;
  result.trials = trials;
  result.bound = std::exp(-t);
  const double margin =
      std::isinf(epsilon) ? 0.0
                          : (2.0 * delta_u / epsilon) *
                                (std::log(static_cast<double>(subsets.size())) + t);
  result.threshold = opt - margin;

  std::size_t hits = 0;
  if (std::isinf(epsilon)) {
    auto chosen = top_m_by_utility(utilities, m);
    double u = 0.0;
    for (std::size_t j : chosen) u += utilities[j];
    // zero-margin limit: the event is a strict shortfall from OPT
    hits = (u < opt) ? trials : 0;
  } else {
    // draw from the enumerated categorical directly
    const auto phi = logits(utilities, epsilon, delta_u);
    const double max_phi = *std::max_element(phi.begin(), phi.end());
    std::vector<double> cdf(subsets.size());
    double total = 0.0;
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      double lw = 0.0;
      for (std::size_t j : subsets[i]) lw += phi[j] - max_phi;
      total += std::exp(lw);
      cdf[i] = total;
    }
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const double r = rng.uniform01() * total;
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
      const std::size_t pick =
          std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
      if (subset_utils[pick] <= result.threshold) ++hits;
    }
  }
  result.observed_frequency = static_cast<double>(hits) / static_cast<double>(trials);
  return result;
}

}  // namespace mialab
