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

#ifndef MIALAB_DEFENSE_AUDIT_HPP
#define MIALAB_DEFENSE_AUDIT_HPP

#include "mialab/defense/defense.hpp"

namespace mialab {

// Exact distribution oracles for the two sampler modes, enumerable at
// testkit scale only. These stay independent of the sampling code paths
// they are used to check.

/// All m-subsets (lexicographic) with their selection probabilities.
/// exact_em: softmax over summed logits. gumbel: the Plackett-Luce set
/// marginal — per subset, the sum over its orderings of sequential
/// softmax-without-replacement probabilities.
struct SubsetDistribution {
  std::vector<std::vector<std::size_t>> subsets;
  std::vector<double> probs;

  double prob_of(std::span<const std::size_t> subset) const;
};

SubsetDistribution subset_distribution(std::span<const double> utilities, std::size_t m,
                                       double epsilon, double delta_u, SamplerMode mode,
                                       std::size_t enum_cap = kDefaultEnumerationCap);

/// Substitution-adjacency audit: replace one utility (both sets clipped to
/// the feasible [-2, 0] range), compute both subset distributions, and
/// return the max over subsets of |ln P(I|S) - ln P(I|S')|.
double privacy_ratio_audit(std::span<const double> utilities, std::size_t substituted_index,
                           double new_utility, std::size_t m, double epsilon, double delta_u,
                           SamplerMode mode, std::size_t enum_cap = kDefaultEnumerationCap);

struct TailAuditResult {
  double opt = 0.0;        // maximum subset utility
  double threshold = 0.0;  // OPT - (2 delta_u / epsilon)(ln |Omega| + t)
  double observed_frequency = 0.0;
  double bound = 0.0;  // e^{-t}
  std::size_t trials = 0;
};

/// Monte-Carlo check of the exponential-mechanism utility tail bound:
/// samples `trials` subsets in exact_em mode and reports the frequency of
/// U(I) <= threshold. With an infinite epsilon the margin is zero and the
/// counted event becomes U(I) < OPT (the limit semantics).
TailAuditResult utility_tail_audit(std::span<const double> utilities, std::size_t m,
                                   double epsilon, double delta_u, double t,
                                   std::size_t trials, Rng& rng,
                                   std::size_t enum_cap = kDefaultEnumerationCap);

}  // namespace mialab

#endif  // MIALAB_DEFENSE_AUDIT_HPP
