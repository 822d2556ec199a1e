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

#ifndef MIALAB_DEFENSE_DEFENSE_HPP
#define MIALAB_DEFENSE_DEFENSE_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mialab/common/rng.hpp"
#include "mialab/models/classifier.hpp"

namespace mialab {

enum class SamplerMode { gumbel, exact_em };

std::string to_string(SamplerMode mode);
SamplerMode sampler_mode_from_string(const std::string& s);

constexpr double kEpsilonInf = std::numeric_limits<double>::infinity();

/// Neighborhood blending parameters. epsilon = kEpsilonInf suppresses the
/// sampling noise entirely (deterministic m-nearest selection).
struct DefenseConfig {
  int m = 5;
  double epsilon = 1.0;
  NormOrder p = NormOrder::l2;
  double delta_u = 2.0;
  SamplerMode sampler = SamplerMode::gumbel;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

/// Pick m = 5 for densely populated candidate buckets, 3 for sparse ones.
int default_neighbor_count(std::size_t smallest_bucket);

/// Training samples bucketed by model-predicted label, with both the
/// feature rows (contiguous, for the distance scans) and the confidence
/// vectors cached at build time. Immutable after build.
struct CandidateBucket {
  std::vector<std::size_t> indices;  // dataset indices, ascending
  std::vector<double> features;      // indices.size() x dim, row-major
  std::vector<double> proba;         // indices.size() x num_classes, row-major

  std::size_t size() const { return indices.size(); }
};

struct CandidateIndex {
  int num_classes = 0;
  std::size_t dim = 0;
  std::vector<CandidateBucket> buckets;  // one per class

  std::size_t smallest_nonempty_bucket() const;
};

CandidateIndex build_candidate_index(const TrainedClassifier& model, const Dataset& ds,
                                     std::span<const std::size_t> train_idx);

/// Candidate utilities u_i = -||x_i - q||_p over a contiguous candidate
/// block. Values lie in [-2, 0] on the normalized domain.
std::vector<double> utility_scores(std::span<const double> query,
                                   std::span<const double> candidates, std::size_t dim,
                                   NormOrder p);

/// Privacy-scaled logits phi_i = epsilon * u_i / (2 * delta_u).
std::vector<double> logits(std::span<const double> utilities, double epsilon, double delta_u);

/// Gumbel-top-m: perturb each logit with independent Gumbel(0,1) noise and
/// keep the m largest scores (ties to the lowest index). Returns candidate
/// positions in ascending order.
std::vector<std::size_t> gumbel_top_m(std::span<const double> logit_values, std::size_t m,
                                      Rng& rng);

inline constexpr std::size_t kDefaultEnumerationCap = 200000;

/// Raised when an exact enumeration would exceed the configured cap;
/// callers must fall back to gumbel mode.
class EnumerationCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact exponential-mechanism draw over m-subsets: P(I) proportional to
/// exp(epsilon * U(I) / (2 delta_u)) with U(I) the summed utilities.
std::vector<std::size_t> exact_em_sample(std::span<const double> utilities, std::size_t m,
                                         double epsilon, double delta_u, Rng& rng,
                                         std::size_t enum_cap = kDefaultEnumerationCap);

/// Deterministic epsilon -> infinity limit: the m highest-utility
/// candidates, ties to the lowest index.
std::vector<std::size_t> top_m_by_utility(std::span<const double> utilities, std::size_t m);

struct NeighborSelection {
  std::vector<std::size_t> indices;  // dataset indices of selected neighbors
  std::vector<double> utilities;     // their negative-distance scores
  SamplerMode mode = SamplerMode::gumbel;
};

struct SmoothedOutput {
  ConfidenceVector original;
  ConfidenceVector smoothed;
  int predicted_label = 0;
  NeighborSelection selection;
  bool fallback = false;
};

/// Algorithm: predict, bucket by predicted label, sample m neighbors with
/// the configured sampler, release the mean of their cached confidence
/// vectors. Degenerate buckets fall back (all of S, or the original vector)
/// with the flag set.
SmoothedOutput defend(std::span<const double> query, const TrainedClassifier& model,
                      const CandidateIndex& index, const DefenseConfig& cfg, Rng& rng);

}  // namespace mialab

#endif  // MIALAB_DEFENSE_DEFENSE_HPP
