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

#ifndef MIALAB_DATA_DATASET_HPP
#define MIALAB_DATA_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace mialab {

enum class NormOrder { l1, l2, linf };

double norm_divisor(std::size_t dim, NormOrder p);
double lp_norm(std::span<const double> v, NormOrder p);
double lp_distance(std::span<const double> a, std::span<const double> b, NormOrder p);
std::string to_string(NormOrder p);
NormOrder norm_order_from_string(const std::string& s);

/// Per-feature min-max bounds plus the global divisor that pins every
/// in-range vector inside the unit Lp ball.
struct NormalizationSpec {
  std::vector<double> feat_min;
  std::vector<double> feat_max;
  double divisor = 1.0;
  NormOrder p = NormOrder::l2;

  /// Scale a raw vector into the bounded domain. Out-of-range values are
  /// clipped to the training bounds first, so the domain bound holds for
  /// adversarial queries too.
  std::vector<double> apply(std::span<const double> raw) const;

  nlohmann::json to_json() const;
  static NormalizationSpec from_json(const nlohmann::json& j);
};

/// Labeled samples stored row-major, plus the label/feature naming needed
/// to report original categories.
struct Dataset {
  std::vector<double> features;  // size() * dim, row-major
  std::vector<int> labels;
  std::size_t dim = 0;
  int num_classes = 0;
  std::vector<std::string> label_names;
  std::vector<std::string> feature_names;
  std::optional<NormalizationSpec> normalization;

  std::size_t size() const { return labels.size(); }
  std::span<const double> sample(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }
};

struct SplitFractions {
  double target_train = 0.0;
  double target_test = 0.0;
  double shadow_pool = 0.0;
};

/// Index sets for one experiment: the three pools are pairwise disjoint,
/// eval_members come from target_train, eval_nonmembers from target_test,
/// and the two eval sets are balanced.
struct SplitPlan {
  std::vector<std::size_t> target_train;
  std::vector<std::size_t> target_test;
  std::vector<std::size_t> shadow_pool;
  std::vector<std::size_t> eval_members;
  std::vector<std::size_t> eval_nonmembers;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static SplitPlan from_json(const nlohmann::json& j);
};

/// Load an RFC-4180 CSV with a header row. Columns listed in
/// `categorical_columns` are one-hot encoded (category order = first
/// appearance); the label column is mapped to dense class indices in first
/// appearance order; everything else is parsed as a real number.
/// Parse failures report row and column context.
Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::set<std::string>& categorical_columns = {});

/// Min-max scale each feature to [0,1], then divide by d^(1/p) (1 for
/// p = inf) so that every representable in-range vector satisfies
/// ||x||_p <= 1. Constant features map to 0.
std::pair<Dataset, NormalizationSpec> normalize(const Dataset& ds, NormOrder p);

/// Deterministic shuffle-and-partition under `seed`.
SplitPlan split(const Dataset& ds, const SplitFractions& fractions,
                std::size_t eval_size, std::uint64_t seed);

/// Isotropic Gaussian blobs, one cluster per class, labels = cluster id,
/// already normalized per the normalize(., p) convention.
Dataset synth_blobs(int num_classes, std::size_t dim, std::size_t per_class,
                    double spread, std::uint64_t seed, NormOrder p = NormOrder::l2);

}  // namespace mialab

#endif  // MIALAB_DATA_DATASET_HPP
