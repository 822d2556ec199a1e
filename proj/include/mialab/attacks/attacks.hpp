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

#ifndef MIALAB_ATTACKS_ATTACKS_HPP
#define MIALAB_ATTACKS_ATTACKS_HPP

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mialab/defense/defense.hpp"
#include "mialab/models/classifier.hpp"

namespace mialab {

/// One labeled observation for attack fitting or evaluation. Membership is
/// ground truth known to the evaluator (and to the attacker only on shadow
/// data).
struct AttackSample {
  ConfidenceVector confidence;
  int true_label = 0;
  bool member = false;
};

// ---- metric-based attack statistics ----------------------------------

/// Probability assigned to the true label; members tend to score high.
double confidence_score(const ConfidenceVector& v, int true_label);

/// Shannon entropy with 0 ln 0 = 0; members tend to score low.
double entropy_score(const ConfidenceVector& v);

/// Ground-truth-aware entropy variant, monotone decreasing in the
/// true-class probability and increasing in every wrong-class probability;
/// members tend to score low. Probabilities are clamped away from {0,1}.
double modified_entropy_score(const ConfidenceVector& v, int true_label);

enum class MetricKind { confidence, entropy, modified_entropy };
std::string to_string(MetricKind kind);
MetricKind metric_kind_from_string(const std::string& s);

enum class ThresholdDirection { member_if_geq, member_if_leq };

/// Which label keys the per-class threshold: the entropy attack sees no
/// ground truth and keys by predicted label.
enum class ThresholdKey { true_label, predicted_label };

struct ThresholdTable {
  ThresholdDirection direction = ThresholdDirection::member_if_geq;
  double global_threshold = 0.0;
  std::vector<double> per_class;  // valid where has_per_class[c] != 0
  std::vector<char> has_per_class;

  double threshold_for(int cls) const;
  bool decide(double score, int cls) const;
};

/// Per-class threshold sweep over midpoints between consecutive sorted
/// unique scores (plus open boundaries), maximizing balanced accuracy on
/// the shadow samples; ties pick the smaller threshold. Classes lacking
/// both members and non-members fall back to the global threshold.
ThresholdTable fit_thresholds(std::span<const AttackSample> shadow,
                              double (*score_fn)(const ConfidenceVector&, int),
                              ThresholdDirection direction, ThresholdKey key,
                              bool per_class, int num_classes);

// ---- fitted attacks ---------------------------------------------------

class FittedAttack {
 public:
  virtual ~FittedAttack() = default;
  virtual std::string name() const = 0;
  /// Raw attack statistic; the membership direction depends on the attack.
  virtual double membership_score(const ConfidenceVector& v, int true_label) const = 0;
  virtual bool is_member(const ConfidenceVector& v, int true_label) const = 0;
};

std::unique_ptr<FittedAttack> fit_metric_attack(MetricKind kind,
                                                std::span<const AttackSample> shadow,
                                                int num_classes, bool per_class = true);

struct ShadowEnsembleConfig {
  int num_shadow_models = 4;
  TrainConfig shadow_train;
  // member share of each shadow model's pool split; raise it to match the
  // target's training-set size when the pool is small
  double shadow_train_fraction = 0.5;
  bool per_class_attack_models = false;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Shadow-model protocol: partition the pool into num_shadow_models chunks
/// (stratified by class), train one shadow model per chunk on half of it,
/// and label its train half as members, held-out half as non-members. When
/// a defense config is supplied the shadow confidence vectors are passed
/// through the same defense (adaptive adversary).
std::vector<AttackSample> collect_shadow_samples(const Dataset& ds,
                                                 std::span<const std::size_t> pool,
                                                 const ShadowEnsembleConfig& cfg,
                                                 const std::optional<DefenseConfig>& defense);

/// Binary logistic regression over sorted confidence features fit on
/// shadow-derived samples.
std::unique_ptr<FittedAttack> fit_shadow_attack(std::span<const AttackSample> shadow,
                                                const ShadowEnsembleConfig& cfg,
                                                int num_classes);

/// Convenience wrapper: collect shadow samples, then fit.
std::unique_ptr<FittedAttack> fit_shadow_attack(const Dataset& ds,
                                                std::span<const std::size_t> pool,
                                                const ShadowEnsembleConfig& cfg,
                                                const std::optional<DefenseConfig>& defense);

struct AttackReport {
  std::string attack;
  double accuracy = 0.0;
  std::size_t n_eval = 0;  // members + non-members
  double mean_member_score = 0.0;
  double mean_nonmember_score = 0.0;

  nlohmann::json to_json() const;
};

/// Balanced-set attack accuracy: correct member calls plus correct
/// non-member calls over the total.
AttackReport evaluate_attack(const FittedAttack& attack,
                             std::span<const AttackSample> members,
                             std::span<const AttackSample> nonmembers);

}  // namespace mialab

#endif  // MIALAB_ATTACKS_ATTACKS_HPP
