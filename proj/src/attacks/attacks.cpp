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

#include "mialab/attacks/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mialab/models/logreg.hpp"

namespace mialab {

double confidence_score(const ConfidenceVector& v, int true_label) {
  if (true_label < 0 || static_cast<std::size_t>(true_label) >= v.size())
    throw std::invalid_argument("confidence_score: label out of range");
  return v[true_label];
}

double entropy_score(const ConfidenceVector& v) {
  double h = 0.0;
  for (double p : v)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

double modified_entropy_score(const ConfidenceVector& v, int true_label) {
  if (true_label < 0 || static_cast<std::size_t>(true_label) >= v.size())
    throw std::invalid_argument("modified_entropy_score: label out of range");
  auto clamp = [](double p) { return std::clamp(p, 1e-12, 1.0 - 1e-12); };
  const double p_y = clamp(v[true_label]);
  double score = -(1.0 - p_y) * std::log(p_y);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (static_cast<int>(i) == true_label) continue;
    const double p = clamp(v[i]);
    score -= p * std::log(1.0 - p);
  }
  return score;
}

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::confidence:
      return "confidence";
    case MetricKind::entropy:
      return "entropy";
    case MetricKind::modified_entropy:
      return "modified_entropy";
  }
  return "?";
}

MetricKind metric_kind_from_string(const std::string& s) {
  if (s == "confidence") return MetricKind::confidence;
  if (s == "entropy") return MetricKind::entropy;
  if (s == "modified_entropy") return MetricKind::modified_entropy;
  throw std::invalid_argument("unknown metric attack '" + s + "'");
}

double ThresholdTable::threshold_for(int cls) const {
  if (cls >= 0 && static_cast<std::size_t>(cls) < per_class.size() && has_per_class[cls])
    return per_class[cls];
  return global_threshold;
}

bool ThresholdTable::decide(double score, int cls) const {
  const double t = threshold_for(cls);
  return direction == ThresholdDirection::member_if_geq ? score >= t : score <= t;
}

namespace {

struct ScoredSample {
  double score;
  bool member;
};

// Sweep midpoints between consecutive distinct scores (plus the two open
// boundaries) and keep the threshold with the best balanced accuracy;
// among ties, the smallest.
double sweep_threshold(std::vector<ScoredSample>& scored, ThresholdDirection direction) {
  std::sort(scored.begin(), scored.end(),
            [](const ScoredSample& a, const ScoredSample& b) { return a.score < b.score; });
  std::vector<double> candidates;
  candidates.push_back(scored.front().score - 1.0);
  for (std::size_t i = 0; i + 1 < scored.size(); ++i)
    if (scored[i].score < scored[i + 1].score)
      candidates.push_back(0.5 * (scored[i].score + scored[i + 1].score));
  candidates.push_back(scored.back().score + 1.0);

  double n_members = 0.0, n_nonmembers = 0.0;
  for (const auto& s : scored) (s.member ? n_members : n_nonmembers) += 1.0;

  double best_threshold = candidates.front();
  double best_balanced = -1.0;
  for (double t : candidates) {
    double member_hits = 0.0, nonmember_hits = 0.0;
    for (const auto& s : scored) {
      const bool call_member =
          direction == ThresholdDirection::member_if_geq ? s.score >= t : s.score <= t;
      if (call_member == s.member) (s.member ? member_hits : nonmember_hits) += 1.0;
    }
    double balanced = 0.0;
    if (n_members > 0) balanced += 0.5 * member_hits / n_members;
    if (n_nonmembers > 0) balanced += 0.5 * nonmember_hits / n_nonmembers;
    if (balanced > best_balanced + 1e-12) {
      best_balanced = balanced;
      best_threshold = t;
    }
  }
  return best_threshold;
}

}  // namespace

ThresholdTable fit_thresholds(std::span<const AttackSample> shadow,
                              double (*score_fn)(const ConfidenceVector&, int),
                              ThresholdDirection direction, ThresholdKey key,
                              bool per_class, int num_classes) {
  if (shadow.empty()) throw std::invalid_argument("fit_thresholds: no shadow samples");

  ThresholdTable table;
  table.direction = direction;
  table.per_class.assign(static_cast<std::size_t>(num_classes), 0.0);
  table.has_per_class.assign(static_cast<std::size_t>(num_classes), 0);

  auto class_of = [&](const AttackSample& s) {
    return key == ThresholdKey::true_label ? s.true_label : argmax_lowest(s.confidence);
  };

  std::vector<ScoredSample> all;
  all.reserve(shadow.size());
  std::vector<std::vector<ScoredSample>> by_class(static_cast<std::size_t>(num_classes));
  for (const auto& s : shadow) {
    const ScoredSample scored{score_fn(s.confidence, s.true_label), s.member};
    all.push_back(scored);
    const int cls = class_of(s);
    if (cls >= 0 && cls < num_classes) by_class[cls].push_back(scored);
  }
  table.global_threshold = sweep_threshold(all, direction);

  if (per_class) {
    for (int c = 0; c < num_classes; ++c) {
      auto& group = by_class[c];
      const bool has_member = std::any_of(group.begin(), group.end(),
                                          [](const ScoredSample& s) { return s.member; });
      const bool has_nonmember = std::any_of(group.begin(), group.end(),
                                             [](const ScoredSample& s) { return !s.member; });
      if (has_member && has_nonmember) {
        table.per_class[c] = sweep_threshold(group, direction);
        table.has_per_class[c] = 1;
      }
    }
  }
  return table;
}

namespace {

class MetricAttack final : public FittedAttack {
 public:
  MetricAttack(MetricKind kind, ThresholdTable table)
      : kind_(kind), table_(std::move(table)) {}

  std::string name() const override { return to_string(kind_); }

  double membership_score(const ConfidenceVector& v, int true_label) const override {
    switch (kind_) {
      case MetricKind::confidence:
        return confidence_score(v, true_label);
      case MetricKind::entropy:
        return entropy_score(v);
      case MetricKind::modified_entropy:
        return modified_entropy_score(v, true_label);
    }
    return 0.0;
  }

  bool is_member(const ConfidenceVector& v, int true_label) const override {
    const int cls =
        kind_ == MetricKind::entropy ? argmax_lowest(v) : true_label;
    return table_.decide(membership_score(v, true_label), cls);
  }

 private:
  MetricKind kind_;
  ThresholdTable table_;
};

double score_confidence(const ConfidenceVector& v, int label) {
  return confidence_score(v, label);
}
double score_entropy(const ConfidenceVector& v, int) { return entropy_score(v); }
double score_mentr(const ConfidenceVector& v, int label) {
  return modified_entropy_score(v, label);
}

}  // namespace

std::unique_ptr<FittedAttack> fit_metric_attack(MetricKind kind,
                                                std::span<const AttackSample> shadow,
                                                int num_classes, bool per_class) {
  ThresholdTable table;
  switch (kind) {
    case MetricKind::confidence:
      table = fit_thresholds(shadow, score_confidence, ThresholdDirection::member_if_geq,
                             ThresholdKey::true_label, per_class, num_classes);
      break;
    case MetricKind::entropy:
      table = fit_thresholds(shadow, score_entropy, ThresholdDirection::member_if_leq,
                             ThresholdKey::predicted_label, per_class, num_classes);
      break;
    case MetricKind::modified_entropy:
      table = fit_thresholds(shadow, score_mentr, ThresholdDirection::member_if_leq,
                             ThresholdKey::true_label, per_class, num_classes);
      break;
  }
  return std::make_unique<MetricAttack>(kind, std::move(table));
}

void ShadowEnsembleConfig::validate() const {
  if (num_shadow_models < 1)
    throw std::invalid_argument("ShadowEnsembleConfig: num_shadow_models must be >= 1");
  if (!(shadow_train_fraction > 0.0 && shadow_train_fraction < 1.0))
    throw std::invalid_argument(
        "ShadowEnsembleConfig: shadow_train_fraction must lie in (0, 1)");
}

namespace {

// Sorted-descending confidence features strip label-permutation nuisance;
// appending the one-hot true label keeps class identity available to the
// single global attack model.
std::vector<double> attack_features(const ConfidenceVector& v, int true_label,
                                    int num_classes, bool append_label) {
  std::vector<double> f(v.begin(), v.end());
  std::sort(f.begin(), f.end(), std::greater<>());
  if (append_label) {
    for (int c = 0; c < num_classes; ++c) f.push_back(c == true_label ? 1.0 : 0.0);
  }
  return f;
}

Dataset attack_dataset(std::span<const AttackSample> shadow, int num_classes,
                       bool append_label) {
  Dataset ds;
  ds.num_classes = 2;
  ds.label_names = {"nonmember", "member"};
  for (const auto& s : shadow) {
    auto f = attack_features(s.confidence, s.true_label, num_classes, append_label);
    if (ds.dim == 0) ds.dim = f.size();
    ds.features.insert(ds.features.end(), f.begin(), f.end());
    ds.labels.push_back(s.member ? 1 : 0);
  }
  return ds;
}

class ShadowAttack final : public FittedAttack {
 public:
  ShadowAttack(std::unique_ptr<LogRegClassifier> global,
               std::vector<std::unique_ptr<LogRegClassifier>> per_class, int num_classes,
               bool append_label)
      : global_(std::move(global)),
        per_class_(std::move(per_class)),
        num_classes_(num_classes),
        append_label_(append_label) {}

  std::string name() const override { return "shadow"; }

  double membership_score(const ConfidenceVector& v, int true_label) const override {
    const LogRegClassifier* model = global_.get();
    if (true_label >= 0 && static_cast<std::size_t>(true_label) < per_class_.size() &&
        per_class_[true_label])
      model = per_class_[true_label].get();
    auto f = attack_features(v, true_label, num_classes_, append_label_);
    return model->predict_proba(f)[1];
  }

  bool is_member(const ConfidenceVector& v, int true_label) const override {
    return membership_score(v, true_label) >= 0.5;
  }

 private:
  std::unique_ptr<LogRegClassifier> global_;
  std::vector<std::unique_ptr<LogRegClassifier>> per_class_;
  int num_classes_;
  bool append_label_;
};

TrainConfig attack_classifier_config(std::uint64_t seed) {
  // the attack model is tiny (2C features); run it to convergence
  TrainConfig cfg;
  cfg.kind = ModelKind::logreg;
  cfg.learning_rate = 1.0;
  cfg.epochs = 3000;
  cfg.seed = seed;
  return cfg;
}

std::unique_ptr<LogRegClassifier> fit_binary_logreg(const Dataset& ds,
                                                    const TrainConfig& cfg) {
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto model = std::make_unique<LogRegClassifier>(2, ds.dim);
  model->fit(ds, all, cfg);
  return model;
}

}  // namespace

namespace {

// Deterministic downsample of the majority side so the attack
// classifier's 0.5 decision stays meaningful under unbalanced shadow
// splits.
std::vector<AttackSample> balance_members(std::span<const AttackSample> shadow) {
  std::size_t members = 0, nonmembers = 0;
  for (const auto& s : shadow) (s.member ? members : nonmembers) += 1;
  const std::size_t keep = std::min(members, nonmembers);
  if (keep == members && keep == nonmembers)
    return {shadow.begin(), shadow.end()};
  std::vector<AttackSample> balanced;
  std::size_t kept_members = 0, kept_nonmembers = 0;
  for (const auto& s : shadow) {
    auto& kept = s.member ? kept_members : kept_nonmembers;
    if (kept < keep) {
      balanced.push_back(s);
      ++kept;
    }
  }
  return balanced;
}

}  // namespace

std::unique_ptr<FittedAttack> fit_shadow_attack(std::span<const AttackSample> shadow_raw,
                                                const ShadowEnsembleConfig& cfg,
                                                int num_classes) {
  cfg.validate();
  if (shadow_raw.empty()) throw std::invalid_argument("fit_shadow_attack: no shadow samples");
  const auto shadow_balanced = balance_members(shadow_raw);
  const std::span<const AttackSample> shadow(shadow_balanced);
  const bool append_label = !cfg.per_class_attack_models;
  const auto train_cfg = attack_classifier_config(derive_seed(cfg.seed, "attack.classifier"));

  auto global = fit_binary_logreg(attack_dataset(shadow, num_classes, append_label), train_cfg);

  std::vector<std::unique_ptr<LogRegClassifier>> per_class;
  if (cfg.per_class_attack_models) {
    per_class.resize(static_cast<std::size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c) {
      std::vector<AttackSample> group;
      for (const auto& s : shadow)
        if (s.true_label == c) group.push_back(s);
      const bool has_member =
          std::any_of(group.begin(), group.end(), [](const auto& s) { return s.member; });
      const bool has_nonmember =
          std::any_of(group.begin(), group.end(), [](const auto& s) { return !s.member; });
      if (has_member && has_nonmember)
        per_class[c] =
            fit_binary_logreg(attack_dataset(group, num_classes, append_label), train_cfg);
    }
  }
  return std::make_unique<ShadowAttack>(std::move(global), std::move(per_class), num_classes,
                                        append_label);
}

std::vector<AttackSample> collect_shadow_samples(const Dataset& ds,
                                                 std::span<const std::size_t> pool,
                                                 const ShadowEnsembleConfig& cfg,
                                                 const std::optional<DefenseConfig>& defense) {
  cfg.validate();
  if (pool.size() < 2 * static_cast<std::size_t>(ds.num_classes))
    throw std::invalid_argument("collect_shadow_samples: shadow pool too small");

  // Shokri-style protocol: every shadow model gets its own random
  // half/half member/non-member split of the pool (training sets may
  // overlap across models), stratified by class so each model sees every
  // label on both sides.
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.num_classes));
  for (std::size_t i : pool) by_class[ds.labels[i]].push_back(i);

  std::vector<AttackSample> samples;
  for (std::size_t s = 0; s < static_cast<std::size_t>(cfg.num_shadow_models); ++s) {
    Rng split_rng(derive_seed(cfg.seed, "shadow.split", s));
    std::vector<std::size_t> train, test;
    for (auto& group : by_class) {
      if (group.empty()) continue;
      std::vector<std::size_t> shuffled = group;
      split_rng.shuffle(shuffled);
      const auto take = static_cast<std::size_t>(cfg.shadow_train_fraction *
                                                 static_cast<double>(shuffled.size()));
      if (take == 0 || take == shuffled.size())
        throw std::invalid_argument("collect_shadow_samples: class too small to split");
      train.insert(train.end(), shuffled.begin(), shuffled.begin() + take);
      test.insert(test.end(), shuffled.begin() + take, shuffled.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());

    TrainConfig shadow_cfg = cfg.shadow_train;
    shadow_cfg.seed = derive_seed(cfg.seed, "shadow.train", s);
    auto model = train_model(ds, train, shadow_cfg);

    std::optional<CandidateIndex> index;
    if (defense) index = build_candidate_index(*model, ds, train);

    const std::string stream = "shadow.defend." + std::to_string(s);
    std::uint64_t ordinal = 0;
    auto emit = [&](std::span<const std::size_t> idx, bool member) {
      for (std::size_t i : idx) {
        AttackSample sample;
        sample.true_label = ds.labels[i];
        sample.member = member;
        if (defense) {
          Rng rng(derive_seed(cfg.seed, stream, ordinal));
          sample.confidence = defend(ds.sample(i), *model, *index, *defense, rng).smoothed;
        } else {
          sample.confidence = model->predict_proba(ds.sample(i));
        }
        ++ordinal;
        samples.push_back(std::move(sample));
      }
    };
    emit(train, true);
    emit(test, false);
  }
  return samples;
}

std::unique_ptr<FittedAttack> fit_shadow_attack(const Dataset& ds,
                                                std::span<const std::size_t> pool,
                                                const ShadowEnsembleConfig& cfg,
                                                const std::optional<DefenseConfig>& defense) {
  const auto samples = collect_shadow_samples(ds, pool, cfg, defense);
  return fit_shadow_attack(samples, cfg, ds.num_classes);
}

nlohmann::json AttackReport::to_json() const {
  return {{"attack", attack},
          {"accuracy", accuracy},
          {"n_eval", n_eval},
          {"mean_member_score", mean_member_score},
          {"mean_nonmember_score", mean_nonmember_score}};
}

AttackReport evaluate_attack(const FittedAttack& attack,
                             std::span<const AttackSample> members,
                             std::span<const AttackSample> nonmembers) {
  if (members.empty() || nonmembers.empty())
    throw std::invalid_argument("evaluate_attack: empty evaluation set");
  if (members.size() != nonmembers.size())
    throw std::invalid_argument("evaluate_attack: evaluation sets must be balanced");

  AttackReport report;
  report.attack = attack.name();
  report.n_eval = members.size() + nonmembers.size();
  std::size_t hits = 0;
  for (const auto& s : members) {
    if (attack.is_member(s.confidence, s.true_label)) ++hits;
    report.mean_member_score += attack.membership_score(s.confidence, s.true_label);
  }
  for (const auto& s : nonmembers) {
    if (!attack.is_member(s.confidence, s.true_label)) ++hits;
    report.mean_nonmember_score += attack.membership_score(s.confidence, s.true_label);
  }
  report.mean_member_score /= static_cast<double>(members.size());
  report.mean_nonmember_score /= static_cast<double>(nonmembers.size());
  report.accuracy = static_cast<double>(hits) / static_cast<double>(report.n_eval);
  return report;
}

}  // namespace mialab
