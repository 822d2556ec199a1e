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

#ifndef MIALAB_METRICS_METRICS_HPP
#define MIALAB_METRICS_METRICS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mialab/models/classifier.hpp"

namespace mialab {

/// One (original, smoothed) confidence pair with the original predicted
/// label and the defense fallback flag.
struct DistortionPair {
  ConfidenceVector original;
  ConfidenceVector smoothed;
  int predicted_label = 0;
  bool fallback = false;
};

/// Mean |original[y] - smoothed[y]| at the predicted class, over
/// non-fallback pairs.
double pcd(std::span<const DistortionPair> pairs);

/// Mean Euclidean distance between original and smoothed vectors, over
/// non-fallback pairs.
double cvd(std::span<const DistortionPair> pairs);

/// Fraction of pairs (fallbacks included) whose smoothed argmax differs
/// from the original predicted label.
double label_loss_rate(std::span<const DistortionPair> pairs);

double fallback_rate(std::span<const DistortionPair> pairs);

/// Signed attack accuracy drop: no_def - with_def.
double accuracy_drop(double acc_no_def, double acc_with_def);

struct DistortionReport {
  double pcd = 0.0;
  double cvd = 0.0;
  double label_loss_rate = 0.0;
  double fallback_rate = 0.0;
  std::size_t n_queries = 0;

  nlohmann::json to_json() const;
};

DistortionReport distortion_report(std::span<const DistortionPair> pairs);

/// One (dataset, model, attack) measurement with and without the defense.
struct ExperimentCell {
  std::string dataset;
  std::string model;
  std::string attack;
  double accuracy_no_defense = 0.0;
  double accuracy_with_defense = 0.0;
  DistortionReport distortion;
  std::size_t n_eval = 0;
  std::uint64_t seed = 0;
};

struct CorrelationRow {
  std::string dataset;
  std::string model;
  double accuracy_drop = 0.0;
  double cvd = 0.0;
  double pcd = 0.0;
};

/// The flat table behind the dataset-by-model heatmaps plus the Pearson
/// correlation between accuracy drop and CVD (absent when degenerate).
struct CorrelationTable {
  std::vector<CorrelationRow> rows;
  std::optional<double> pearson_r;
};

CorrelationTable correlation_table(std::span<const ExperimentCell> cells);

/// Pearson correlation; empty when either variance is zero.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

}  // namespace mialab

#endif  // MIALAB_METRICS_METRICS_HPP
