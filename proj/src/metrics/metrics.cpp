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

#include "mialab/metrics/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "mialab/kernels/kernels.hpp"

namespace mialab {

namespace {

void check_pair(const DistortionPair& p) {
  if (p.original.size() != p.smoothed.size())
    throw std::invalid_argument("distortion pair: dimension mismatch");
}

}  // namespace

double pcd(std::span<const DistortionPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("pcd: empty input");
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : pairs) {
    check_pair(p);
    if (p.fallback) continue;
    sum += std::fabs(p.original[p.predicted_label] - p.smoothed[p.predicted_label]);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double cvd(std::span<const DistortionPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("cvd: empty input");
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : pairs) {
    check_pair(p);
    if (p.fallback) continue;
    sum += std::sqrt(kernels::l2_sq(p.original.data(), p.smoothed.data(), p.original.size()));
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double label_loss_rate(std::span<const DistortionPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("label_loss_rate: empty input");
  std::size_t losses = 0;
  for (const auto& p : pairs) {
    check_pair(p);
    if (argmax_lowest(p.smoothed) != p.predicted_label) ++losses;
  }
  return static_cast<double>(losses) / static_cast<double>(pairs.size());
}

double fallback_rate(std::span<const DistortionPair> pairs) {
  if (pairs.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& p : pairs)
    if (p.fallback) ++n;
  return static_cast<double>(n) / static_cast<double>(pairs.size());
}

double accuracy_drop(double acc_no_def, double acc_with_def) {
  if (acc_no_def < 0 || acc_no_def > 1 || acc_with_def < 0 || acc_with_def > 1)
    throw std::invalid_argument("accuracy_drop: accuracies must lie in [0,1]");
  return acc_no_def - acc_with_def;
}

nlohmann::json DistortionReport::to_json() const {
  return {{"pcd", pcd},
          {"cvd", cvd},
          {"label_loss_rate", label_loss_rate},
          {"fallback_rate", fallback_rate},
          {"n_queries", n_queries}};
}

DistortionReport distortion_report(std::span<const DistortionPair> pairs) {
  DistortionReport report;
  report.pcd = pcd(pairs);
  report.cvd = cvd(pairs);
  report.label_loss_rate = label_loss_rate(pairs);
  report.fallback_rate = fallback_rate(pairs);
  report.n_queries = pairs.size();
  return report;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

CorrelationTable correlation_table(std::span<const ExperimentCell> cells) {
  if (cells.empty()) throw std::invalid_argument("correlation_table: no cells");
  CorrelationTable table;
  std::vector<double> drops, cvds;
  for (const auto& cell : cells) {
    CorrelationRow row;
    row.dataset = cell.dataset;
    row.model = cell.model;
    row.accuracy_drop = accuracy_drop(cell.accuracy_no_defense, cell.accuracy_with_defense);
    row.cvd = cell.distortion.cvd;
    row.pcd = cell.distortion.pcd;
    drops.push_back(row.accuracy_drop);
    cvds.push_back(row.cvd);
    table.rows.push_back(std::move(row));
  }
  table.pearson_r = pearson(drops, cvds);
  return table;
}

}  // namespace mialab
