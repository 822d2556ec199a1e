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

#include "mialab/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mialab/common/rng.hpp"
#include "mialab/kernels/kernels.hpp"

namespace mialab {

double norm_divisor(std::size_t dim, NormOrder p) {
  switch (p) {
    case NormOrder::l1:
      return static_cast<double>(dim);
    case NormOrder::l2:
      return std::sqrt(static_cast<double>(dim));
    case NormOrder::linf:
      return 1.0;
  }
  return 1.0;
}

double lp_norm(std::span<const double> v, NormOrder p) {
  std::vector<double> zeros(v.size(), 0.0);
  return lp_distance(v, zeros, p);
}

double lp_distance(std::span<const double> a, std::span<const double> b, NormOrder p) {
  if (a.size() != b.size())
    throw std::invalid_argument("lp_distance: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  switch (p) {
    case NormOrder::l1:
      return kernels::l1(a.data(), b.data(), a.size());
    case NormOrder::l2:
      return std::sqrt(kernels::l2_sq(a.data(), b.data(), a.size()));
    case NormOrder::linf:
      return kernels::linf(a.data(), b.data(), a.size());
  }
  return 0.0;
}

std::string to_string(NormOrder p) {
  switch (p) {
    case NormOrder::l1:
      return "1";
    case NormOrder::l2:
      return "2";
    case NormOrder::linf:
      return "inf";
  }
  return "?";
}

NormOrder norm_order_from_string(const std::string& s) {
  if (s == "1") return NormOrder::l1;
  if (s == "2") return NormOrder::l2;
  if (s == "inf") return NormOrder::linf;
  throw std::invalid_argument("unknown norm order '" + s + "' (expected 1, 2, or inf)");
}

std::vector<double> NormalizationSpec::apply(std::span<const double> raw) const {
  if (raw.size() != feat_min.size())
    throw std::invalid_argument("NormalizationSpec::apply: dimension mismatch");
  std::vector<double> out(raw.size());
  for (std::size_t f = 0; f < raw.size(); ++f) {
    double lo = feat_min[f], hi = feat_max[f];
    double v = std::clamp(raw[f], lo, hi);
    double scaled = (hi > lo) ? (v - lo) / (hi - lo) : 0.0;
    out[f] = scaled / divisor;
  }
  return out;
}

nlohmann::json NormalizationSpec::to_json() const {
  return {{"feat_min", feat_min},
          {"feat_max", feat_max},
          {"divisor", divisor},
          {"p", to_string(p)}};
}

NormalizationSpec NormalizationSpec::from_json(const nlohmann::json& j) {
  NormalizationSpec spec;
  spec.feat_min = j.at("feat_min").get<std::vector<double>>();
  spec.feat_max = j.at("feat_max").get<std::vector<double>>();
  spec.divisor = j.at("divisor").get<double>();
  spec.p = norm_order_from_string(j.at("p").get<std::string>());
  return spec;
}

nlohmann::json SplitPlan::to_json() const {
  return {{"target_train", target_train}, {"target_test", target_test},
          {"shadow_pool", shadow_pool},   {"eval_members", eval_members},
          {"eval_nonmembers", eval_nonmembers}, {"seed", seed}};
}

SplitPlan SplitPlan::from_json(const nlohmann::json& j) {
  SplitPlan plan;
  plan.target_train = j.at("target_train").get<std::vector<std::size_t>>();
  plan.target_test = j.at("target_test").get<std::vector<std::size_t>>();
  plan.shadow_pool = j.at("shadow_pool").get<std::vector<std::size_t>>();
  plan.eval_members = j.at("eval_members").get<std::vector<std::size_t>>();
  plan.eval_nonmembers = j.at("eval_nonmembers").get<std::vector<std::size_t>>();
  plan.seed = j.at("seed").get<std::uint64_t>();
  return plan;
}

namespace {

// RFC-4180 field splitting: quoted fields may contain commas, doubled
// quotes, and newlines.
std::vector<std::vector<std::string>> parse_csv_records(std::istream& in,
                                                        const std::string& path) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool row_started = false;
  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty())
          throw std::runtime_error(path + ": stray quote inside unquoted field at record " +
                                   std::to_string(records.size() + 1));
        in_quotes = true;
        field_started = true;
        row_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
        row_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_started || field_started || !field.empty()) {
          row.push_back(std::move(field));
          field.clear();
          records.push_back(std::move(row));
          row.clear();
        }
        field_started = false;
        row_started = false;
        break;
      default:
        field.push_back(c);
        field_started = true;
        row_started = true;
    }
  }
  if (in_quotes) throw std::runtime_error(path + ": unterminated quoted field");
  if (row_started || !field.empty()) {
    row.push_back(std::move(field));
    records.push_back(std::move(row));
  }
  return records;
}

double parse_numeric_cell(const std::string& cell, std::size_t row,
                          const std::string& column) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || end != begin + cell.size() || !std::isfinite(v))
    throw std::runtime_error("unparsable numeric cell '" + cell + "' at row " +
                             std::to_string(row) + ", column '" + column + "'");
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::set<std::string>& categorical_columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  auto records = parse_csv_records(in, path);
  if (records.empty()) throw std::runtime_error(path + ": empty file");
  const auto& header = records.front();
  if (records.size() < 2) throw std::runtime_error(path + ": no data rows");

  std::size_t label_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == label_column) label_col = i;
  if (label_col == header.size())
    throw std::runtime_error(path + ": unknown label column '" + label_column + "'");
  for (const auto& col : categorical_columns) {
    if (std::find(header.begin(), header.end(), col) == header.end())
      throw std::runtime_error(path + ": unknown categorical column '" + col + "'");
  }

  const std::size_t arity = header.size();
  const std::size_t n = records.size() - 1;

  // first pass: arity check + category vocabularies in first-appearance order
  std::vector<std::vector<std::string>> cat_values(arity);
  std::vector<std::string> label_values;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& row = records[r];
    if (row.size() != arity)
      throw std::runtime_error(path + ": row " + std::to_string(r) + " has " +
                               std::to_string(row.size()) + " fields, expected " +
                               std::to_string(arity));
    for (std::size_t c = 0; c < arity; ++c) {
      if (c == label_col) {
        if (std::find(label_values.begin(), label_values.end(), row[c]) == label_values.end())
          label_values.push_back(row[c]);
      } else if (categorical_columns.count(header[c])) {
        auto& vocab = cat_values[c];
        if (std::find(vocab.begin(), vocab.end(), row[c]) == vocab.end())
          vocab.push_back(row[c]);
      }
    }
  }

  Dataset ds;
  ds.num_classes = static_cast<int>(label_values.size());
  ds.label_names = label_values;
  for (std::size_t c = 0; c < arity; ++c) {
    if (c == label_col) continue;
    if (categorical_columns.count(header[c])) {
      for (const auto& v : cat_values[c]) ds.feature_names.push_back(header[c] + "=" + v);
    } else {
      ds.feature_names.push_back(header[c]);
    }
  }
  ds.dim = ds.feature_names.size();
  ds.features.reserve(n * ds.dim);
  ds.labels.reserve(n);

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& row = records[r];
    for (std::size_t c = 0; c < arity; ++c) {
      if (c == label_col) continue;
      if (categorical_columns.count(header[c])) {
        const auto& vocab = cat_values[c];
        auto it = std::find(vocab.begin(), vocab.end(), row[c]);
        for (std::size_t k = 0; k < vocab.size(); ++k)
          ds.features.push_back(k == static_cast<std::size_t>(it - vocab.begin()) ? 1.0 : 0.0);
      } else {
        ds.features.push_back(parse_numeric_cell(row[c], r, header[c]));
      }
    }
    const auto it = std::find(label_values.begin(), label_values.end(), row[label_col]);
    ds.labels.push_back(static_cast<int>(it - label_values.begin()));
  }
  return ds;
}

std::pair<Dataset, NormalizationSpec> normalize(const Dataset& ds, NormOrder p) {
  if (ds.size() == 0) throw std::invalid_argument("normalize: empty dataset");
  NormalizationSpec spec;
  spec.p = p;
  spec.divisor = norm_divisor(ds.dim, p);
  spec.feat_min.assign(ds.dim, std::numeric_limits<double>::infinity());
  spec.feat_max.assign(ds.dim, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto x = ds.sample(i);
    for (std::size_t f = 0; f < ds.dim; ++f) {
      if (std::isnan(x[f])) throw std::invalid_argument("normalize: NaN feature value");
      spec.feat_min[f] = std::min(spec.feat_min[f], x[f]);
      spec.feat_max[f] = std::max(spec.feat_max[f], x[f]);
    }
  }
  Dataset out = ds;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto scaled = spec.apply(ds.sample(i));
    std::copy(scaled.begin(), scaled.end(), out.features.begin() + i * ds.dim);
  }
  out.normalization = spec;
  return {std::move(out), std::move(spec)};
}

SplitPlan split(const Dataset& ds, const SplitFractions& fractions,
                std::size_t eval_size, std::uint64_t seed) {
  const std::size_t n = ds.size();
  const double sum = fractions.target_train + fractions.target_test + fractions.shadow_pool;
  if (fractions.target_train < 0 || fractions.target_test < 0 || fractions.shadow_pool < 0 ||
      sum > 1.0 + 1e-9)
    throw std::invalid_argument("split: fractions must be nonnegative and sum to <= 1");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const auto n_train = static_cast<std::size_t>(fractions.target_train * n);
  const auto n_test = static_cast<std::size_t>(fractions.target_test * n);
  const auto n_shadow = static_cast<std::size_t>(fractions.shadow_pool * n);
  if (n_train == 0 || n_test == 0 || n_shadow == 0)
    throw std::invalid_argument("split: empty partition");
  if (eval_size > std::min(n_train, n_test))
    throw std::invalid_argument("split: eval_size " + std::to_string(eval_size) +
                                " exceeds partition size " +
                                std::to_string(std::min(n_train, n_test)));

  SplitPlan plan;
  plan.seed = seed;
  plan.target_train.assign(order.begin(), order.begin() + n_train);
  plan.target_test.assign(order.begin() + n_train, order.begin() + n_train + n_test);
  plan.shadow_pool.assign(order.begin() + n_train + n_test,
                          order.begin() + n_train + n_test + n_shadow);
  plan.eval_members.assign(plan.target_train.begin(), plan.target_train.begin() + eval_size);
  plan.eval_nonmembers.assign(plan.target_test.begin(), plan.target_test.begin() + eval_size);
  std::sort(plan.target_train.begin(), plan.target_train.end());
  std::sort(plan.target_test.begin(), plan.target_test.end());
  std::sort(plan.shadow_pool.begin(), plan.shadow_pool.end());
  std::sort(plan.eval_members.begin(), plan.eval_members.end());
  std::sort(plan.eval_nonmembers.begin(), plan.eval_nonmembers.end());
  return plan;
}

Dataset synth_blobs(int num_classes, std::size_t dim, std::size_t per_class,
                    double spread, std::uint64_t seed, NormOrder p) {
  if (num_classes < 2) throw std::invalid_argument("synth_blobs: need >= 2 classes");
  if (dim < 1 || per_class < 1) throw std::invalid_argument("synth_blobs: bad shape");
  if (spread <= 0) throw std::invalid_argument("synth_blobs: spread must be positive");

  Rng rng(seed);
  std::vector<double> centers(static_cast<std::size_t>(num_classes) * dim);
  for (auto& v : centers) v = rng.uniform01();

  Dataset ds;
  ds.dim = dim;
  ds.num_classes = num_classes;
  ds.features.reserve(static_cast<std::size_t>(num_classes) * per_class * dim);
  for (int c = 0; c < num_classes; ++c) {
    ds.label_names.push_back("blob_" + std::to_string(c));
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t f = 0; f < dim; ++f)
        ds.features.push_back(centers[static_cast<std::size_t>(c) * dim + f] +
                              spread * rng.normal());
      ds.labels.push_back(c);
    }
  }
  for (std::size_t f = 0; f < dim; ++f) ds.feature_names.push_back("x" + std::to_string(f));
  return normalize(ds, p).first;
}

}  // namespace mialab
