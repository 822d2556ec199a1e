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

#include "mialab/harness/config.hpp"

#include <cmath>
#include <fstream>

namespace mialab {

namespace {

void expect_keys(const nlohmann::json& obj, const std::string& path,
                 std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) known = true;
    if (!known) throw ConfigError(path + ": unknown key '" + key + "'");
  }
}

const nlohmann::json& require(const nlohmann::json& obj, const std::string& path,
                              const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + ": missing required key '" + key + "'");
  return *it;
}

double parse_epsilon(const nlohmann::json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kEpsilonInf;
    throw ConfigError(path + ": epsilon must be a positive number or \"inf\"");
  }
  const double eps = j.get<double>();
  if (!(eps > 0)) throw ConfigError(path + ": epsilon must be > 0");
  return eps;
}

SplitSpec parse_split(const nlohmann::json& s, const std::string& path,
                      const SplitSpec& defaults) {
  SplitSpec split = defaults;
  expect_keys(s, path, {"target_train", "target_test", "shadow_pool", "eval_size"});
  if (s.contains("target_train")) split.target_train = s.at("target_train").get<double>();
  if (s.contains("target_test")) split.target_test = s.at("target_test").get<double>();
  if (s.contains("shadow_pool")) split.shadow_pool = s.at("shadow_pool").get<double>();
  if (s.contains("eval_size")) split.eval_size = s.at("eval_size").get<std::size_t>();
  return split;
}

DatasetSpec parse_dataset(const nlohmann::json& j, const std::string& path) {
  DatasetSpec spec;
  spec.name = require(j, path, "name").get<std::string>();
  const auto kind = require(j, path, "kind").get<std::string>();
  if (kind == "csv") {
    spec.kind = DatasetSpec::Kind::csv;
    expect_keys(j, path, {"name", "kind", "path", "label_column", "categorical_columns", "split"});
    spec.path = require(j, path, "path").get<std::string>();
    spec.label_column = require(j, path, "label_column").get<std::string>();
    if (j.contains("categorical_columns"))
      for (const auto& c : j.at("categorical_columns"))
        spec.categorical_columns.insert(c.get<std::string>());
  } else if (kind == "synth") {
    spec.kind = DatasetSpec::Kind::synth;
    expect_keys(j, path, {"name", "kind", "classes", "dim", "per_class", "spread", "split"});
    spec.classes = require(j, path, "classes").get<int>();
    spec.dim = require(j, path, "dim").get<std::size_t>();
    spec.per_class = require(j, path, "per_class").get<std::size_t>();
    spec.spread = require(j, path, "spread").get<double>();
    if (spec.classes < 2) throw ConfigError(path + ".classes: need >= 2");
    if (spec.spread <= 0) throw ConfigError(path + ".spread: must be > 0");
  } else {
    throw ConfigError(path + ".kind: expected 'csv' or 'synth', got '" + kind + "'");
  }
  if (j.contains("split")) spec.split = parse_split(j.at("split"), path + ".split", SplitSpec{});
  return spec;
}

TrainConfig parse_model(const nlohmann::json& j, const std::string& path) {
  expect_keys(j, path, {"kind", "learning_rate", "epochs", "hidden", "batch_size", "num_trees",
                        "max_depth", "leaf_alpha", "max_features"});
  TrainConfig cfg;
  cfg.kind = model_kind_from_string(require(j, path, "kind").get<std::string>());
  if (j.contains("learning_rate")) cfg.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<int>();
  if (j.contains("hidden")) cfg.hidden = j.at("hidden").get<std::vector<int>>();
  if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<int>();
  if (j.contains("num_trees")) cfg.num_trees = j.at("num_trees").get<int>();
  if (j.contains("max_depth")) cfg.max_depth = j.at("max_depth").get<int>();
  if (j.contains("leaf_alpha")) cfg.leaf_alpha = j.at("leaf_alpha").get<double>();
  if (j.contains("max_features")) cfg.max_features = j.at("max_features").get<int>();
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return cfg;
}

}  // namespace

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  expect_keys(j, "config",
              {"seed", "output_dir", "norm_p", "datasets", "split", "models", "defense",
               "attacks"});
  ExperimentConfig cfg;
  cfg.master_seed = require(j, "config", "seed").get<std::uint64_t>();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("norm_p"))
    cfg.norm_p = norm_order_from_string(j.at("norm_p").get<std::string>());

  const auto& datasets = require(j, "config", "datasets");
  if (!datasets.is_array() || datasets.empty())
    throw ConfigError("config.datasets: need at least one dataset");
  for (std::size_t i = 0; i < datasets.size(); ++i)
    cfg.datasets.push_back(
        parse_dataset(datasets[i], "config.datasets[" + std::to_string(i) + "]"));
  for (std::size_t i = 0; i < cfg.datasets.size(); ++i)
    for (std::size_t k = i + 1; k < cfg.datasets.size(); ++k)
      if (cfg.datasets[i].name == cfg.datasets[k].name)
        throw ConfigError("config.datasets: duplicate name '" + cfg.datasets[i].name + "'");

  if (j.contains("split")) cfg.split = parse_split(j.at("split"), "config.split", cfg.split);

  const auto& models = require(j, "config", "models");
  if (!models.is_array() || models.empty())
    throw ConfigError("config.models: need at least one model");
  for (std::size_t i = 0; i < models.size(); ++i)
    cfg.models.push_back(parse_model(models[i], "config.models[" + std::to_string(i) + "]"));

  if (j.contains("defense")) {
    const auto& d = j.at("defense");
    expect_keys(d, "config.defense", {"m", "epsilon", "sampler", "delta_u"});
    if (d.contains("m")) {
      if (d.at("m").is_string()) {
        if (d.at("m").get<std::string>() != "auto")
          throw ConfigError("config.defense.m: expected a positive integer or \"auto\"");
      } else {
        cfg.defense.m = d.at("m").get<int>();
        if (*cfg.defense.m < 1) throw ConfigError("config.defense.m: must be >= 1");
      }
    }
    if (d.contains("epsilon")) cfg.defense.epsilon = parse_epsilon(d.at("epsilon"), "config.defense");
    if (d.contains("sampler"))
      cfg.defense.sampler = sampler_mode_from_string(d.at("sampler").get<std::string>());
    if (d.contains("delta_u")) {
      cfg.defense.delta_u = d.at("delta_u").get<double>();
      if (!(cfg.defense.delta_u > 0)) throw ConfigError("config.defense.delta_u: must be > 0");
    }
  }

  if (j.contains("attacks")) {
    const auto& a = j.at("attacks");
    expect_keys(a, "config.attacks",
                {"kinds", "num_shadow_models", "shadow_train_fraction",
                 "per_class_attack_models", "per_class_thresholds", "adaptive"});
    if (a.contains("kinds")) {
      cfg.attacks.kinds = a.at("kinds").get<std::vector<std::string>>();
      for (const auto& kind : cfg.attacks.kinds)
        if (kind != "shadow") metric_kind_from_string(kind);  // validates
      if (cfg.attacks.kinds.empty()) throw ConfigError("config.attacks.kinds: empty");
    }
    if (a.contains("num_shadow_models")) {
      cfg.attacks.num_shadow_models = a.at("num_shadow_models").get<int>();
      if (cfg.attacks.num_shadow_models < 1)
        throw ConfigError("config.attacks.num_shadow_models: must be >= 1");
    }
    if (a.contains("shadow_train_fraction")) {
      cfg.attacks.shadow_train_fraction = a.at("shadow_train_fraction").get<double>();
      if (!(cfg.attacks.shadow_train_fraction > 0.0 &&
            cfg.attacks.shadow_train_fraction < 1.0))
        throw ConfigError("config.attacks.shadow_train_fraction: must lie in (0, 1)");
    }
    if (a.contains("per_class_attack_models"))
      cfg.attacks.per_class_attack_models = a.at("per_class_attack_models").get<bool>();
    if (a.contains("per_class_thresholds"))
      cfg.attacks.per_class_thresholds = a.at("per_class_thresholds").get<bool>();
    if (a.contains("adaptive")) cfg.attacks.adaptive = a.at("adaptive").get<bool>();
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_experiment_config(j);
}

nlohmann::json ExperimentConfig::to_json() const {
  auto split_json = [](const SplitSpec& s) {
    nlohmann::json sj = {{"target_train", s.target_train},
                         {"target_test", s.target_test},
                         {"shadow_pool", s.shadow_pool}};
    if (s.eval_size) sj["eval_size"] = *s.eval_size;
    return sj;
  };
  nlohmann::json datasets_j = nlohmann::json::array();
  for (const auto& d : datasets) {
    nlohmann::json dj = {{"name", d.name}};
    if (d.kind == DatasetSpec::Kind::csv) {
      dj["kind"] = "csv";
      dj["path"] = d.path;
      dj["label_column"] = d.label_column;
      dj["categorical_columns"] = d.categorical_columns;
    } else {
      dj["kind"] = "synth";
      dj["classes"] = d.classes;
      dj["dim"] = d.dim;
      dj["per_class"] = d.per_class;
      dj["spread"] = d.spread;
    }
    if (d.split) dj["split"] = split_json(*d.split);
    datasets_j.push_back(std::move(dj));
  }
  nlohmann::json models_j = nlohmann::json::array();
  for (const auto& m : models) {
    models_j.push_back({{"kind", to_string(m.kind)},
                        {"learning_rate", m.learning_rate},
                        {"epochs", m.epochs},
                        {"hidden", m.hidden},
                        {"batch_size", m.batch_size},
                        {"num_trees", m.num_trees},
                        {"max_depth", m.max_depth},
                        {"leaf_alpha", m.leaf_alpha},
                        {"max_features", m.max_features}});
  }
  nlohmann::json split_j = split_json(split);
  nlohmann::json defense_j = {
      {"m", defense.m ? nlohmann::json(*defense.m) : nlohmann::json("auto")},
      {"epsilon",
       std::isinf(defense.epsilon) ? nlohmann::json("inf") : nlohmann::json(defense.epsilon)},
      {"sampler", to_string(defense.sampler)},
      {"delta_u", defense.delta_u}};
  nlohmann::json attacks_j = {{"kinds", attacks.kinds},
                              {"num_shadow_models", attacks.num_shadow_models},
                              {"shadow_train_fraction", attacks.shadow_train_fraction},
                              {"per_class_attack_models", attacks.per_class_attack_models},
                              {"per_class_thresholds", attacks.per_class_thresholds},
                              {"adaptive", attacks.adaptive}};
  return {{"seed", master_seed},   {"output_dir", output_dir}, {"norm_p", to_string(norm_p)},
          {"datasets", datasets_j}, {"split", split_j},         {"models", models_j},
          {"defense", defense_j},   {"attacks", attacks_j}};
}

AuditConfig parse_audit_config(const nlohmann::json& j) {
  expect_keys(j, "audit",
              {"seed", "candidate_sizes", "subset_sizes", "epsilons", "ratio_instances",
               "tv_instances", "tv_draws", "tv_limit", "tail_ts", "tail_trials",
               "tail_instances"});
  AuditConfig cfg;
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("candidate_sizes"))
    cfg.candidate_sizes = j.at("candidate_sizes").get<std::vector<std::size_t>>();
  if (j.contains("subset_sizes"))
    cfg.subset_sizes = j.at("subset_sizes").get<std::vector<std::size_t>>();
  if (j.contains("epsilons")) cfg.epsilons = j.at("epsilons").get<std::vector<double>>();
  if (j.contains("ratio_instances"))
    cfg.ratio_instances = j.at("ratio_instances").get<std::size_t>();
  if (j.contains("tv_instances")) cfg.tv_instances = j.at("tv_instances").get<std::size_t>();
  if (j.contains("tv_draws")) cfg.tv_draws = j.at("tv_draws").get<std::size_t>();
  if (j.contains("tv_limit")) cfg.tv_limit = j.at("tv_limit").get<double>();
  if (j.contains("tail_ts")) cfg.tail_ts = j.at("tail_ts").get<std::vector<double>>();
  if (j.contains("tail_trials")) cfg.tail_trials = j.at("tail_trials").get<std::size_t>();
  if (j.contains("tail_instances"))
    cfg.tail_instances = j.at("tail_instances").get<std::size_t>();
  if (cfg.candidate_sizes.empty() || cfg.subset_sizes.empty() || cfg.epsilons.empty())
    throw ConfigError("audit: candidate_sizes, subset_sizes, epsilons must be nonempty");
  for (double eps : cfg.epsilons)
    if (!(eps > 0) || std::isinf(eps))
      throw ConfigError("audit.epsilons: entries must be finite and > 0");
  return cfg;
}

AuditConfig load_audit_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open audit config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_audit_config(j);
}

nlohmann::json AuditConfig::to_json() const {
  return {{"seed", seed},
          {"candidate_sizes", candidate_sizes},
          {"subset_sizes", subset_sizes},
          {"epsilons", epsilons},
          {"ratio_instances", ratio_instances},
          {"tv_instances", tv_instances},
          {"tv_draws", tv_draws},
          {"tv_limit", tv_limit},
          {"tail_ts", tail_ts},
          {"tail_trials", tail_trials},
          {"tail_instances", tail_instances}};
}

}  // namespace mialab
