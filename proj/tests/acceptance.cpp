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

// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Everything runs at desk scale with pinned seeds and tolerances.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "mialab/defense/audit.hpp"
#include "mialab/harness/harness.hpp"
#include "mialab/models/mlp.hpp"

using namespace mialab;

namespace {

struct CriterionResult {
  int id;
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

// mirrors configs/desk.json with absolute data paths
ExperimentConfig desk_config() {
  ExperimentConfig cfg;
  cfg.master_seed = 7;
  cfg.norm_p = NormOrder::l2;

  DatasetSpec iris;
  iris.name = "iris";
  iris.kind = DatasetSpec::Kind::csv;
  iris.path = std::string(MIALAB_DATA_DIR) + "/iris.csv";
  iris.label_column = "species";
  cfg.datasets.push_back(iris);

  DatasetSpec blobs;
  blobs.name = "blobs_hi";
  blobs.kind = DatasetSpec::Kind::synth;
  blobs.classes = 10;
  blobs.dim = 20;
  blobs.per_class = 60;
  blobs.spread = 0.4;
  blobs.split = SplitSpec{0.3, 0.3, 0.4, 150};
  cfg.datasets.push_back(blobs);

  cfg.split.target_train = 0.3;
  cfg.split.target_test = 0.3;
  cfg.split.shadow_pool = 0.4;
  cfg.split.eval_size = 40;

  TrainConfig logreg;
  logreg.kind = ModelKind::logreg;
  logreg.learning_rate = 0.5;
  logreg.epochs = 150;
  cfg.models.push_back(logreg);

  TrainConfig tree;
  tree.kind = ModelKind::tree_ensemble;
  tree.num_trees = 15;
  cfg.models.push_back(tree);

  TrainConfig mlp;
  mlp.kind = ModelKind::mlp;
  mlp.hidden = {32, 16};
  mlp.learning_rate = 0.3;
  mlp.epochs = 40;
  mlp.batch_size = 16;
  cfg.models.push_back(mlp);

  cfg.defense.m.reset();  // auto: 5 dense / 3 sparse
  cfg.defense.epsilon = 1.0;
  cfg.defense.sampler = SamplerMode::gumbel;

  cfg.attacks.kinds = {"shadow", "confidence", "entropy", "modified_entropy"};
  cfg.attacks.num_shadow_models = 2;
  cfg.attacks.adaptive = true;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const AttackCellResult* find_attack(const CellResult& cell, const std::string& attack) {
  for (const auto& a : cell.attacks)
    if (a.attack == attack) return &a;
  return nullptr;
}

// ---- criterion 1: zero label loss everywhere -------------------------

CriterionResult criterion_zero_label_loss(const ExperimentConfig& cfg) {
  CriterionResult r{1, "zero label loss across datasets, models, epsilons, m"};
  std::size_t queries = 0, flips = 0;
  for (const auto& spec : cfg.datasets) {
    Dataset ds;
    if (spec.kind == DatasetSpec::Kind::csv) {
      ds = normalize(load_csv(spec.path, spec.label_column, spec.categorical_columns),
                     cfg.norm_p)
               .first;
    } else {
      ds = synth_blobs(spec.classes, spec.dim, spec.per_class, spec.spread,
                       derive_seed(cfg.master_seed, "synth/" + spec.name), cfg.norm_p);
    }
    const SplitPlan plan =
        split(ds, SplitFractions{0.3, 0.3, 0.4}, 40, derive_seed(cfg.master_seed, "acc1"));

    for (const auto& model_spec : cfg.models) {
      TrainConfig tc = model_spec;
      tc.seed = derive_seed(cfg.master_seed, "acc1/" + spec.name + "/" + to_string(tc.kind));
      const auto model = train_model(ds, plan.target_train, tc);
      const auto index = build_candidate_index(*model, ds, plan.target_train);

      for (double eps : {0.1, 1.0, 10.0, kEpsilonInf}) {
        for (int m : {1, 3, 5}) {
          DefenseConfig dc;
          dc.m = m;
          dc.epsilon = eps;
          dc.p = cfg.norm_p;
          std::uint64_t ordinal = 0;
          auto run_queries = [&](std::span<const std::size_t> idx) {
            for (std::size_t i : idx) {
              Rng rng(derive_seed(cfg.master_seed, "acc1.q", ordinal++));
              const auto out = defend(ds.sample(i), *model, index, dc, rng);
              ++queries;
              if (argmax_lowest(out.smoothed) != out.predicted_label) ++flips;
            }
          };
          run_queries(plan.eval_members);
          run_queries(plan.eval_nonmembers);
        }
      }
    }
  }
  r.pass = flips == 0;
  r.detail = std::to_string(flips) + " label flips over " + std::to_string(queries) +
             " defended queries";
  return r;
}

// ---- criterion 2: gumbel vs plackett-luce total variation -------------

CriterionResult criterion_sampler_equivalence() {
  CriterionResult r{2, "sampler equivalence: gumbel draws vs Plackett-Luce marginal"};
  Rng inst_rng(derive_seed(91, "acc2"));
  const std::size_t draws = 200000;
  double worst_tv = 0.0;
  int failures = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t n = 3 + inst_rng.next_below(4);           // |S| in [3,6]
    const std::size_t m = 1 + inst_rng.next_below(std::min<std::size_t>(3, n));
    std::vector<double> utilities(n);
    for (double& u : utilities) u = -2.0 * inst_rng.uniform01();
    const double eps = std::vector<double>{0.5, 1.0, 4.0}[inst_rng.next_below(3)];

    const auto marginal = subset_distribution(utilities, m, eps, 2.0, SamplerMode::gumbel);
    std::map<std::vector<std::size_t>, std::size_t> position;
    for (std::size_t i = 0; i < marginal.subsets.size(); ++i)
      position[marginal.subsets[i]] = i;

    const auto phi = logits(utilities, eps, 2.0);
    std::vector<double> counts(marginal.subsets.size(), 0.0);
    Rng draw_rng(derive_seed(91, "acc2.draws", inst));
    for (std::size_t d = 0; d < draws; ++d)
      counts[position.at(gumbel_top_m(phi, m, draw_rng))] += 1.0;

    double tv = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i)
      tv += std::fabs(counts[i] / static_cast<double>(draws) - marginal.probs[i]);
    tv *= 0.5;
    worst_tv = std::max(worst_tv, tv);
    if (tv > 0.01) ++failures;
  }
  r.pass = failures == 0;
  r.detail = "50 instances at 200k draws, worst TV " + fmt(worst_tv, 5) + " (limit 0.01)";
  return r;
}

// ---- criterion 3: privacy ratio bound -----------------------------------

CriterionResult criterion_privacy_ratio() {
  CriterionResult r{3, "exponential-mechanism privacy ratio bound (exact_em)"};
  Rng rng(derive_seed(92, "acc3"));
  int checks = 0, failures = 0;
  double worst_margin = 0.0, worst_gumbel = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 3 + rng.next_below(4);
    const std::size_t m = 1 + rng.next_below(std::min<std::size_t>(3, n));
    std::vector<double> utilities(n);
    for (double& u : utilities) u = -2.0 * rng.uniform01();
    const auto idx = static_cast<std::size_t>(rng.next_below(n));
    const double new_u = -2.0 * rng.uniform01();  // |u - u'| <= 2 by construction
    for (double eps : {0.5, 1.0, 4.0}) {
      const double ratio =
          privacy_ratio_audit(utilities, idx, new_u, m, eps, 2.0, SamplerMode::exact_em);
      const double diag =
          privacy_ratio_audit(utilities, idx, new_u, m, eps, 2.0, SamplerMode::gumbel);
      worst_gumbel = std::max(worst_gumbel, diag / eps);
      ++checks;
      if (ratio > eps + 1e-9) ++failures;
      worst_margin = std::max(worst_margin, ratio / eps);
    }
  }
  r.pass = failures == 0;
  r.detail = std::to_string(checks - failures) + "/" + std::to_string(checks) +
             " adjacent instances within eps (worst ratio/eps " + fmt(worst_margin, 4) +
             "); gumbel-mode diagnostic worst ratio/eps " + fmt(worst_gumbel, 4) +
             " (reported only)";
  return r;
}

// ---- criterion 4: utility tail bound ------------------------------------

CriterionResult criterion_tail_bound() {
  CriterionResult r{4, "utility tail bound"};
  Rng rng(derive_seed(93, "acc4"));
  int checks = 0, failures = 0;
  double worst_excess = -1.0;
  for (int inst = 0; inst < 4; ++inst) {
    const std::size_t n = 4 + rng.next_below(3);
    const std::size_t m = 1 + rng.next_below(3);
    std::vector<double> utilities(n);
    for (double& u : utilities) u = -2.0 * rng.uniform01();
    const double eps = std::vector<double>{0.5, 1.0, 4.0}[rng.next_below(3)];
    for (double t : {1.0, 2.0, 3.0}) {
      Rng draw_rng(derive_seed(93, "acc4.draws", inst * 10 + static_cast<int>(t)));
      const auto tail = utility_tail_audit(utilities, std::min(m, n), eps, 2.0, t, 50000,
                                           draw_rng);
      const double slack =
          3.0 * std::sqrt(tail.bound * (1.0 - tail.bound) / static_cast<double>(tail.trials));
      ++checks;
      if (tail.observed_frequency > tail.bound + slack) ++failures;
      worst_excess = std::max(worst_excess, tail.observed_frequency - tail.bound);
    }
  }
  r.pass = failures == 0;
  r.detail = std::to_string(checks - failures) + "/" + std::to_string(checks) +
             " tail checks within e^{-t} + 3 sigma (worst observed-bound gap " +
             fmt(worst_excess, 5) + ")";
  return r;
}

// ---- criteria 5, 6, 8: desk-scale reproduction --------------------------

bool in_range(double v, double lo, double hi) { return v >= lo && v <= hi; }

CriterionResult criterion_iris_reproduction(const RunResult& run) {
  CriterionResult r{5, "Iris + surrogate reproduction at desk scale"};
  const auto* iris_tree = run.find_cell("iris", "tree_ensemble");
  const auto* blob_tree = run.find_cell("blobs_hi", "tree_ensemble");
  if (!iris_tree || !iris_tree->ok || !blob_tree || !blob_tree->ok) {
    r.detail = "required cells missing or failed";
    return r;
  }
  const auto* shadow = find_attack(*iris_tree, "shadow");
  const auto* entropy = find_attack(*iris_tree, "entropy");
  const auto* blob_shadow = find_attack(*blob_tree, "shadow");
  if (!shadow || !entropy || !blob_shadow) {
    r.detail = "required attacks missing";
    return r;
  }
  const bool shadow_ok = in_range(shadow->accuracy_no_defense, 0.64, 0.80) &&
                         in_range(shadow->accuracy_with_defense, 0.48, 0.62);
  const bool entropy_ok = in_range(entropy->accuracy_no_defense, 0.64, 0.80) &&
                          in_range(entropy->accuracy_with_defense, 0.48, 0.64);
  const bool blob_ok = blob_shadow->accuracy_no_defense >= 0.85 &&
                       blob_shadow->accuracy_with_defense <= 0.57;
  r.pass = shadow_ok && entropy_ok && blob_ok;
  r.detail = "iris RF shadow " + fmt(shadow->accuracy_no_defense) + "->" +
             fmt(shadow->accuracy_with_defense) + " (reference 0.7222->0.5556), entropy " +
             fmt(entropy->accuracy_no_defense) + "->" + fmt(entropy->accuracy_with_defense) +
             " (reference 0.72->0.56), surrogate shadow " +
             fmt(blob_shadow->accuracy_no_defense) + "->" +
             fmt(blob_shadow->accuracy_with_defense) + " (need >=0.85 -> <=0.57)";
  return r;
}

CriterionResult criterion_distortion(const RunResult& run) {
  CriterionResult r{6, "distortion sanity: PCD/CVD bands and pay-as-you-go"};
  const auto* iris_tree = run.find_cell("iris", "tree_ensemble");
  if (!iris_tree || !iris_tree->ok) {
    r.detail = "iris tree cell missing";
    return r;
  }
  const bool pcd_ok = std::fabs(iris_tree->distortion.pcd - 0.061) <= 0.05;
  const bool cvd_ok = std::fabs(iris_tree->distortion.cvd - 0.083) <= 0.06;

  bool pay_as_you_go = true;
  std::string pattern;
  for (const auto& spec : {"iris", "blobs_hi"}) {
    const auto* lr = run.find_cell(spec, "logreg");
    const auto* tree = run.find_cell(spec, "tree_ensemble");
    if (!lr || !lr->ok || !tree || !tree->ok) {
      pay_as_you_go = false;
      continue;
    }
    if (!(lr->distortion.cvd < tree->distortion.cvd)) pay_as_you_go = false;
    pattern += std::string(spec) + " lr " + fmt(lr->distortion.cvd) + " < rf " +
               fmt(tree->distortion.cvd) + "; ";
  }
  r.pass = pcd_ok && cvd_ok && pay_as_you_go;
  r.detail = "iris RF pcd " + fmt(iris_tree->distortion.pcd) + " (0.061 +- 0.05), cvd " +
             fmt(iris_tree->distortion.cvd) + " (0.083 +- 0.06); " + pattern;
  return r;
}

CriterionResult criterion_determinism(const ExperimentConfig& base) {
  CriterionResult r{8, "byte-identical CSV outputs at --jobs 1 vs --jobs 8"};
  auto cfg_a = base;
  cfg_a.output_dir = "acc_out_j1";
  auto cfg_b = base;
  cfg_b.output_dir = "acc_out_j8";
  const auto run_a = run_experiment(cfg_a, 1);
  const auto run_b = run_experiment(cfg_b, 8);
  bool same = run_a.all_ok() && run_b.all_ok();
  for (const auto& f : {"shadow_attacks.csv", "metric_attacks.csv", "distortion.csv"}) {
    const auto a = slurp(std::filesystem::path("acc_out_j1") / f);
    const auto b = slurp(std::filesystem::path("acc_out_j8") / f);
    if (a.empty() || a != b) same = false;
  }
  r.pass = same;
  r.detail = same ? "all three CSV tables identical" : "outputs differ between jobs=1 and jobs=8";
  return r;
}

// ---- criterion 7: metric-attack unit oracles ----------------------------

CriterionResult criterion_metric_oracles() {
  CriterionResult r{7, "metric-attack unit oracles"};
  bool ok = true;
  std::string why;
  for (std::size_t c : {2u, 3u, 5u, 10u, 100u}) {
    ConfidenceVector uniform(c, 1.0 / static_cast<double>(c));
    if (std::fabs(entropy_score(uniform) - std::log(static_cast<double>(c))) > 1e-12) {
      ok = false;
      why += "entropy(uniform " + std::to_string(c) + ") off; ";
    }
  }
  const double mentr_onehot = modified_entropy_score({1.0, 0.0, 0.0}, 0);
  if (mentr_onehot > 1e-9) {
    ok = false;
    why += "Mentr(one-hot) = " + fmt(mentr_onehot, 12) + "; ";
  }
  const double mentr_hand = modified_entropy_score({0.8, 0.2}, 0);
  if (std::fabs(mentr_hand - 0.08926) > 1e-4) {
    ok = false;
    why += "Mentr(0.8,0.2) = " + fmt(mentr_hand, 6) + "; ";
  }
  r.pass = ok;
  r.detail = ok ? "entropy(uniform)=lnC to 1e-12, Mentr(one-hot)<=1e-9, Mentr(0.8,0.2)=" +
                      fmt(mentr_hand, 5) + " within 1e-4 of 0.08926"
                : why;
  return r;
}

// ---- criterion 9: mlp gradient check ------------------------------------

CriterionResult criterion_gradient_check() {
  CriterionResult r{9, "MLP analytic gradient vs central differences"};
  Dataset ds;
  ds.dim = 2;
  ds.num_classes = 2;
  ds.features = {0.2, 0.7, 0.8, 0.1, 0.45, 0.55};
  ds.labels = {0, 1, 0};
  std::vector<std::size_t> idx = {0, 1, 2};

  TrainConfig cfg;
  cfg.kind = ModelKind::mlp;
  cfg.hidden = {5};
  cfg.epochs = 1;
  cfg.seed = 12;
  MlpClassifier model;
  model.fit(ds, idx, cfg);

  auto theta = model.parameters();
  const auto analytic = model.batch_gradient(ds, idx);
  const double h = 1e-6;
  double max_rel = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    auto perturbed = theta;
    perturbed[k] = theta[k] + h;
    model.set_parameters(perturbed);
    const double up = model.batch_loss(ds, idx);
    perturbed[k] = theta[k] - h;
    model.set_parameters(perturbed);
    const double down = model.batch_loss(ds, idx);
    const double fd = (up - down) / (2.0 * h);
    const double rel =
        std::fabs(fd - analytic[k]) / std::max({1e-8, std::fabs(fd), std::fabs(analytic[k])});
    max_rel = std::max(max_rel, rel);
  }
  r.pass = max_rel <= 1e-4;
  r.detail = "max relative error " + fmt(max_rel, 8) + " over " +
             std::to_string(theta.size()) + " parameters (tolerance 1e-4)";
  return r;
}

}  // namespace

int main() {
  const auto started = std::chrono::steady_clock::now();
  const ExperimentConfig desk = desk_config();

  std::vector<CriterionResult> results;
  auto guard = [&](std::function<CriterionResult()> fn, int id, const std::string& name) {
    try {
      results.push_back(fn());
    } catch (const std::exception& e) {
      results.push_back({id, name, false, std::string("exception: ") + e.what()});
    }
  };

  guard([&] { return criterion_zero_label_loss(desk); }, 1, "zero label loss");
  guard([] { return criterion_sampler_equivalence(); }, 2, "sampler equivalence");
  guard([] { return criterion_privacy_ratio(); }, 3, "privacy ratio bound");
  guard([] { return criterion_tail_bound(); }, 4, "utility tail bound");

  // one full desk run powers criteria 5 and 6; a second at jobs=8 powers 8
  RunResult desk_run;
  std::string desk_error;
  try {
    auto cfg = desk;
    cfg.output_dir = "acc_out_j1";
    desk_run = run_experiment(cfg, 1);
    if (!desk_run.all_ok()) desk_error = "one or more cells failed";
  } catch (const std::exception& e) {
    desk_error = e.what();
  }
  if (desk_error.empty()) {
    guard([&] { return criterion_iris_reproduction(desk_run); }, 5, "iris reproduction");
    guard([&] { return criterion_distortion(desk_run); }, 6, "distortion sanity");
  } else {
    results.push_back({5, "iris reproduction", false, "desk run failed: " + desk_error});
    results.push_back({6, "distortion sanity", false, "desk run failed: " + desk_error});
  }

  guard([] { return criterion_metric_oracles(); }, 7, "metric oracles");
  guard([&] { return criterion_determinism(desk); }, 8, "determinism");
  guard([] { return criterion_gradient_check(); }, 9, "gradient check");

  std::sort(results.begin(), results.end(),
            [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });

  int failures = 0;
  for (const auto& r : results) {
    if (!r.pass) ++failures;
    std::cout << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << r.id << ": " << r.name
              << " -- " << r.detail << "\n";
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::cout << (failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << " ("
            << results.size() << " criteria, " << failures << " failed, " << fmt(secs, 1)
            << "s)\n";
  return failures == 0 ? 0 : 1;
}
