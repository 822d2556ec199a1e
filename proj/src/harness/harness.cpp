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

#include "mialab/harness/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "mialab/defense/audit.hpp"

namespace mialab {

namespace {

namespace fs = std::filesystem;

std::string format_double(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::uint64_t fnv1a_file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct PreparedDataset {
  DatasetSpec spec;
  Dataset data;
  SplitPlan plan;
};

PreparedDataset prepare_dataset(const DatasetSpec& spec, const ExperimentConfig& cfg) {
  PreparedDataset prepared;
  prepared.spec = spec;
  if (spec.kind == DatasetSpec::Kind::csv) {
    Dataset raw = load_csv(spec.path, spec.label_column, spec.categorical_columns);
    prepared.data = normalize(raw, cfg.norm_p).first;
  } else {
    prepared.data = synth_blobs(spec.classes, spec.dim, spec.per_class, spec.spread,
                                derive_seed(cfg.master_seed, "synth/" + spec.name), cfg.norm_p);
  }

  const SplitSpec& split_spec = spec.split ? *spec.split : cfg.split;
  SplitFractions fractions{split_spec.target_train, split_spec.target_test,
                           split_spec.shadow_pool};
  const auto n_train = static_cast<std::size_t>(fractions.target_train *
                                                static_cast<double>(prepared.data.size()));
  const std::size_t eval_size =
      split_spec.eval_size ? *split_spec.eval_size : std::min<std::size_t>(500, n_train / 4);
  prepared.plan = split(prepared.data, fractions, eval_size,
                        derive_seed(cfg.master_seed, "split/" + spec.name));
  return prepared;
}

DefenseConfig resolve_defense(const ExperimentConfig& cfg, const CandidateIndex& index,
                              std::uint64_t cell_seed) {
  DefenseConfig dc;
  dc.m = cfg.defense.m ? *cfg.defense.m
                       : default_neighbor_count(index.smallest_nonempty_bucket());
  dc.epsilon = cfg.defense.epsilon;
  dc.p = cfg.norm_p;
  dc.delta_u = cfg.defense.delta_u;
  dc.sampler = cfg.defense.sampler;
  dc.seed = derive_seed(cell_seed, "defense");
  return dc;
}

CellResult run_cell(const ExperimentConfig& cfg, const PreparedDataset& prepared,
                    const TrainConfig& model_spec) {
  const auto t0 = std::chrono::steady_clock::now();
  CellResult cell;
  cell.dataset = prepared.spec.name;
  cell.model = to_string(model_spec.kind);
  cell.cell_seed =
      derive_seed(cfg.master_seed, "cell/" + cell.dataset + "/" + cell.model);

  const Dataset& ds = prepared.data;
  const SplitPlan& plan = prepared.plan;

  auto stage_clock = std::chrono::steady_clock::now();
  auto take_stage = [&stage_clock]() {
    const auto now = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(now - stage_clock).count();
    stage_clock = now;
    return secs;
  };

  TrainConfig train_cfg = model_spec;
  train_cfg.seed = derive_seed(cell.cell_seed, "target.train");
  auto target = train_model(ds, plan.target_train, train_cfg);
  cell.train_accuracy = task_accuracy(*target, ds, plan.target_train);
  cell.test_accuracy = task_accuracy(*target, ds, plan.target_test);
  cell.stage_seconds.train = take_stage();

  const auto index = build_candidate_index(*target, ds, plan.target_train);
  const DefenseConfig defense = resolve_defense(cfg, index, cell.cell_seed);
  cell.resolved_m = defense.m;

  // balanced eval sets: members from target_train, non-members from
  // target_test, both passed through the defense symmetrically
  std::vector<AttackSample> plain_members, plain_nonmembers;
  std::vector<AttackSample> smoothed_members, smoothed_nonmembers;
  std::vector<DistortionPair> pairs;
  std::uint64_t ordinal = 0;
  auto process_eval = [&](std::span<const std::size_t> idx, bool member) {
    for (std::size_t i : idx) {
      Rng rng(derive_seed(cell.cell_seed, "defense.query", ordinal++));
      auto out = defend(ds.sample(i), *target, index, defense, rng);
      AttackSample plain{out.original, ds.labels[i], member};
      AttackSample smoothed{out.smoothed, ds.labels[i], member};
      (member ? plain_members : plain_nonmembers).push_back(std::move(plain));
      (member ? smoothed_members : smoothed_nonmembers).push_back(std::move(smoothed));
      pairs.push_back({std::move(out.original), std::move(out.smoothed), out.predicted_label,
                       out.fallback});
    }
  };
  process_eval(plan.eval_members, true);
  process_eval(plan.eval_nonmembers, false);
  cell.distortion = distortion_report(pairs);
  cell.stage_seconds.defense = take_stage();

  ShadowEnsembleConfig shadow_cfg;
  shadow_cfg.num_shadow_models = cfg.attacks.num_shadow_models;
  shadow_cfg.shadow_train = model_spec;
  shadow_cfg.shadow_train_fraction = cfg.attacks.shadow_train_fraction;
  shadow_cfg.per_class_attack_models = cfg.attacks.per_class_attack_models;
  shadow_cfg.seed = derive_seed(cell.cell_seed, "shadow");

  const auto shadow_plain = collect_shadow_samples(ds, plan.shadow_pool, shadow_cfg, {});
  const auto shadow_defended =
      cfg.attacks.adaptive
          ? collect_shadow_samples(ds, plan.shadow_pool, shadow_cfg, defense)
          : shadow_plain;

  for (const auto& kind : cfg.attacks.kinds) {
    auto fit = [&](std::span<const AttackSample> samples) -> std::unique_ptr<FittedAttack> {
      if (kind == "shadow") return fit_shadow_attack(samples, shadow_cfg, ds.num_classes);
      return fit_metric_attack(metric_kind_from_string(kind), samples, ds.num_classes,
                               cfg.attacks.per_class_thresholds);
    };
    const auto attack_plain = fit(shadow_plain);
    const auto attack_defended = fit(shadow_defended);

    AttackCellResult result;
    result.attack = kind;
    result.accuracy_no_defense =
        evaluate_attack(*attack_plain, plain_members, plain_nonmembers).accuracy;
    result.accuracy_with_defense =
        evaluate_attack(*attack_defended, smoothed_members, smoothed_nonmembers).accuracy;
    result.n_eval = plain_members.size() + plain_nonmembers.size();
    cell.attacks.push_back(std::move(result));
  }
  cell.stage_seconds.attacks = take_stage();

  cell.ok = true;
  cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cell;
}

void write_attack_csv(const fs::path& path, const std::vector<CellResult>& cells,
                      bool shadow_rows) {
  std::ofstream out(path, std::ios::binary);
  out << "dataset,model,attack,acc_no_def,acc_def,pcd,cvd,label_loss_rate,fallback_rate,"
         "n_eval\n";
  for (const auto& cell : cells) {
    if (!cell.ok) continue;
    for (const auto& a : cell.attacks) {
      if ((a.attack == "shadow") != shadow_rows) continue;
      out << cell.dataset << ',' << cell.model << ',' << a.attack << ','
          << format_double(a.accuracy_no_defense, 4) << ','
          << format_double(a.accuracy_with_defense, 4) << ','
          << format_double(cell.distortion.pcd, 6) << ','
          << format_double(cell.distortion.cvd, 6) << ','
          << format_double(cell.distortion.label_loss_rate, 6) << ','
          << format_double(cell.distortion.fallback_rate, 6) << ',' << a.n_eval << '\n';
    }
  }
}

void write_distortion_csv(const fs::path& path, const std::vector<CellResult>& cells) {
  std::ofstream out(path, std::ios::binary);
  out << "dataset,model,pcd,cvd,label_loss_rate,fallback_rate,n_queries\n";
  for (const auto& cell : cells) {
    if (!cell.ok) continue;
    out << cell.dataset << ',' << cell.model << ',' << format_double(cell.distortion.pcd, 6)
        << ',' << format_double(cell.distortion.cvd, 6) << ','
        << format_double(cell.distortion.label_loss_rate, 6) << ','
        << format_double(cell.distortion.fallback_rate, 6) << ','
        << cell.distortion.n_queries << '\n';
  }
}

}  // namespace

const CellResult* RunResult::find_cell(const std::string& dataset,
                                       const std::string& model) const {
  for (const auto& cell : cells)
    if (cell.dataset == dataset && cell.model == model) return &cell;
  return nullptr;
}

bool RunResult::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.ok; });
}

RunResult run_experiment(const ExperimentConfig& cfg, int jobs) {
  if (jobs < 1) throw std::invalid_argument("run_experiment: jobs must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<PreparedDataset> prepared;
  prepared.reserve(cfg.datasets.size());
  for (const auto& spec : cfg.datasets) prepared.push_back(prepare_dataset(spec, cfg));

  struct CellTask {
    const PreparedDataset* dataset;
    const TrainConfig* model;
  };
  std::vector<CellTask> tasks;
  for (const auto& p : prepared)
    for (const auto& m : cfg.models) tasks.push_back({&p, &m});

  RunResult result;
  result.cells.resize(tasks.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        result.cells[i] = run_cell(cfg, *tasks[i].dataset, *tasks[i].model);
      } catch (const std::exception& e) {
        // a failed cell must not void the others
        CellResult failed;
        failed.dataset = tasks[i].dataset->spec.name;
        failed.model = to_string(tasks[i].model->kind);
        failed.ok = false;
        failed.error = e.what();
        result.cells[i] = std::move(failed);
      }
    }
  };
  const int worker_count = std::min<int>(jobs, static_cast<int>(tasks.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < worker_count; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);
  result.out_dir = out_dir.string();

  write_attack_csv(out_dir / "shadow_attacks.csv", result.cells, true);
  write_attack_csv(out_dir / "metric_attacks.csv", result.cells, false);
  write_distortion_csv(out_dir / "distortion.csv", result.cells);
  result.files_written = {"shadow_attacks.csv", "metric_attacks.csv", "distortion.csv"};

  nlohmann::json manifest;
  manifest["version"] = "mialab 1.0.0";
  manifest["config"] = cfg.to_json();
  manifest["master_seed"] = cfg.master_seed;
  manifest["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::json cells_j = nlohmann::json::array();
  for (const auto& cell : result.cells) {
    nlohmann::json cj = {{"dataset", cell.dataset}, {"model", cell.model}, {"ok", cell.ok}};
    if (cell.ok) {
      cj["cell_seed"] = cell.cell_seed;
      cj["train_accuracy"] = cell.train_accuracy;
      cj["test_accuracy"] = cell.test_accuracy;
      cj["resolved_m"] = cell.resolved_m;
      cj["distortion"] = cell.distortion.to_json();
      cj["seconds"] = cell.seconds;
      cj["stage_seconds"] = {{"train", cell.stage_seconds.train},
                             {"defense", cell.stage_seconds.defense},
                             {"attacks", cell.stage_seconds.attacks}};
      nlohmann::json attacks_j = nlohmann::json::array();
      for (const auto& a : cell.attacks)
        attacks_j.push_back({{"dataset", cell.dataset},
                             {"model", cell.model},
                             {"attack", a.attack},
                             {"defended_accuracy", a.accuracy_with_defense},
                             {"undefended_accuracy", a.accuracy_no_defense},
                             {"n_eval", a.n_eval}});
      cj["attacks"] = std::move(attacks_j);
    } else {
      cj["error"] = cell.error;
    }
    cells_j.push_back(std::move(cj));
  }
  manifest["cells"] = std::move(cells_j);
  nlohmann::json hashes;
  for (const auto& f : result.files_written) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a_file_hash(out_dir / f)));
    hashes[f] = buf;
  }
  manifest["output_hashes"] = std::move(hashes);
  std::ofstream mout(out_dir / "manifest.json", std::ios::binary);
  mout << manifest.dump(2) << '\n';

  return result;
}

// ---- sampler audit ----------------------------------------------------

namespace {

std::vector<double> random_utilities(std::size_t n, Rng& rng) {
  std::vector<double> u(n);
  for (double& v : u) v = -2.0 * rng.uniform01();
  return u;
}

}  // namespace

AuditOutcome sampler_audit(const AuditConfig& cfg) {
  AuditOutcome outcome;
  outcome.records = nlohmann::json::array();
  std::size_t failed = 0, run = 0;

  // exponential-mechanism privacy ratio bound over randomized adjacent
  // instances; the gumbel-mode ratio rides along as a diagnostic
  Rng ratio_rng(derive_seed(cfg.seed, "audit.ratio"));
  for (std::size_t k = 0; k < cfg.ratio_instances; ++k) {
    const std::size_t n =
        cfg.candidate_sizes[ratio_rng.next_below(cfg.candidate_sizes.size())];
    std::size_t m = cfg.subset_sizes[ratio_rng.next_below(cfg.subset_sizes.size())];
    m = std::min(m, n);
    auto utilities = random_utilities(n, ratio_rng);
    const auto sub_idx = static_cast<std::size_t>(ratio_rng.next_below(n));
    const double new_u = -2.0 * ratio_rng.uniform01();
    for (double eps : cfg.epsilons) {
      const double ratio_em = privacy_ratio_audit(utilities, sub_idx, new_u, m, eps, 2.0,
                                                  SamplerMode::exact_em);
      const double ratio_gumbel = privacy_ratio_audit(utilities, sub_idx, new_u, m, eps, 2.0,
                                                      SamplerMode::gumbel);
      const bool pass = ratio_em <= eps + 1e-9;
      ++run;
      if (!pass) ++failed;
      outcome.records.push_back({{"check", "em_privacy_ratio"},
                                 {"instance", k},
                                 {"mode", "exact_em"},
                                 {"n", n},
                                 {"m", m},
                                 {"epsilon", eps},
                                 {"max_ratio", ratio_em},
                                 {"bound", eps},
                                 {"pass", pass},
                                 {"gumbel_max_ratio_diagnostic", ratio_gumbel}});
    }
  }

  // gumbel-top-m empirical set frequencies vs the Plackett-Luce
  // marginal, plus exact m = 1 mode equivalence
  Rng tv_rng(derive_seed(cfg.seed, "audit.tv"));
  for (std::size_t k = 0; k < cfg.tv_instances; ++k) {
    const std::size_t n = cfg.candidate_sizes[tv_rng.next_below(cfg.candidate_sizes.size())];
    std::size_t m = cfg.subset_sizes[tv_rng.next_below(cfg.subset_sizes.size())];
    m = std::min(m, n);
    auto utilities = random_utilities(n, tv_rng);
    const double eps = cfg.epsilons[tv_rng.next_below(cfg.epsilons.size())];

    const auto marginal = subset_distribution(utilities, m, eps, 2.0, SamplerMode::gumbel);
    std::map<std::vector<std::size_t>, std::size_t> position;
    for (std::size_t i = 0; i < marginal.subsets.size(); ++i)
      position[marginal.subsets[i]] = i;

    const auto phi = logits(utilities, eps, 2.0);
    std::vector<double> counts(marginal.subsets.size(), 0.0);
    Rng draw_rng(derive_seed(cfg.seed, "audit.tv.draws", k));
    for (std::size_t d = 0; d < cfg.tv_draws; ++d)
      counts[position.at(gumbel_top_m(phi, m, draw_rng))] += 1.0;

    double tv = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i)
      tv += std::fabs(counts[i] / static_cast<double>(cfg.tv_draws) - marginal.probs[i]);
    tv *= 0.5;
    const bool pass = tv <= cfg.tv_limit;
    ++run;
    if (!pass) ++failed;
    outcome.records.push_back({{"check", "set_marginal_total_variation"},
                               {"instance", k},
                               {"mode", "gumbel"},
                               {"n", n},
                               {"m", m},
                               {"epsilon", eps},
                               {"draws", cfg.tv_draws},
                               {"total_variation", tv},
                               {"bound", cfg.tv_limit},
                               {"pass", pass}});

    if (m == 1) {
      const auto em = subset_distribution(utilities, 1, eps, 2.0, SamplerMode::exact_em);
      double max_diff = 0.0;
      for (std::size_t i = 0; i < em.probs.size(); ++i)
        max_diff = std::max(max_diff, std::fabs(em.probs[i] - marginal.probs[i]));
      const bool m1_pass = max_diff <= 1e-12;
      ++run;
      if (!m1_pass) ++failed;
      outcome.records.push_back({{"check", "m1_mode_equivalence"},
                                 {"instance", k},
                                 {"n", n},
                                 {"epsilon", eps},
                                 {"max_abs_diff", max_diff},
                                 {"bound", 1e-12},
                                 {"pass", m1_pass}});
    }
  }

  // Monte-Carlo tail frequency against e^{-t} plus 3-sigma binomial
  // slack
  Rng tail_rng(derive_seed(cfg.seed, "audit.tail"));
  for (std::size_t k = 0; k < cfg.tail_instances; ++k) {
    const std::size_t n =
        cfg.candidate_sizes[tail_rng.next_below(cfg.candidate_sizes.size())];
    std::size_t m = cfg.subset_sizes[tail_rng.next_below(cfg.subset_sizes.size())];
    m = std::min(m, n);
    auto utilities = random_utilities(n, tail_rng);
    const double eps = cfg.epsilons[tail_rng.next_below(cfg.epsilons.size())];
    for (double t : cfg.tail_ts) {
      Rng draw_rng(derive_seed(cfg.seed, "audit.tail.draws", k * 1000 + static_cast<std::uint64_t>(t)));
      const auto tail =
          utility_tail_audit(utilities, m, eps, 2.0, t, cfg.tail_trials, draw_rng);
      const double slack =
          3.0 * std::sqrt(tail.bound * (1.0 - tail.bound) / static_cast<double>(tail.trials));
      const bool pass = tail.observed_frequency <= tail.bound + slack;
      ++run;
      if (!pass) ++failed;
      outcome.records.push_back({{"check", "utility_tail_bound"},
                                 {"instance", k},
                                 {"mode", "exact_em"},
                                 {"n", n},
                                 {"m", m},
                                 {"epsilon", eps},
                                 {"t", t},
                                 {"trials", tail.trials},
                                 {"observed_frequency", tail.observed_frequency},
                                 {"bound", tail.bound},
                                 {"slack", slack},
                                 {"pass", pass}});
    }
  }

  outcome.checks_run = run;
  outcome.checks_failed = failed;
  outcome.all_passed = failed == 0;
  return outcome;
}

void write_audit_records(const AuditOutcome& outcome, const std::string& out_dir) {
  fs::create_directories(out_dir);
  nlohmann::json doc = {{"all_passed", outcome.all_passed},
                        {"checks_run", outcome.checks_run},
                        {"checks_failed", outcome.checks_failed},
                        {"records", outcome.records}};
  std::ofstream out(fs::path(out_dir) / "audit.json", std::ios::binary);
  out << doc.dump(2) << '\n';
}

// ---- report -----------------------------------------------------------

namespace {

struct ResultRow {
  std::string dataset;
  std::string model;
  std::string attack;
  double acc_no_def = 0.0;
  double acc_def = 0.0;
  double pcd = 0.0;
  double cvd = 0.0;
};

std::vector<ResultRow> read_attack_csv(const fs::path& path) {
  std::vector<ResultRow> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 10) continue;
    ResultRow row;
    row.dataset = fields[0];
    row.model = fields[1];
    row.attack = fields[2];
    row.acc_no_def = std::stod(fields[3]);
    row.acc_def = std::stod(fields[4]);
    row.pcd = std::stod(fields[5]);
    row.cvd = std::stod(fields[6]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_heatmap_csv(const fs::path& path, const std::vector<std::string>& datasets,
                       const std::vector<std::string>& models,
                       const std::map<std::pair<std::string, std::string>, double>& values) {
  std::ofstream out(path, std::ios::binary);
  out << "dataset";
  for (const auto& m : models) out << ',' << m;
  out << '\n';
  for (const auto& d : datasets) {
    out << d;
    for (const auto& m : models) {
      out << ',';
      auto it = values.find({d, m});
      if (it != values.end()) out << format_double(it->second, 6);
      // absent cells stay blank, not zero
    }
    out << '\n';
  }
}

}  // namespace

int report(const std::string& results_dir, std::ostream& out) {
  const fs::path dir(results_dir);
  auto shadow_rows = read_attack_csv(dir / "shadow_attacks.csv");
  auto metric_rows = read_attack_csv(dir / "metric_attacks.csv");
  if (shadow_rows.empty() && metric_rows.empty()) {
    out << "no results found in " << results_dir << "\n";
    return 1;
  }

  std::vector<std::string> datasets, models;
  auto note = [](std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  for (const auto& r : shadow_rows) {
    note(datasets, r.dataset);
    note(models, r.model);
  }
  for (const auto& r : metric_rows) {
    note(datasets, r.dataset);
    note(models, r.model);
  }

  std::map<std::pair<std::string, std::string>, double> drop, cvd_map;
  std::vector<ExperimentCell> cells;
  for (const auto& r : shadow_rows) {
    drop[{r.dataset, r.model}] = r.acc_no_def - r.acc_def;
    cvd_map[{r.dataset, r.model}] = r.cvd;
    ExperimentCell cell;
    cell.dataset = r.dataset;
    cell.model = r.model;
    cell.attack = r.attack;
    cell.accuracy_no_defense = r.acc_no_def;
    cell.accuracy_with_defense = r.acc_def;
    cell.distortion.cvd = r.cvd;
    cell.distortion.pcd = r.pcd;
    cells.push_back(std::move(cell));
  }

  write_heatmap_csv(dir / "heatmap_accuracy_drop.csv", datasets, models, drop);
  write_heatmap_csv(dir / "heatmap_cvd.csv", datasets, models, cvd_map);

  out << "== attack accuracy (no defense -> with defense) ==\n";
  auto print_rows = [&](const std::vector<ResultRow>& rows) {
    for (const auto& r : rows)
      out << "  " << r.dataset << " / " << r.model << " / " << r.attack << ": "
          << format_double(r.acc_no_def, 4) << " -> " << format_double(r.acc_def, 4) << "\n";
  };
  print_rows(shadow_rows);
  print_rows(metric_rows);

  out << "== heatmap matrices written: heatmap_accuracy_drop.csv, heatmap_cvd.csv ==\n";

  if (!cells.empty()) {
    auto table = correlation_table(cells);
    std::ofstream corr(dir / "correlation.csv", std::ios::binary);
    corr << "dataset,model,accuracy_drop,cvd,pcd\n";
    for (const auto& row : table.rows)
      corr << row.dataset << ',' << row.model << ',' << format_double(row.accuracy_drop, 6)
           << ',' << format_double(row.cvd, 6) << ',' << format_double(row.pcd, 6) << '\n';
    corr << "pearson_drop_vs_cvd,,";
    if (table.pearson_r)
      corr << format_double(*table.pearson_r, 6);
    else
      corr << "undefined";
    corr << ",,\n";
    out << "== Pearson(accuracy drop, CVD) = ";
    if (table.pearson_r)
      out << format_double(*table.pearson_r, 4);
    else
      out << "undefined";
    out << " over " << table.rows.size() << " cells ==\n";
  }
  return 0;
}

}  // namespace mialab
