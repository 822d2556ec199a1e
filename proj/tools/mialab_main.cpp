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

#include <iostream>

#include "CLI11.hpp"

#include "mialab/harness/harness.hpp"
#include "mialab/kernels/kernels.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mialab: membership-inference attack/defense laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool have_seed = false;
  int jobs = 1;

  auto* run_cmd = app.add_subcommand("run", "run the configured experiment suite");
  run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed_override, "override the master seed");
  run_cmd->add_option("--jobs", jobs, "worker threads for experiment cells")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", out_override, "override the output directory");

  std::string audit_config_path;
  std::string audit_out = "out";
  auto* audit_cmd =
      app.add_subcommand("sampler-audit", "verify the sampler privacy/utility guarantees");
  audit_cmd->add_option("config", audit_config_path, "audit config (JSON)")->required();
  auto* audit_seed_opt =
      audit_cmd->add_option("--seed", seed_override, "override the audit seed");
  audit_cmd->add_option("--out", audit_out, "directory for audit.json");

  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "aggregate a results directory");
  report_cmd->add_option("dir", report_dir, "results directory from a previous run")
      ->required();

  CLI11_PARSE(app, argc, argv);
  have_seed = seed_opt->count() > 0 || audit_seed_opt->count() > 0;

  try {
    if (*run_cmd) {
      auto cfg = mialab::load_experiment_config(config_path);
      if (have_seed) cfg.master_seed = seed_override;
      if (!out_override.empty()) cfg.output_dir = out_override;
      auto result = mialab::run_experiment(cfg, jobs);
      std::cout << "kernels backend: " << mialab::kernels::active_backend() << "\n";
      for (const auto& cell : result.cells) {
        if (!cell.ok) {
          std::cout << "[cell failed] " << cell.dataset << "/" << cell.model << ": "
                    << cell.error << "\n";
          continue;
        }
        std::cout << cell.dataset << "/" << cell.model
                  << "  train_acc=" << cell.train_accuracy
                  << " test_acc=" << cell.test_accuracy << " m=" << cell.resolved_m << "\n";
        for (const auto& a : cell.attacks)
          std::cout << "    " << a.attack << ": " << a.accuracy_no_defense << " -> "
                    << a.accuracy_with_defense << "\n";
      }
      std::cout << "results written to " << result.out_dir << "\n";
      return 0;
    }
    if (*audit_cmd) {
      auto cfg = mialab::load_audit_config(audit_config_path);
      if (have_seed) cfg.seed = seed_override;
      auto outcome = mialab::sampler_audit(cfg);
      mialab::write_audit_records(outcome, audit_out);
      std::cout << "sampler audit: " << (outcome.checks_run - outcome.checks_failed) << "/"
                << outcome.checks_run << " checks passed; records in " << audit_out
                << "/audit.json\n";
      return outcome.all_passed ? 0 : 2;
    }
    if (*report_cmd) {
      return mialab::report(report_dir, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
