/* Copyright 2026 The Infersim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Command line front end. `run` executes one experiment and writes
// timeseries.csv plus summary.json; `compare` runs a dynamic config against
// fixed-size fleets and writes comparison.csv.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "infersim/config.hpp"
#include "infersim/experiment.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out_dir,
                std::optional<uint64_t> seed,
                std::optional<std::string> mode) {
  infersim::ExperimentConfig config = infersim::load_config_file(config_path);
  if (seed) config.seed = *seed;
  if (mode) {
    config.mode = *mode == "wallclock" ? infersim::RunMode::kWallClock
                                       : infersim::RunMode::kVirtual;
  }
  infersim::validate(config);
  infersim::RunResult result = infersim::run_experiment(config);
  infersim::write_run_outputs(result, out_dir);
  std::printf("wrote %s/timeseries.csv and %s/summary.json\n", out_dir.c_str(),
              out_dir.c_str());
  std::printf("requests: %llu total, %llu ok; mean utilization %.3f\n",
              static_cast<unsigned long long>(result.summary.requests_total),
              static_cast<unsigned long long>(result.summary.requests_ok),
              result.summary.mean_gpu_utilization);
  return 0;
}

int compare_command(const std::string& config_path,
                    const std::vector<uint32_t>& static_counts,
                    const std::string& out_dir) {
  infersim::ExperimentConfig base = infersim::load_config_file(config_path);
  infersim::validate(base);
  if (!base.autoscaler) {
    throw infersim::ConfigError(
        "compare requires a config with an autoscaler section");
  }

  std::vector<infersim::ExperimentConfig> configs;
  std::vector<std::string> labels;
  configs.push_back(base);
  labels.push_back("dynamic");
  for (uint32_t count : static_counts) {
    configs.push_back(infersim::static_variant(base, count));
    labels.push_back("static_" + std::to_string(count));
  }

  std::vector<infersim::RunSummary> rows =
      infersim::compare_runs(configs, labels);

  std::filesystem::create_directories(out_dir);
  std::filesystem::path csv_path =
      std::filesystem::path(out_dir) / "comparison.csv";
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + csv_path.string());
  }
  out << infersim::render_comparison_csv(rows);
  out.close();

  std::printf("wrote %s\n", csv_path.c_str());
  for (const infersim::RunSummary& row : rows) {
    std::printf("%-10s mean_e2e=%8.2fms util=%.3f replica_s=%10.1f\n",
                row.label.c_str(),
                row.mean_e2e ? infersim::to_millis(*row.mean_e2e) : 0.0,
                row.mean_gpu_utilization, row.replica_seconds);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop inference fleet simulator"};
  app.require_subcommand(1);

  std::string run_config;
  std::string run_out;
  std::optional<uint64_t> run_seed;
  std::optional<std::string> run_mode;
  CLI::App* run = app.add_subcommand("run", "Execute one experiment");
  run->add_option("--config", run_config, "Config file (JSON)")->required();
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--seed", run_seed, "Override the config seed");
  run->add_option("--mode", run_mode, "Override the config mode")
      ->check(CLI::IsMember({"virtual", "wallclock"}));

  std::string cmp_config;
  std::string cmp_out;
  std::vector<uint32_t> cmp_static;
  CLI::App* compare =
      app.add_subcommand("compare", "Dynamic vs fixed-size fleets");
  compare->add_option("--config", cmp_config, "Config file (JSON)")
      ->required();
  compare
      ->add_option("--static", cmp_static,
                   "Comma-separated fixed replica counts")
      ->required()
      ->delimiter(',');
  compare->add_option("--out", cmp_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      return run_command(run_config, run_out, run_seed, run_mode);
    }
    return compare_command(cmp_config, cmp_static, cmp_out);
  } catch (const infersim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
