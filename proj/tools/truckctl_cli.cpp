/*
 * Copyright 2026 The truckctl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// truckctl: run closed-loop scenarios, generate synthetic paths and
// summarise logs.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "truckctl/errors.hpp"
#include "truckctl/path_generator.hpp"
#include "truckctl/path_map.hpp"
#include "truckctl/run_summary.hpp"
#include "truckctl/scenario_config.hpp"
#include "truckctl/sim_harness.hpp"
#include "truckctl/svg_plot.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitIncomplete = 2;
constexpr int kExitError = 1;

struct RunOptions {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string batch;
};

bool RunOne(const fs::path& config_file, const fs::path& out_dir,
            const RunOptions& opts) {
  truckctl::ScenarioConfig cfg = truckctl::LoadScenarioConfig(config_file);
  for (const std::string& o : opts.overrides) truckctl::ApplyOverride(cfg, o);
  if (opts.seed) cfg.seed = *opts.seed;
  cfg.Validate();

  const truckctl::PathMap path = truckctl::LoadScenarioPath(cfg);
  const truckctl::SimLog log = truckctl::RunScenario(cfg, path);
  const truckctl::RunSummary summary = truckctl::Summarize(log);

  fs::create_directories(out_dir);
  truckctl::WriteSimLog(out_dir / "log.csv", log);
  truckctl::WriteSummary(out_dir / "summary.txt", summary);
  {
    std::ofstream meta(out_dir / "metadata.txt", std::ios::binary);
    meta << "run.config = " << config_file.string() << "\n"
         << "run.completed = " << (log.completed ? "true" : "false") << "\n"
         << "run.abort_reason = " << log.abort_reason << "\n"
         << "path.total_length = " << path.total_length() << "\n"
         << truckctl::DumpScenarioConfig(cfg);
  }
  truckctl::WriteRunPlots(out_dir, log.rows);

  std::cout << config_file.string() << ": "
            << (log.completed ? "completed" : "incomplete") << " in "
            << summary.duration << " s simulated, max |rho| "
            << summary.max_abs_rho << " m, output " << out_dir.string() << "\n";
  if (!log.completed) std::cerr << "reason: " << log.abort_reason << "\n";
  return log.completed;
}

int CmdRun(const RunOptions& opts) {
  if (opts.batch.empty()) {
    if (opts.config.empty()) {
      std::cerr << "run: --config or --batch is required\n";
      return kExitError;
    }
    return RunOne(opts.config, opts.out, opts) ? 0 : kExitIncomplete;
  }
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(opts.batch)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ini") {
      configs.push_back(entry.path());
    }
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    std::cerr << "run: no .ini files in " << opts.batch << "\n";
    return kExitError;
  }
  bool all = true;
  for (const fs::path& c : configs) {
    all = RunOne(c, fs::path(opts.out) / c.stem(), opts) && all;
  }
  return all ? 0 : kExitIncomplete;
}

int CmdGenPath(const std::string& spec_file, const std::string& out_file) {
  const truckctl::PathSpec spec = truckctl::ReadPathSpec(spec_file);
  const std::vector<truckctl::Waypoint> waypoints = truckctl::GeneratePath(spec);
  truckctl::WriteWaypointFile(out_file, waypoints);
  std::cout << "wrote " << waypoints.size() << " waypoints to " << out_file << "\n";
  return 0;
}

int CmdSummarize(const std::string& log_file, std::string meta_file,
                 const std::string& out_file) {
  const std::vector<truckctl::LogRow> rows = truckctl::ReadSimLog(log_file);
  if (meta_file.empty()) meta_file = (fs::path(log_file).parent_path() / "metadata.txt").string();
  bool completed = false;
  std::string reason = "completion unknown: no metadata file";
  std::ifstream meta(meta_file);
  if (meta) {
    reason.clear();
    std::string line;
    while (std::getline(meta, line)) {
      if (line.rfind("run.completed = ", 0) == 0) {
        completed = line.substr(16) == "true";
      } else if (line.rfind("run.abort_reason = ", 0) == 0) {
        reason = line.substr(19);
      }
    }
  }
  const truckctl::RunSummary summary = truckctl::Summarize(rows, completed, reason, 0.0);
  if (out_file.empty()) {
    std::cout << truckctl::FormatSummary(summary);
  } else {
    truckctl::WriteSummary(out_file, summary);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-vehicle path tracking: NMPC speed planning and robust LQR steering"};
  app.require_subcommand(1);

  RunOptions run_opts;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run a closed-loop scenario");
  run->add_option("--config", run_opts.config, "Scenario configuration file");
  run->add_option("--out", run_opts.out, "Output directory")->capture_default_str();
  auto* seed_opt = run->add_option("--seed", seed, "Random seed (overrides sim.seed)");
  run->add_option("--set", run_opts.overrides, "Override section.key=value (repeatable)");
  run->add_option("--batch", run_opts.batch, "Run every .ini file in this directory");

  std::string spec_file;
  std::string path_out;
  auto* gen = app.add_subcommand("gen-path", "Generate a waypoint file from a segment spec");
  gen->add_option("--spec", spec_file, "Segment specification file")->required();
  gen->add_option("--out", path_out, "Waypoint file to write")->required();

  std::string log_file;
  std::string meta_file;
  std::string summary_out;
  auto* sum = app.add_subcommand("summarize", "Recompute the run summary from a log");
  sum->add_option("--log", log_file, "Simulation log (CSV)")->required();
  sum->add_option("--metadata", meta_file, "Run metadata file (default: next to the log)");
  sum->add_option("--out", summary_out, "Write the summary here instead of stdout");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) {
      if (seed_opt->count() > 0) run_opts.seed = seed;
      return CmdRun(run_opts);
    }
    if (gen->parsed()) return CmdGenPath(spec_file, path_out);
    if (sum->parsed()) return CmdSummarize(log_file, meta_file, summary_out);
  } catch (const truckctl::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
