// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Command-line driver: corpus manifests, the staged experiment pipeline and
// report merging.
//
// Exit codes: 0 success, 1 unexpected failure, 2 configuration error,
// 3 data error, 4 training divergence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "psenh/errors.hpp"
#include "psenh/experiment.hpp"
#include "psenh/manifest.hpp"
#include "psenh/report.hpp"
#include "psenh/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kDivergence = 4 };

struct PipelineArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::vector<std::uint64_t> seeds;
  std::string output;
};

void add_pipeline_options(CLI::App *cmd, PipelineArgs &args) {
  cmd->add_option("-c,--config", args.config, "Experiment config (JSON)")->required();
  cmd->add_option("--set", args.overrides, "Override a config field: dotted.key=value");
  cmd->add_option("--seed", args.seeds, "Replace the seed list");
  cmd->add_option("-o,--output", args.output, "Output directory");
}

int run_pipeline(const PipelineArgs &args, psenh::Stage last) {
  auto overrides = args.overrides;
  if (!args.seeds.empty()) overrides.push_back("seeds=" + nlohmann::json(args.seeds).dump());
  if (!args.output.empty()) {
    // Relative to the working directory, like any other path argument.
    overrides.push_back("output_dir=" + nlohmann::json(fs::absolute(args.output).string()).dump());
  }
  const auto cfg = psenh::load_experiment_config(args.config, overrides);
  spdlog::info("{}: running through stage '{}' into {}", cfg.name, psenh::stage_name(last),
               cfg.output_dir.string());
  const auto summary = psenh::run_experiment(cfg, last, [](const std::string &m) { spdlog::info("{}", m); });
  spdlog::info("done: {} units run, {} reused", summary.units_run, summary.units_reused);
  if (summary.grid) std::fputs(psenh::render_text(*summary.grid).c_str(), stdout);
  return kOk;
}

int run_manifest(const std::string &root, const std::string &output, bool synthetic,
                 const std::string &synthetic_config, double min_duration) {
  if (synthetic) {
    psenh::SyntheticCorpusConfig sc;
    if (!synthetic_config.empty()) {
      std::ifstream in(synthetic_config);
      if (!in) throw psenh::ConfigError("cannot read " + synthetic_config);
      try {
        sc = nlohmann::json::parse(in).get<psenh::SyntheticCorpusConfig>();
      } catch (const nlohmann::json::exception &e) {
        throw psenh::ConfigError("invalid synthetic corpus config: " + std::string(e.what()));
      }
    }
    const auto n = psenh::generate_synthetic_corpus(root, sc);
    spdlog::info("generated {} files under {}", n, root);
  } else if (!fs::is_directory(root)) {
    throw psenh::DataError("corpus root " + root + " is not a readable directory");
  }
  psenh::ScanOptions opts;
  opts.min_duration_sec = min_duration;
  const auto scan = psenh::scan_corpus(root, opts);
  for (const auto &w : scan.warnings) spdlog::warn("{}", w);
  const fs::path out = output.empty() ? fs::path(root) / "manifest.jsonl" : fs::path(output);
  psenh::save_manifest(scan.manifest, out);
  spdlog::info("wrote {} entries to {}", scan.manifest.entries.size(), out.string());
  return kOk;
}

int run_report(const std::vector<std::string> &runs, const std::string &output, const std::string &format) {
  std::vector<fs::path> dirs(runs.begin(), runs.end());
  const auto fmt = psenh::parse_report_format(format);
  const auto grid = psenh::merge_runs(dirs);
  for (const auto &p : psenh::emit_report(grid, output, fmt)) spdlog::info("wrote {}", p.string());
  std::fputs(psenh::render_text(grid).c_str(), stdout);
  return kOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"psenh: personalized speech enhancement with self-supervised pretraining"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Log training progress");
  app.add_flag("-q,--quiet", quiet, "Log warnings and errors only");

  std::string root, manifest_out, synthetic_config;
  bool synthetic = false;
  double min_duration = 1.0;
  auto *manifest = app.add_subcommand("manifest", "Scan a corpus tree (or generate the synthetic one) into a manifest");
  manifest->add_option("-r,--root", root, "Corpus root")->required();
  manifest->add_option("-o,--output", manifest_out, "Manifest path (default <root>/manifest.jsonl)");
  manifest->add_flag("--synthetic", synthetic, "Generate the synthetic corpus under root first");
  manifest->add_option("--synthetic-config", synthetic_config, "Synthetic corpus settings (JSON)");
  manifest->add_option("--min-duration", min_duration, "Skip files shorter than this (s)");

  struct StageCmd {
    const char *name;
    const char *help;
    psenh::Stage stage;
    PipelineArgs args;
    CLI::App *cmd = nullptr;
  };
  std::vector<StageCmd> stages = {
      {"premix", "Partition the corpus and build premixtures", psenh::Stage::kPremix, {}},
      {"pretrain", "Run the pipeline through pretraining", psenh::Stage::kPretrain, {}},
      {"finetune", "Run the pipeline through finetuning", psenh::Stage::kFinetune, {}},
      {"evaluate", "Run the pipeline through evaluation", psenh::Stage::kEvaluate, {}},
      {"run", "Run every stage and emit the report", psenh::Stage::kReport, {}},
  };
  for (auto &s : stages) {
    s.cmd = app.add_subcommand(s.name, s.help);
    add_pipeline_options(s.cmd, s.args);
  }

  std::vector<std::string> runs;
  std::string report_out, report_format = "all";
  auto *report = app.add_subcommand("report", "Merge completed runs into one table and curve set");
  report->add_option("runs", runs, "Run directories")->required()->check(CLI::ExistingDirectory);
  report->add_option("-o,--output", report_out, "Report directory")->required();
  report->add_option("-f,--format", report_format, "all, json, csv, text or svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (*manifest) return run_manifest(root, manifest_out, synthetic, synthetic_config, min_duration);
    if (*report) return run_report(runs, report_out, report_format);
    for (const auto &s : stages) {
      if (*s.cmd) return run_pipeline(s.args, s.stage);
    }
  } catch (const psenh::ConfigError &e) {
    spdlog::error("config error: {}", e.what());
    return kConfig;
  } catch (const psenh::DataError &e) {
    spdlog::error("data error: {}", e.what());
    return kData;
  } catch (const psenh::DivergenceError &e) {
    spdlog::error("training diverged: {}", e.what());
    return kDivergence;
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kFailure;
}
