// Copyright 2026 The daaug Authors.
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

// pipeline run --config <file> [--stage <name>] [--llm-mode live|record|replay]
//              [--force] [--set key=value ...]
// pipeline report <dir>
//
// Exit codes: 0 success, 2 config error, 3 stage failure.

#include <iostream>

#include "CLI11.hpp"
#include "daaug/pipeline.h"

namespace {

constexpr int kConfigError = 2;
constexpr int kStageFailure = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DA-prediction data augmentation pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string stage;
  std::string mode;
  bool force = false;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "Run the pipeline or a single stage");
  run->add_option("--config", config_path, "Pipeline config file (JSON)")->required();
  run->add_option("--stage", stage, "Run only this stage");
  run->add_option("--llm-mode", mode, "live, record or replay");
  run->add_flag("--force", force, "Rerun even when artifacts are fresh");
  run->add_option("--set", overrides, "Override a config key, e.g. histories.sampling.seed=7");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Summarize a run directory");
  report->add_option("dir", report_dir, "Output directory of a run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (*report) {
      std::cout << daaug::render_run_report(report_dir);
      return 0;
    }
    if (!mode.empty()) overrides.push_back("llm.mode=" + mode);
    daaug::PipelineConfig config = daaug::load_pipeline_config(config_path, overrides);
    daaug::RunRequest req;
    req.force = force;
    if (!stage.empty()) {
      req.only = daaug::parse_stage(stage);
      if (!req.only) throw daaug::ConfigError("unknown stage '" + stage + "'");
    }
    daaug::Pipeline pipeline(std::move(config));
    for (const auto& o : pipeline.run(req)) {
      std::cout << daaug::stage_name(o.stage) << "\t" << (o.ran ? "ran" : "skipped") << "\t"
                << o.artifact.content_digest.substr(0, 16) << "\n";
    }
    return 0;
  } catch (const daaug::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const daaug::StageError& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return kStageFailure;
  } catch (const std::exception& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return kStageFailure;
  }
}
