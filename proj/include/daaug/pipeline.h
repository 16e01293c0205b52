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

// Stage-by-stage driver. Every stage writes into <output>/<stage>/ and
// records an artifact.json holding the digest of its inputs (config slice
// plus upstream content digests) and of its own output files. A stage whose
// recorded input digest matches and whose files are intact is skipped.

#ifndef DAAUG_PIPELINE_H_
#define DAAUG_PIPELINE_H_

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "daaug/dialogue_generator.h"
#include "daaug/evaluation.h"
#include "daaug/history_generator.h"
#include "daaug/llm_gateway.h"
#include "daaug/predictor.h"
#include "daaug/splits.h"
#include "daaug/synth.h"
#include "json.hpp"

namespace daaug {

enum class Stage { kIngest, kSynth, kSplit, kStyles, kHistories, kDialogues, kTrain, kEval, kAblate };

std::string_view stage_name(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StageError : public std::runtime_error {
 public:
  StageError(Stage stage, const std::string& message);
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

// Parsed, validated form of the JSON config file. Relative paths resolve
// against the config file's directory.
struct PipelineConfig {
  std::filesystem::path output_dir;

  // Exactly one corpus source.
  std::optional<std::filesystem::path> corpus_path;
  std::optional<SynthPreset> synth;

  int n = kDefaultHistoryLength;
  std::vector<int> split_indices = {0};  // the first one is the primary split
  int low_resource_minors = 3;
  int full_resource_minors = 10;
  int validation_dialogues = 21;
  std::uint64_t split_seed = 1;

  LlmMode llm_mode = LlmMode::kReplay;
  std::string llm_backend = "mock";  // mock | http
  std::string llm_endpoint;
  std::string llm_api_key_env;
  std::string llm_model;
  long llm_max_requests = -1;
  int llm_parallelism = 4;
  std::filesystem::path llm_cache;  // default <output>/llm_cache.jsonl

  int style_runs = 3;
  std::string style_strategy = "union";  // union | manual
  std::filesystem::path style_manual_path;
  std::filesystem::path style_template;  // empty: built-in
  std::uint64_t style_seed = 1;

  int history_train_dialogues = 120;
  int history_gen_dialogues = 90;
  HistoryTrainingHyper history_phase1{1e-4, 10.0, 1.0};
  HistoryTrainingHyper history_phase2{5e-5, 10.0, 1.0};
  SamplingParams sampling;
  int workers = 1;

  AugmentPolicy augment;
  int few_shot = kDefaultFewShotCount;
  std::filesystem::path dialogue_template;  // empty: built-in
  // 0: Full-Resource training size of the split.
  std::size_t target_count = 0;

  HyperGrid grid;
  std::vector<std::uint64_t> grid_seeds = {1};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<SplitName> settings = {SplitName::kMinorsOnly, SplitName::kZeroShot,
                                     SplitName::kLowResource, SplitName::kLowResourceAug,
                                     SplitName::kFullResource};
  bool ablation = true;

  // Effective configuration as JSON (defaults filled in, paths resolved).
  nlohmann::json effective;
};

// Reads and validates a config file. `overrides` are "dotted.key=value"
// strings; values parse as JSON when possible, else as strings. Throws
// ConfigError on any problem.
PipelineConfig load_pipeline_config(const std::filesystem::path& path,
                                    const std::vector<std::string>& overrides = {});
PipelineConfig parse_pipeline_config(const nlohmann::json& raw,
                                     const std::filesystem::path& base_dir);

struct StageArtifact {
  std::string stage;
  std::string input_digest;
  std::string content_digest;
  std::map<std::string, std::string> upstream;  // stage -> content digest
  std::vector<std::string> files;               // relative to the stage directory
  std::filesystem::path dir;

  nlohmann::json to_json() const;
  static StageArtifact from_json(const nlohmann::json& j, std::filesystem::path dir);
};

struct StageOutcome {
  Stage stage;
  bool ran = false;
  StageArtifact artifact;
};

struct RunRequest {
  std::optional<Stage> only;
  bool force = false;
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  // Without `only`, runs every stage in order, skipping fresh ones and
  // rerunning stale ones. With `only`, runs that single stage; its upstream
  // artifacts must exist and be fresh. Takes the output directory's lock.
  std::vector<StageOutcome> run(const RunRequest& request);

  // Stages a full run would execute, in order.
  std::vector<Stage> plan() const;
  std::vector<Stage> upstream_of(Stage stage) const;

  const PipelineConfig& config() const { return config_; }

 private:
  StageOutcome run_one(Stage stage, bool force, bool strict_upstream);
  StageArtifact require_fresh(Stage stage, int depth);
  std::optional<StageArtifact> load_artifact(Stage stage) const;
  bool intact(const StageArtifact& artifact) const;
  std::string input_digest(Stage stage, const std::map<std::string, std::string>& upstream) const;
  nlohmann::json config_slice(Stage stage) const;
  std::filesystem::path stage_dir(Stage stage) const;
  Stage corpus_stage() const;

  void execute(Stage stage, const std::filesystem::path& dir);
  void do_ingest(const std::filesystem::path& dir);
  void do_synth(const std::filesystem::path& dir);
  void do_split(const std::filesystem::path& dir);
  void do_styles(const std::filesystem::path& dir);
  void do_histories(const std::filesystem::path& dir);
  void do_dialogues(const std::filesystem::path& dir);
  void do_train(const std::filesystem::path& dir);
  void do_eval(const std::filesystem::path& dir);
  void do_ablate(const std::filesystem::path& dir);

  PipelineConfig config_;
};

// File names inside stage directories that other stages and the report read.
inline constexpr std::string_view kCorpusFile = "corpus.jsonl";
inline constexpr std::string_view kArtifactFile = "artifact.json";

// Consolidated human-readable summary of whatever stages have completed:
// split table, novelty tallies, evaluation and ablation tables. Throws
// ConfigError when the directory holds no completed stage.
std::string render_run_report(const std::filesystem::path& output_dir);

// Ablation variant name -> file-name slug for its augmented dataset.
std::string variant_slug(std::string_view variant);

}  // namespace daaug

#endif  // DAAUG_PIPELINE_H_
