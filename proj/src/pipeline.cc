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

#include "daaug/pipeline.h"

#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include "daaug/corpus.h"
#include "daaug/mock_backend.h"
#include "daaug/style_extractor.h"
#include "daaug/util.h"

namespace daaug {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kPipelineVersion = "daaug-pipeline-1";

constexpr std::array<std::pair<Stage, std::string_view>, 9> kStageNames = {{
    {Stage::kIngest, "ingest"},
    {Stage::kSynth, "synth"},
    {Stage::kSplit, "split"},
    {Stage::kStyles, "styles"},
    {Stage::kHistories, "histories"},
    {Stage::kDialogues, "dialogues"},
    {Stage::kTrain, "train"},
    {Stage::kEval, "eval"},
    {Stage::kAblate, "ablate"},
}};

// --- Config parsing ----------------------------------------------------------

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ConfigError("unknown key '" + std::string(where) + "." + k + "'");
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, std::string_view where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("'" + std::string(where) + "." + key + "' has the wrong type");
  }
}

json section(const json& raw, const char* key) {
  return raw.contains(key) ? raw.at(key) : json::object();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string file_digest_or_empty(const fs::path& p) {
  if (p.empty()) return "";
  return sha256_hex(read_file(p));
}

void apply_override(json& raw, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  std::string key = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;
  }
  json* node = &raw;
  auto parts = split(key, '.');
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override '" + key + "' crosses a non-object value");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError("override '" + key + "' crosses a non-object value");
  (*node)[parts.back()] = parsed;
}

json synth_to_json(const SynthPreset& p) {
  return {{"minors", p.minors},
          {"adults", p.adults},
          {"seniors", p.seniors},
          {"dialogues_per_customer", p.dialogues_per_customer},
          {"min_operator_turns", p.min_operator_turns},
          {"max_operator_turns", p.max_operator_turns},
          {"minor_perturbation_tv", p.minor_perturbation_tv},
          {"minor_style", p.minor_style},
          {"seed", p.seed}};
}

SynthPreset synth_from_json(const json& j) {
  check_keys(j, "corpus.synth",
             {"minors", "adults", "seniors", "dialogues_per_customer", "min_operator_turns",
              "max_operator_turns", "minor_perturbation_tv", "minor_style", "seed"});
  SynthPreset p;
  const char* w = "corpus.synth";
  p.minors = get_or(j, "minors", p.minors, w);
  p.adults = get_or(j, "adults", p.adults, w);
  p.seniors = get_or(j, "seniors", p.seniors, w);
  p.dialogues_per_customer = get_or(j, "dialogues_per_customer", p.dialogues_per_customer, w);
  p.min_operator_turns = get_or(j, "min_operator_turns", p.min_operator_turns, w);
  p.max_operator_turns = get_or(j, "max_operator_turns", p.max_operator_turns, w);
  p.minor_perturbation_tv = get_or(j, "minor_perturbation_tv", p.minor_perturbation_tv, w);
  p.minor_style = get_or(j, "minor_style", p.minor_style, w);
  p.seed = get_or(j, "seed", p.seed, w);
  return p;
}

json config_to_json(const PipelineConfig& c) {
  json corpus = json::object();
  if (c.corpus_path) corpus["path"] = c.corpus_path->string();
  if (c.synth) corpus["synth"] = synth_to_json(*c.synth);
  json settings = json::array();
  for (SplitName s : c.settings) settings.push_back(split_name(s));
  return {
      {"output_dir", c.output_dir.string()},
      {"corpus", corpus},
      {"n", c.n},
      {"splits",
       {{"indices", c.split_indices},
        {"low_resource", c.low_resource_minors},
        {"full_resource", c.full_resource_minors},
        {"validation_dialogues", c.validation_dialogues},
        {"seed", c.split_seed}}},
      {"llm",
       {{"mode", llm_mode_name(c.llm_mode)},
        {"backend", c.llm_backend},
        {"endpoint", c.llm_endpoint},
        {"api_key_env", c.llm_api_key_env},
        {"model", c.llm_model},
        {"max_requests", c.llm_max_requests},
        {"parallelism", c.llm_parallelism},
        {"cache", c.llm_cache.string()}}},
      {"styles",
       {{"runs", c.style_runs},
        {"strategy", c.style_strategy},
        {"manual_path", c.style_manual_path.string()},
        {"template", c.style_template.string()},
        {"seed", c.style_seed}}},
      {"histories",
       {{"train_dialogues", c.history_train_dialogues},
        {"gen_dialogues", c.history_gen_dialogues},
        {"phase1", {{"learning_rate", c.history_phase1.learning_rate}}},
        {"phase2",
         {{"learning_rate", c.history_phase2.learning_rate},
          {"prior_strength", c.history_phase2.prior_strength},
          {"marginal_exponent", c.history_phase2.marginal_exponent}}},
        {"sampling",
         {{"k", c.sampling.k_samples},
          {"top_k", c.sampling.top_k},
          {"top_p", c.sampling.top_p},
          {"temperature", c.sampling.temperature},
          {"seed", c.sampling.seed}}}}},
      {"dialogues",
       {{"max_retries", c.augment.max_retries},
        {"batch_size", c.augment.batch_size},
        {"few_shot", c.few_shot},
        {"template", c.dialogue_template.string()},
        {"target_count", c.target_count}}},
      {"predictor", {{"grid", c.grid.to_json()}, {"grid_seeds", c.grid_seeds}}},
      {"seeds", c.seeds},
      {"settings", settings},
      {"ablation", c.ablation},
      {"workers", c.workers},
  };
}

void validate_config(const PipelineConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.output_dir.empty()) fail("output_dir is required");
  if (c.corpus_path.has_value() == c.synth.has_value()) {
    fail("corpus needs exactly one of 'path' or 'synth'");
  }
  if (c.corpus_path && !fs::is_regular_file(*c.corpus_path)) {
    fail("corpus file not found: " + c.corpus_path->string());
  }
  if (c.n < 1) fail("n must be >= 1");
  if (c.split_indices.empty()) fail("splits.indices must not be empty");
  if (std::set<int>(c.split_indices.begin(), c.split_indices.end()).size() != c.split_indices.size()) {
    fail("splits.indices has duplicates");
  }
  for (int i : c.split_indices) {
    if (i < 0) fail("split indices must be >= 0");
  }
  if (c.low_resource_minors < 1 || c.full_resource_minors < c.low_resource_minors) {
    fail("splits need 1 <= low_resource <= full_resource");
  }
  if (c.validation_dialogues < 1) fail("splits.validation_dialogues must be >= 1");
  if (c.llm_backend != "mock" && c.llm_backend != "http") fail("llm.backend must be mock or http");
  if (c.llm_backend == "http" && c.llm_endpoint.empty()) fail("llm.endpoint is required for http");
  if (c.llm_parallelism < 1) fail("llm.parallelism must be >= 1");
  if (c.style_runs < 1) fail("styles.runs must be >= 1");
  if (c.style_strategy != "union" && c.style_strategy != "manual") {
    fail("styles.strategy must be union or manual");
  }
  if (c.style_strategy == "manual" && !fs::is_regular_file(c.style_manual_path)) {
    fail("styles.manual_path not found: " + c.style_manual_path.string());
  }
  for (const fs::path& t : {c.style_template, c.dialogue_template}) {
    if (!t.empty() && !fs::is_regular_file(t)) fail("template not found: " + t.string());
  }
  if (c.history_train_dialogues < 1 || c.history_gen_dialogues < 1) {
    fail("histories.train_dialogues and gen_dialogues must be >= 1");
  }
  try {
    c.sampling.validate();
  } catch (const std::exception& e) {
    fail(std::string("histories.sampling: ") + e.what());
  }
  if (c.augment.max_retries < 0 || c.augment.batch_size < 1) {
    fail("dialogues.max_retries must be >= 0 and batch_size >= 1");
  }
  if (c.few_shot < 1) fail("dialogues.few_shot must be >= 1");
  auto grid = c.grid.expand();
  if (grid.empty()) fail("predictor.grid is empty");
  for (const auto& h : grid) {
    try {
      h.validate();
    } catch (const std::exception& e) {
      fail(std::string("predictor.grid: ") + e.what());
    }
  }
  if (c.grid_seeds.empty() || c.seeds.empty()) fail("seeds and predictor.grid_seeds must be non-empty");
  if (c.settings.empty()) fail("settings must be non-empty");
  if (c.workers < 1) fail("workers must be >= 1");
}

// --- Files and digests -------------------------------------------------------

std::vector<std::string> list_files(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string rel = fs::relative(e.path(), dir).generic_string();
    if (rel != kArtifactFile) out.push_back(rel);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string content_digest(const fs::path& dir, const std::vector<std::string>& files) {
  std::string acc;
  for (const auto& f : files) {
    acc += f;
    acc += '\0';
    acc += sha256_hex(read_file(dir / f));
    acc += '\n';
  }
  return sha256_hex(acc);
}

void write_json(const fs::path& p, const json& j) { write_file_atomic(p, j.dump(2) + "\n"); }

json read_json(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw std::runtime_error("cannot parse " + p.string() + ": " + e.what());
  }
}

json split_config_to_json(const SplitConfig& c) {
  return {{"low_resource_minor_ids", c.low_resource_minor_ids},
          {"full_resource_minor_ids", c.full_resource_minor_ids},
          {"test_minor_ids", c.test_minor_ids},
          {"validation_dialogues", c.validation_dialogues},
          {"n", c.n},
          {"seed", c.seed}};
}

SplitConfig split_config_from_json(const json& j) {
  SplitConfig c;
  c.low_resource_minor_ids = j.at("low_resource_minor_ids").get<std::vector<std::string>>();
  c.full_resource_minor_ids = j.at("full_resource_minor_ids").get<std::vector<std::string>>();
  c.test_minor_ids = j.at("test_minor_ids").get<std::vector<std::string>>();
  c.validation_dialogues = j.at("validation_dialogues").get<int>();
  c.n = j.at("n").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::string split_file(int index) { return "split_" + std::to_string(index) + ".json"; }

std::vector<std::string> dialogues_of(const Corpus& corpus, const std::vector<std::string>& customers) {
  std::set<std::string> ids(customers.begin(), customers.end());
  std::vector<std::string> out;
  for (const auto& d : corpus.dialogues) {
    if (ids.count(d.customer_id)) out.push_back(d.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<PredictionInstance> plain_instances(const std::vector<AugmentedInstance>& aug) {
  std::vector<PredictionInstance> out;
  out.reserve(aug.size());
  for (const auto& a : aug) out.push_back(a.instance);
  return out;
}

std::string render_novelty(const std::vector<json>& rows) {
  std::string out =
      "split  candidates  novel(phase1)  novel(phase2)  overlap(phase1)  overlap(phase2)\n";
  for (const auto& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-5d  %10zu  %13zu  %13zu  %15zu  %15zu\n",
                  r.at("split").get<int>() + 1, r.at("candidates").get<std::size_t>(),
                  r.at("novel_phase1").get<std::size_t>(), r.at("novel_phase2").get<std::size_t>(),
                  r.at("overlap_phase1").get<std::size_t>(),
                  r.at("overlap_phase2").get<std::size_t>());
    out += buf;
  }
  return out;
}

// Exclusive ownership of an output directory for the duration of a run.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    for (int tries = 0; tries < 2; ++tries) {
      std::FILE* f = std::fopen(path_.c_str(), "wx");
      if (f) {
        std::fprintf(f, "%ld\n", static_cast<long>(::getpid()));
        std::fclose(f);
        return;
      }
      long pid = 0;
      if (std::FILE* r = std::fopen(path_.c_str(), "r")) {
        if (std::fscanf(r, "%ld", &pid) != 1) pid = 0;
        std::fclose(r);
      }
      // A lock left behind by a dead process is taken over.
      if (pid > 0 && ::kill(static_cast<pid_t>(pid), 0) != 0 && errno == ESRCH) {
        fs::remove(path_);
        continue;
      }
      throw ConfigError("output directory " + dir.string() + " is locked by process " +
                        std::to_string(pid));
    }
    throw ConfigError("cannot lock output directory " + dir.string());
  }
  ~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
};

}  // namespace

// --- Public helpers ------------------------------------------------------------

std::string_view stage_name(Stage stage) {
  for (const auto& [s, name] : kStageNames) {
    if (s == stage) return name;
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (const auto& [s, n] : kStageNames) {
    if (n == name) return s;
  }
  return std::nullopt;
}

StageError::StageError(Stage stage, const std::string& message)
    : std::runtime_error("stage '" + std::string(stage_name(stage)) + "': " + message),
      stage_(stage) {}

std::string variant_slug(std::string_view variant) {
  if (variant == kAblationOurs) return "ours";
  if (variant == kAblationNoStyle) return "no_style";
  if (variant == kAblationNoSecondFinetune) return "no_ft2";
  if (variant == kAblationNoHistoryGen) return "no_hist";
  return "";
}

PipelineConfig parse_pipeline_config(const json& raw, const fs::path& base_dir) {
  if (!raw.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(raw, "config",
             {"output_dir", "corpus", "n", "splits", "llm", "styles", "histories", "dialogues",
              "predictor", "seeds", "settings", "ablation", "workers"});
  PipelineConfig c;
  c.output_dir = resolve(base_dir, get_or<std::string>(raw, "output_dir", "", "config"));

  json corpus = section(raw, "corpus");
  check_keys(corpus, "corpus", {"path", "synth"});
  if (corpus.contains("path")) {
    c.corpus_path = resolve(base_dir, get_or<std::string>(corpus, "path", "", "corpus"));
  }
  if (corpus.contains("synth")) c.synth = synth_from_json(corpus.at("synth"));

  c.n = get_or(raw, "n", c.n, "config");

  json sp = section(raw, "splits");
  check_keys(sp, "splits", {"indices", "low_resource", "full_resource", "validation_dialogues", "seed"});
  c.split_indices = get_or(sp, "indices", c.split_indices, "splits");
  c.low_resource_minors = get_or(sp, "low_resource", c.low_resource_minors, "splits");
  c.full_resource_minors = get_or(sp, "full_resource", c.full_resource_minors, "splits");
  c.validation_dialogues = get_or(sp, "validation_dialogues", c.validation_dialogues, "splits");
  c.split_seed = get_or(sp, "seed", c.split_seed, "splits");

  json llm = section(raw, "llm");
  check_keys(llm, "llm",
             {"mode", "backend", "endpoint", "api_key_env", "model", "max_requests", "parallelism", "cache"});
  std::string mode = get_or<std::string>(llm, "mode", "replay", "llm");
  auto parsed_mode = parse_llm_mode(mode);
  if (!parsed_mode) throw ConfigError("llm.mode must be live, record or replay (got '" + mode + "')");
  c.llm_mode = *parsed_mode;
  c.llm_backend = get_or(llm, "backend", c.llm_backend, "llm");
  c.llm_endpoint = get_or(llm, "endpoint", c.llm_endpoint, "llm");
  c.llm_api_key_env = get_or(llm, "api_key_env", c.llm_api_key_env, "llm");
  c.llm_model = get_or(llm, "model", c.llm_model, "llm");
  c.llm_max_requests = get_or(llm, "max_requests", c.llm_max_requests, "llm");
  c.llm_parallelism = get_or(llm, "parallelism", c.llm_parallelism, "llm");
  std::string cache = get_or<std::string>(llm, "cache", "", "llm");
  c.llm_cache = cache.empty() ? c.output_dir / "llm_cache.jsonl" : resolve(base_dir, cache);

  json st = section(raw, "styles");
  check_keys(st, "styles", {"runs", "strategy", "manual_path", "template", "seed"});
  c.style_runs = get_or(st, "runs", c.style_runs, "styles");
  c.style_strategy = get_or(st, "strategy", c.style_strategy, "styles");
  c.style_manual_path = resolve(base_dir, get_or<std::string>(st, "manual_path", "", "styles"));
  c.style_template = resolve(base_dir, get_or<std::string>(st, "template", "", "styles"));
  c.style_seed = get_or(st, "seed", c.style_seed, "styles");

  json hs = section(raw, "histories");
  check_keys(hs, "histories", {"train_dialogues", "gen_dialogues", "phase1", "phase2", "sampling"});
  c.history_train_dialogues = get_or(hs, "train_dialogues", c.history_train_dialogues, "histories");
  c.history_gen_dialogues = get_or(hs, "gen_dialogues", c.history_gen_dialogues, "histories");
  json p1 = section(hs, "phase1");
  check_keys(p1, "histories.phase1", {"learning_rate"});
  c.history_phase1.learning_rate =
      get_or(p1, "learning_rate", c.history_phase1.learning_rate, "histories.phase1");
  json p2 = section(hs, "phase2");
  check_keys(p2, "histories.phase2", {"learning_rate", "prior_strength", "marginal_exponent"});
  c.history_phase2.learning_rate =
      get_or(p2, "learning_rate", c.history_phase2.learning_rate, "histories.phase2");
  c.history_phase2.prior_strength =
      get_or(p2, "prior_strength", c.history_phase2.prior_strength, "histories.phase2");
  c.history_phase2.marginal_exponent =
      get_or(p2, "marginal_exponent", c.history_phase2.marginal_exponent, "histories.phase2");
  json sa = section(hs, "sampling");
  check_keys(sa, "histories.sampling", {"k", "top_k", "top_p", "temperature", "seed"});
  c.sampling.k_samples = get_or(sa, "k", c.sampling.k_samples, "histories.sampling");
  c.sampling.top_k = get_or(sa, "top_k", c.sampling.top_k, "histories.sampling");
  c.sampling.top_p = get_or(sa, "top_p", c.sampling.top_p, "histories.sampling");
  c.sampling.temperature = get_or(sa, "temperature", c.sampling.temperature, "histories.sampling");
  c.sampling.seed = get_or(sa, "seed", c.sampling.seed, "histories.sampling");

  json dg = section(raw, "dialogues");
  check_keys(dg, "dialogues", {"max_retries", "batch_size", "few_shot", "template", "target_count"});
  c.augment.max_retries = get_or(dg, "max_retries", c.augment.max_retries, "dialogues");
  c.augment.batch_size = get_or(dg, "batch_size", c.augment.batch_size, "dialogues");
  c.few_shot = get_or(dg, "few_shot", c.few_shot, "dialogues");
  c.dialogue_template = resolve(base_dir, get_or<std::string>(dg, "template", "", "dialogues"));
  c.target_count = get_or(dg, "target_count", c.target_count, "dialogues");

  json pr = section(raw, "predictor");
  check_keys(pr, "predictor", {"grid", "grid_seeds"});
  if (pr.contains("grid")) {
    check_keys(pr.at("grid"), "predictor.grid",
               {"batch_sizes", "warmup_ratios", "learning_rates", "thresholds", "epochs", "patience"});
    try {
      c.grid = HyperGrid::from_json(pr.at("grid"));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("predictor.grid: ") + e.what());
    }
  }
  c.grid_seeds = get_or(pr, "grid_seeds", c.grid_seeds, "predictor");

  c.seeds = get_or(raw, "seeds", c.seeds, "config");
  if (raw.contains("settings")) {
    c.settings.clear();
    for (const auto& s : get_or<std::vector<std::string>>(raw, "settings", {}, "config")) {
      auto name = parse_split_name(s);
      if (!name) throw ConfigError("unknown setting '" + s + "'");
      c.settings.push_back(*name);
    }
  }
  c.ablation = get_or(raw, "ablation", c.ablation, "config");
  c.workers = get_or(raw, "workers", c.workers, "config");

  validate_config(c);
  c.effective = config_to_json(c);
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path, const std::vector<std::string>& overrides) {
  json raw;
  try {
    raw = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
  } catch (const std::exception& e) {
    throw ConfigError("cannot read config " + path.string() + ": " + e.what());
  }
  for (const auto& o : overrides) apply_override(raw, o);
  return parse_pipeline_config(raw, fs::absolute(path).parent_path());
}

json StageArtifact::to_json() const {
  return {{"stage", stage},
          {"input_digest", input_digest},
          {"content_digest", content_digest},
          {"upstream", upstream},
          {"files", files}};
}

StageArtifact StageArtifact::from_json(const json& j, fs::path dir) {
  StageArtifact a;
  a.stage = j.at("stage").get<std::string>();
  a.input_digest = j.at("input_digest").get<std::string>();
  a.content_digest = j.at("content_digest").get<std::string>();
  a.upstream = j.at("upstream").get<std::map<std::string, std::string>>();
  a.files = j.at("files").get<std::vector<std::string>>();
  a.dir = std::move(dir);
  return a;
}

// --- Pipeline --------------------------------------------------------------------

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {}

Stage Pipeline::corpus_stage() const { return config_.synth ? Stage::kSynth : Stage::kIngest; }

std::vector<Stage> Pipeline::plan() const {
  std::vector<Stage> out = {corpus_stage(), Stage::kSplit, Stage::kStyles, Stage::kHistories,
                            Stage::kDialogues, Stage::kTrain, Stage::kEval};
  if (config_.ablation) out.push_back(Stage::kAblate);
  return out;
}

std::vector<Stage> Pipeline::upstream_of(Stage stage) const {
  const Stage c = corpus_stage();
  switch (stage) {
    case Stage::kIngest:
    case Stage::kSynth:
      return {};
    case Stage::kSplit:
      return {c};
    case Stage::kStyles:
    case Stage::kHistories:
      return {c, Stage::kSplit};
    case Stage::kDialogues:
      return {c, Stage::kSplit, Stage::kStyles, Stage::kHistories};
    case Stage::kTrain:
      return {c, Stage::kSplit, Stage::kDialogues};
    case Stage::kEval:
    case Stage::kAblate:
      return {c, Stage::kSplit, Stage::kDialogues, Stage::kTrain};
  }
  return {};
}

fs::path Pipeline::stage_dir(Stage stage) const {
  return config_.output_dir / std::string(stage_name(stage));
}

json Pipeline::config_slice(Stage stage) const {
  const json& e = config_.effective;
  switch (stage) {
    case Stage::kIngest:
      // Content, not location, identifies the input corpus.
      return {{"corpus_sha256", file_digest_or_empty(*config_.corpus_path)}};
    case Stage::kSynth:
      return e.at("corpus").at("synth");
    case Stage::kSplit:
      return {{"n", e.at("n")}, {"splits", e.at("splits")}};
    case Stage::kStyles: {
      json s = e.at("styles");
      s.erase("manual_path");
      s.erase("template");
      s["manual_sha256"] =
          config_.style_strategy == "manual" ? file_digest_or_empty(config_.style_manual_path) : "";
      s["template_sha256"] = file_digest_or_empty(config_.style_template);
      return {{"styles", s}, {"backend", config_.llm_backend}, {"model", config_.llm_model}};
    }
    case Stage::kHistories:
      return {{"histories", e.at("histories")}, {"ablation", config_.ablation}};
    case Stage::kDialogues: {
      json d = e.at("dialogues");
      d.erase("template");
      d["template_sha256"] = file_digest_or_empty(config_.dialogue_template);
      return {{"dialogues", d}, {"backend", config_.llm_backend}, {"model", config_.llm_model},
              {"ablation", config_.ablation}};
    }
    case Stage::kTrain:
      return {{"predictor", e.at("predictor")}, {"settings", e.at("settings")},
              {"seed", config_.seeds.front()}};
    case Stage::kEval:
      return {{"seeds", e.at("seeds")}, {"settings", e.at("settings")}};
    case Stage::kAblate:
      return {{"seeds", e.at("seeds")}};
  }
  return json::object();
}

std::string Pipeline::input_digest(Stage stage, const std::map<std::string, std::string>& upstream) const {
  json j = {{"version", kPipelineVersion},
            {"stage", stage_name(stage)},
            {"config", config_slice(stage)},
            {"upstream", upstream}};
  return sha256_hex(j.dump());
}

std::optional<StageArtifact> Pipeline::load_artifact(Stage stage) const {
  fs::path dir = stage_dir(stage);
  fs::path file = dir / std::string(kArtifactFile);
  if (!fs::is_regular_file(file)) return std::nullopt;
  try {
    return StageArtifact::from_json(read_json(file), dir);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

bool Pipeline::intact(const StageArtifact& a) const {
  for (const auto& f : a.files) {
    if (!fs::is_regular_file(a.dir / f)) return false;
  }
  return content_digest(a.dir, a.files) == a.content_digest;
}

StageArtifact Pipeline::require_fresh(Stage stage, int depth) {
  auto art = load_artifact(stage);
  if (!art) {
    throw std::runtime_error("missing upstream artifact '" + std::string(stage_name(stage)) +
                             "'; run that stage first");
  }
  std::map<std::string, std::string> up;
  for (Stage u : upstream_of(stage)) {
    up[std::string(stage_name(u))] = require_fresh(u, depth + 1).content_digest;
  }
  if (art->input_digest != input_digest(stage, up)) {
    throw std::runtime_error("upstream artifact '" + std::string(stage_name(stage)) +
                             "' is stale (its inputs changed); rerun it");
  }
  if (!intact(*art)) {
    throw std::runtime_error("upstream artifact '" + std::string(stage_name(stage)) +
                             "' does not match its recorded digest");
  }
  return *art;
}

StageOutcome Pipeline::run_one(Stage stage, bool force, bool strict_upstream) {
  std::map<std::string, std::string> up;
  try {
    for (Stage u : upstream_of(stage)) {
      StageArtifact a;
      if (strict_upstream) {
        a = require_fresh(u, 1);
      } else {
        auto loaded = load_artifact(u);
        if (!loaded) throw std::runtime_error("missing upstream artifact '" + std::string(stage_name(u)) + "'");
        a = *loaded;
      }
      up[std::string(stage_name(u))] = a.content_digest;
    }
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
  const std::string digest = input_digest(stage, up);
  if (!force) {
    auto existing = load_artifact(stage);
    if (existing && existing->input_digest == digest && intact(*existing)) {
      std::cerr << "[" << stage_name(stage) << "] up to date, skipped\n";
      return {stage, false, *existing};
    }
  }
  std::cerr << "[" << stage_name(stage) << "] running\n";
  const fs::path final_dir = stage_dir(stage);
  const fs::path tmp = final_dir.string() + ".tmp";
  try {
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    execute(stage, tmp);
    StageArtifact a;
    a.stage = std::string(stage_name(stage));
    a.input_digest = digest;
    a.upstream = up;
    a.files = list_files(tmp);
    a.content_digest = content_digest(tmp, a.files);
    write_json(tmp / std::string(kArtifactFile), a.to_json());
    fs::remove_all(final_dir);
    fs::rename(tmp, final_dir);
    a.dir = final_dir;
    return {stage, true, a};
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::vector<StageOutcome> Pipeline::run(const RunRequest& request) {
  fs::create_directories(config_.output_dir);
  DirLock lock(config_.output_dir);
  write_json(config_.output_dir / "config.effective.json", config_.effective);
  std::vector<StageOutcome> out;
  if (request.only) {
    const Stage s = *request.only;
    if (s == Stage::kIngest || s == Stage::kSynth) {
      if (s != corpus_stage()) {
        throw ConfigError("stage '" + std::string(stage_name(s)) +
                          "' does not match the configured corpus source");
      }
    }
    if (s == Stage::kAblate && !config_.ablation) throw ConfigError("ablation is disabled in the config");
    out.push_back(run_one(s, request.force, true));
    return out;
  }
  for (Stage s : plan()) out.push_back(run_one(s, request.force, false));
  write_file_atomic(config_.output_dir / "report.txt", render_run_report(config_.output_dir));
  return out;
}

void Pipeline::execute(Stage stage, const fs::path& dir) {
  switch (stage) {
    case Stage::kIngest: return do_ingest(dir);
    case Stage::kSynth: return do_synth(dir);
    case Stage::kSplit: return do_split(dir);
    case Stage::kStyles: return do_styles(dir);
    case Stage::kHistories: return do_histories(dir);
    case Stage::kDialogues: return do_dialogues(dir);
    case Stage::kTrain: return do_train(dir);
    case Stage::kEval: return do_eval(dir);
    case Stage::kAblate: return do_ablate(dir);
  }
}

// --- Stage bodies ----------------------------------------------------------------

namespace {

struct SplitState {
  int index = 0;
  SplitConfig config;
  std::vector<std::string> lr_minor_dialogues;
};

std::vector<SplitState> load_splits(const fs::path& split_dir, const std::vector<int>& indices,
                                    const Corpus& corpus) {
  std::vector<SplitState> out;
  for (int i : indices) {
    json j = read_json(split_dir / split_file(i));
    SplitState s;
    s.index = i;
    s.config = split_config_from_json(j.at("config"));
    s.lr_minor_dialogues = dialogues_of(corpus, s.config.low_resource_minor_ids);
    out.push_back(std::move(s));
  }
  return out;
}

// Splits whose augmented data the stages produce: all configured ones when
// the ablation runs, else the primary split only.
std::vector<int> generation_splits(const PipelineConfig& c) {
  if (c.ablation) return c.split_indices;
  return {c.split_indices.front()};
}

std::size_t augmentation_need(const PipelineConfig& c, const DatasetSplit& lr, const DatasetSplit& fr) {
  const std::size_t target = c.target_count ? c.target_count : fr.train.size();
  if (target < lr.train.size()) {
    throw std::runtime_error("augmentation target " + std::to_string(target) +
                             " is below the Low-Resource size " + std::to_string(lr.train.size()));
  }
  return target - lr.train.size();
}

std::shared_ptr<CompletionProvider> make_provider(const PipelineConfig& c) {
  if (c.llm_backend == "mock") return std::make_shared<MockCompletionProvider>();
  const char* key = c.llm_api_key_env.empty() ? nullptr : std::getenv(c.llm_api_key_env.c_str());
  return std::make_shared<HttpCompletionProvider>(c.llm_endpoint, key ? key : "",
                                                  make_default_http_transport());
}

std::unique_ptr<LlmGateway> make_gateway(const PipelineConfig& c) {
  GatewayOptions o;
  o.mode = c.llm_mode;
  o.max_requests = c.llm_max_requests;
  o.parallelism = c.llm_parallelism;
  if (!c.llm_cache.parent_path().empty()) fs::create_directories(c.llm_cache.parent_path());
  return std::make_unique<LlmGateway>(o, make_provider(c), std::make_shared<CompletionCache>(c.llm_cache));
}

std::vector<Dialogue> pick_dialogues(const Corpus& corpus, std::vector<std::string> ids, int count,
                                     std::uint64_t seed) {
  std::sort(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(ids);
  if (ids.size() < static_cast<std::size_t>(count)) {
    throw std::runtime_error("need " + std::to_string(count) + " dialogues, only " +
                             std::to_string(ids.size()) + " available");
  }
  std::vector<Dialogue> out;
  for (int i = 0; i < count; ++i) out.push_back(*corpus.find(ids[i]));
  return out;
}

}  // namespace

void Pipeline::do_ingest(const fs::path& dir) {
  Corpus c = load_corpus(config_.corpus_path->string());
  write_file_atomic(dir / std::string(kCorpusFile), serialize_corpus_string(c));
}

void Pipeline::do_synth(const fs::path& dir) {
  Corpus c = generate_synthetic_corpus(make_travel_agency_spec(*config_.synth));
  write_file_atomic(dir / std::string(kCorpusFile), serialize_corpus_string(c));
}

void Pipeline::do_split(const fs::path& dir) {
  Corpus corpus = load_corpus((stage_dir(corpus_stage()) / std::string(kCorpusFile)).string());
  std::string table;
  for (int i : config_.split_indices) {
    SplitConfig sc = make_split_config(corpus, i, config_.low_resource_minors,
                                       config_.full_resource_minors, config_.n, config_.split_seed);
    sc.validation_dialogues = config_.validation_dialogues;
    check_split_config(corpus, sc);
    json splits = json::object();
    std::vector<DatasetSplit> built;
    for (SplitName name : {SplitName::kMinorsOnly, SplitName::kZeroShot, SplitName::kLowResource,
                           SplitName::kFullResource}) {
      DatasetSplit s = build_split(corpus, name, sc);
      splits[std::string(split_name(name))] = {
          {"dialogues", s.dialogue_count()},     {"train", s.train.size()},
          {"valid", s.valid.size()},             {"test", s.test.size()},
          {"train_dialogue_ids", s.train_dialogue_ids}, {"valid_dialogue_ids", s.valid_dialogue_ids},
          {"test_dialogue_ids", s.test_dialogue_ids}};
      built.push_back(std::move(s));
    }
    write_json(dir / split_file(i), {{"split", i}, {"config", split_config_to_json(sc)}, {"splits", splits}});
    table += "Split " + std::to_string(i + 1) + "\n" + render_split_report(split_report(built)) + "\n";
  }
  write_file_atomic(dir / "table.txt", table);
}

void Pipeline::do_styles(const fs::path& dir) {
  Corpus corpus = load_corpus((stage_dir(corpus_stage()) / std::string(kCorpusFile)).string());
  auto splits = load_splits(stage_dir(Stage::kSplit), generation_splits(config_), corpus);
  StyleTemplate tmpl = config_.style_template.empty() ? default_style_template()
                                                      : load_style_template(config_.style_template.string());
  auto gateway = make_gateway(config_);
  std::vector<std::string> nontarget_pool;
  for (const auto& d : corpus.dialogues) {
    if (d.group != Group::kMinor) nontarget_pool.push_back(d.id);
  }
  for (const auto& s : splits) {
    const std::uint64_t seed = mix64(config_.style_seed) + static_cast<std::uint64_t>(s.index);
    auto target = pick_dialogues(corpus, s.lr_minor_dialogues, 3, seed);
    auto nontarget = pick_dialogues(corpus, nontarget_pool, 3, seed + 1);
    StylePromptOptions opts;
    opts.params.model_name = config_.llm_model;
    Prompt prompt = build_style_prompt(target, nontarget, tmpl, opts);
    auto runs = extract_parseable_styles(*gateway, prompt, config_.style_runs);
    SpeakerStyleProfile profile =
        config_.style_strategy == "manual"
            ? consolidate_styles(runs, ConsolidationStrategy::kManualFile, config_.style_manual_path.string())
            : consolidate_styles(runs, ConsolidationStrategy::kUnion);
    json raw = json::array();
    for (const auto& r : runs) raw.push_back({{"attempt", r.attempt}, {"cache_key", r.cache_key}, {"text", r.text}});
    std::vector<std::string> ids;
    for (const auto& d : target) ids.push_back(d.id);
    for (const auto& d : nontarget) ids.push_back(d.id);
    const std::string tag = std::to_string(s.index);
    write_json(dir / ("runs_" + tag + ".json"), {{"dialogues", ids}, {"runs", raw}});
    write_json(dir / ("profile_" + tag + ".json"), profile_to_json(profile));
  }
}

void Pipeline::do_histories(const fs::path& dir) {
  Corpus corpus = load_corpus((stage_dir(corpus_stage()) / std::string(kCorpusFile)).string());
  auto splits = load_splits(stage_dir(Stage::kSplit), generation_splits(config_), corpus);
  std::vector<json> novelty;
  for (const auto& s : splits) {
    const std::string tag = std::to_string(s.index);
    HistoryDataConfig hc;
    hc.train_dialogues = config_.history_train_dialogues;
    hc.gen_dialogues = config_.history_gen_dialogues;
    hc.target_dialogue_ids = s.lr_minor_dialogues;
    hc.n = config_.n;
    hc.seed = config_.sampling.seed + static_cast<std::uint64_t>(s.index);
    HistoryData data = build_history_training_data(corpus, hc);

    HistorySequenceModel phase1(config_.n);
    phase1.train_phase1(data.train, config_.history_phase1);
    HistorySequenceModel phase2 = phase1;
    phase2.train_phase2(data.target_train, config_.history_phase2);
    write_file_atomic(dir / ("model_phase1_" + tag + ".json"), phase1.serialize());
    write_file_atomic(dir / ("model_phase2_" + tag + ".json"), phase2.serialize());

    DatasetSplit lr = build_split(corpus, SplitName::kLowResource, s.config);
    SamplingParams sp = config_.sampling;
    auto cand2 = sample_candidates(phase2, data.gen_conditions, sp, config_.workers);
    auto cand1 = sample_candidates(phase1, data.gen_conditions, sp, config_.workers);
    SeenSet seen2 = seen_from_instances(lr.train);
    SeenSet seen1 = seen2;
    auto novel2 = dedup_novel(cand2, seen2);
    auto novel1 = dedup_novel(cand1, seen1);
    write_file_atomic(dir / ("pairs_phase2_" + tag + ".jsonl"), pairs_to_string(novel2));
    write_file_atomic(dir / ("pairs_phase1_" + tag + ".jsonl"), pairs_to_string(novel1));

    // Held-out target users: every minor outside the Low-Resource set.
    std::set<std::string> lr_minors(s.config.low_resource_minor_ids.begin(),
                                    s.config.low_resource_minor_ids.end());
    std::vector<PredictionInstance> held;
    for (const auto& d : corpus.dialogues) {
      if (d.group != Group::kMinor || lr_minors.count(d.customer_id)) continue;
      auto v = build_dialogue_instances(d, config_.n);
      held.insert(held.end(), v.begin(), v.end());
    }
    novelty.push_back({{"split", s.index},
                       {"candidates", cand2.size()},
                       {"novel_phase1", novel1.size()},
                       {"novel_phase2", novel2.size()},
                       {"overlap_phase1", novelty_overlap(novel1, held)},
                       {"overlap_phase2", novelty_overlap(novel2, held)},
                       {"heldout_instances", held.size()}});
    if (config_.ablation) {
      DatasetSplit fr = build_split(corpus, SplitName::kFullResource, s.config);
      const std::size_t need = augmentation_need(config_, lr, fr);
      auto random = sample_existing_histories(lr.train, 2 * need + 64, hc.seed);
      write_file_atomic(dir / ("pairs_random_" + tag + ".jsonl"), pairs_to_string(random));
    }
  }
  write_json(dir / "novelty.json", novelty);
  write_file_atomic(dir / "novelty.txt", render_novelty(novelty));
}

void Pipeline::do_dialogues(const fs::path& dir) {
  Corpus corpus = load_corpus((stage_dir(corpus_stage()) / std::string(kCorpusFile)).string());
  auto splits = load_splits(stage_dir(Stage::kSplit), generation_splits(config_), corpus);
  const fs::path hdir = stage_dir(Stage::kHistories);
  const fs::path sdir = stage_dir(Stage::kStyles);
  DialogueTemplate tmpl = config_.dialogue_template.empty()
                              ? default_dialogue_template()
                              : load_dialogue_template(config_.dialogue_template.string());
  auto gateway = make_gateway(config_);
  for (const auto& s : splits) {
    const std::string tag = std::to_string(s.index);
    SpeakerStyleProfile profile = load_profile((sdir / ("profile_" + tag + ".json")).string());
    DatasetSplit lr = build_split(corpus, SplitName::kLowResource, s.config);
    DatasetSplit fr = build_split(corpus, SplitName::kFullResource, s.config);
    const std::size_t need = augmentation_need(config_, lr, fr);
    const std::size_t target = lr.train.size() + need;
    FewShotBank bank = build_few_shot_bank(corpus, s.lr_minor_dialogues, config_.n,
                                           config_.split_seed + static_cast<std::uint64_t>(s.index),
                                           config_.few_shot);
    struct Job {
      std::string variant;
      std::string pairs_file;
      DialoguePromptOptions options;
    };
    DialoguePromptOptions base;
    base.params.model_name = config_.llm_model;
    std::vector<Job> jobs = {{std::string(kAblationOurs), "pairs_phase2_" + tag + ".jsonl", base}};
    if (config_.ablation) {
      DialoguePromptOptions no_style = base;
      no_style.include_style = false;
      DialoguePromptOptions existing = base;
      existing.require_novel = false;
      // Shares the exact pair file with the full method.
      jobs.push_back({std::string(kAblationNoStyle), "pairs_phase2_" + tag + ".jsonl", no_style});
      jobs.push_back({std::string(kAblationNoSecondFinetune), "pairs_phase1_" + tag + ".jsonl", base});
      jobs.push_back({std::string(kAblationNoHistoryGen), "pairs_random_" + tag + ".jsonl", existing});
    }
    for (const auto& job : jobs) {
      const fs::path pairs_path = hdir / job.pairs_file;
      auto pairs = load_pairs(pairs_path.string());
      AugmentResult res = augment_until(target, lr.train.size(), profile, pairs, bank, *gateway,
                                        config_.augment, tmpl, job.options);
      const std::string slug = variant_slug(job.variant);
      write_file_atomic(dir / ("aug_" + tag + "_" + slug + ".jsonl"), augmented_to_string(res.instances));
      json tally = res.tally.to_json();
      tally["variant"] = job.variant;
      tally["pairs_file"] = job.pairs_file;
      tally["pairs_sha256"] = sha256_hex(read_file(pairs_path));
      tally["low_resource"] = lr.train.size();
      tally["target"] = target;
      write_json(dir / ("tally_" + tag + "_" + slug + ".json"), tally);
    }
  }
}

void Pipeline::do_train(const fs::path& dir) {
  Corpus corpus = load_corpus((stage_dir(corpus_stage()) / std::string(kCorpusFile)).string());
  const int primary = config_.split_indices.front();
  auto splits = load_splits(stage_dir(Stage::kSplit), {primary}, corpus);
  const SplitConfig& sc = splits.front().config;
  DatasetSplit lr = build_split(corpus, SplitName::kLowResource, sc);
  std::set<std::string> forbidden(lr.test_dialogue_ids.begin(), lr.test_dialogue_ids.end());
  GridResult grid = grid_search(lr.train, lr.valid, config_.grid.expand(), config_.grid_seeds, forbidden);
  write_file_atomic(dir / "grid.tsv", grid.to_tsv());
  write_json(dir / "best_hyper.json",
             {{"hyper", grid.best.to_json()}, {"mean_valid_exact", grid.best_mean_exact}});

  auto aug = load_augmented(
      (stage_dir(Stage::kDialogues) / ("aug_" + std::to_string(primary) + "_ours.jsonl")).string());
  fs::create_directories(dir / "models");
  for (SplitName s : config_.settings) {
    DatasetSplit split = s == SplitName::kLowResourceAug ? lr : build_split(corpus, s, sc);
    if (s == SplitName::kLowResourceAug) {
      auto extra = plain_instances(aug);
      split.train.insert(split.train.end(), extra.begin(), extra.end());
    }
    PredictorModel m = train_predictor(split.train, split.valid, grid.best, config_.seeds.front(),
                                       forbidden, std::string(split_name(s)));
    write_file_atomic(dir / "models" / (std::string(split_name(s)) + ".bin"), m.serialize());
  }
}

void Pipeline::do_eval(const fs::path& dir) {
  Corpus corpus = load_corpus((stage_dir(corpus_stage()) / std::string(kCorpusFile)).string());
  const int primary = config_.split_indices.front();
  auto splits = load_splits(stage_dir(Stage::kSplit), {primary}, corpus);
  ExperimentInput in;
  in.split_index = primary;
  in.split_config = splits.front().config;
  in.augmented = plain_instances(load_augmented(
      (stage_dir(Stage::kDialogues) / ("aug_" + std::to_string(primary) + "_ours.jsonl")).string()));
  in.has_augmented = true;
  RunOptions opts;
  opts.seeds = config_.seeds;
  opts.hyper = Hyperparams::from_json(read_json(stage_dir(Stage::kTrain) / "best_hyper.json").at("hyper"));
  opts.workers = config_.workers;
  opts.config_digest = sha256_hex(config_slice(Stage::kEval).dump() + config_slice(Stage::kTrain).dump());
  EvalReport report = run_experiment(corpus, in, config_.settings, opts);
  write_json(dir / "report.json", report.to_json());
  write_file_atomic(dir / "per_seed.tsv", report.to_tsv());
  write_file_atomic(dir / "table.txt", report.render_table());
}

void Pipeline::do_ablate(const fs::path& dir) {
  Corpus corpus = load_corpus((stage_dir(corpus_stage()) / std::string(kCorpusFile)).string());
  auto splits = load_splits(stage_dir(Stage::kSplit), config_.split_indices, corpus);
  std::vector<AblationInput> inputs;
  for (const auto& s : splits) {
    AblationInput in;
    in.split_index = s.index;
    in.split_config = s.config;
    for (const auto& v : ablation_variants()) {
      if (v == kAblationLowResource) continue;
      fs::path f = stage_dir(Stage::kDialogues) /
                   ("aug_" + std::to_string(s.index) + "_" + variant_slug(v) + ".jsonl");
      in.augmented[v] = plain_instances(load_augmented(f.string()));
    }
    inputs.push_back(std::move(in));
  }
  RunOptions opts;
  opts.seeds = config_.seeds;
  opts.hyper = Hyperparams::from_json(read_json(stage_dir(Stage::kTrain) / "best_hyper.json").at("hyper"));
  opts.workers = config_.workers;
  opts.config_digest = sha256_hex(config_slice(Stage::kAblate).dump() + config_slice(Stage::kTrain).dump());
  EvalReport report = run_ablation(corpus, inputs, opts);
  write_json(dir / "report.json", report.to_json());
  write_file_atomic(dir / "per_seed.tsv", report.to_tsv());
  write_file_atomic(dir / "table.txt", report.render_table());
}

// --- Report --------------------------------------------------------------------

std::string render_run_report(const fs::path& output_dir) {
  auto done = [&](std::string_view stage) {
    return fs::is_regular_file(output_dir / std::string(stage) / std::string(kArtifactFile));
  };
  bool any = false;
  for (const auto& [s, name] : kStageNames) any = any || done(name);
  if (!any) throw ConfigError("no completed stage in " + output_dir.string());
  std::string out = "# Run summary\n";
  if (done("split")) {
    out += "\n## Split sizes (dialogues / instances)\n\n" + read_file(output_dir / "split" / "table.txt");
  }
  if (done("histories")) {
    out += "\n## Novel DA-history pairs\n\n" + read_file(output_dir / "histories" / "novelty.txt");
  }
  if (done("eval")) {
    out += "\n## Evaluation (mean ± sample std over seeds)\n\n" + read_file(output_dir / "eval" / "table.txt");
  }
  if (done("ablate")) {
    out += "\n## Ablation (averaged across splits)\n\n" + read_file(output_dir / "ablate" / "table.txt");
  }
  return out;
}

}  // namespace daaug
