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

// Multi-seed experiment runner and ablation matrix over the predictor.

#ifndef DAAUG_EVALUATION_H_
#define DAAUG_EVALUATION_H_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "daaug/corpus.h"
#include "daaug/history_generator.h"
#include "daaug/metrics.h"
#include "daaug/predictor.h"
#include "daaug/splits.h"
#include "json.hpp"

namespace daaug {

struct EvalScores {
  double exact = 0.0;
  double partial = 0.0;
};

using PredictFn = std::function<TagSet(const PredictionInstance&)>;

// Fractions of instances passing each predicate. Throws
// std::invalid_argument on an empty set.
EvalScores evaluate(const PredictFn& predict, std::span<const PredictionInstance> instances);
EvalScores evaluate(const PredictorModel& model, std::span<const PredictionInstance> instances);

struct EvalRow {
  std::string setting;
  int split = 0;
  std::uint64_t seed = 0;
  EvalScores scores;
  // Empty when the cell succeeded; failed cells stay out of the aggregates.
  std::string error;
  Hyperparams hyper;
  int best_epoch = 0;

  bool ok() const { return error.empty(); }
};

struct EvalAggregate {
  std::string setting;
  int split = -1;  // -1: pooled over every split
  std::size_t runs = 0;
  double mean_exact = 0.0;
  double std_exact = 0.0;
  double mean_partial = 0.0;
  double std_partial = 0.0;
};

struct EvalReport {
  std::string kind;  // "experiment" or "ablation"
  std::string config_digest;
  std::vector<int> splits;
  std::vector<EvalRow> rows;
  std::vector<EvalAggregate> aggregates;

  // Rebuilds aggregates from rows: one per (setting, split) and, when more
  // than one split is present, one pooled row per setting. Settings keep
  // their first-appearance order.
  void recompute_aggregates();
  const EvalAggregate* find(std::string_view setting, int split = -1) const;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  // One line per (setting, split, seed).
  std::string to_tsv() const;
  // "Setting  Exact  Partial" table with "mean ± std" cells.
  std::string render_table() const;
};

// "0.3041 ± 0.0070"
std::string format_mean_std(double mean, double std);

inline constexpr std::string_view kAblationLowResource = "LowResource";
inline constexpr std::string_view kAblationNoHistoryGen = "w/o DA History Gen";
inline constexpr std::string_view kAblationNoSecondFinetune = "DA History Gen w/o Second Finetune";
inline constexpr std::string_view kAblationNoStyle = "w/o Speaker Style";
inline constexpr std::string_view kAblationOurs = "Ours";
const std::vector<std::string>& ablation_variants();

struct RunOptions {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  Hyperparams hyper;
  int workers = 1;
  std::string config_digest;
};

struct ExperimentInput {
  int split_index = 0;
  SplitConfig split_config;
  // Augmented instances appended to Low-Resource training for
  // LowResourceAug; required only when that setting is requested.
  std::vector<PredictionInstance> augmented;
  bool has_augmented = false;
};

// Trains one predictor per (setting, seed) and evaluates it on the split's
// shared test set. Validation comes from the setting's own split.
EvalReport run_experiment(const Corpus& corpus, const ExperimentInput& input,
                          const std::vector<SplitName>& settings, const RunOptions& options);

struct AblationInput {
  int split_index = 0;
  SplitConfig split_config;
  // Keyed by variant name; every variant other than LowResource needs one.
  std::map<std::string, std::vector<PredictionInstance>> augmented;
};

// Variants of ablation_variants() (or the subset named in `variants`),
// each trained on Low-Resource data plus its augmented set, per split and
// seed; pooled aggregates average across splits.
EvalReport run_ablation(const Corpus& corpus, const std::vector<AblationInput>& inputs,
                        const RunOptions& options,
                        const std::vector<std::string>& variants = ablation_variants());

// Pairs drawn uniformly with replacement from existing instances, as the
// history source for the variant without DA-history generation.
std::vector<HistoryPair> sample_existing_histories(std::span<const PredictionInstance> instances,
                                                   std::size_t count, std::uint64_t seed);

}  // namespace daaug

#endif  // DAAUG_EVALUATION_H_
