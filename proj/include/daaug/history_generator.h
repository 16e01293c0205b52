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

// Generation of operator DA histories conditioned on the current turn.
//
// Given the current act a_t and operator utterance s_t, the model produces
// the n preceding per-turn tag sets. It is trained twice: first on every
// group's training dialogues, then continued on the target group only, so
// sampled histories keep general dialogue structure while following the
// target group's dynamics. Sampled (a_t, history) pairs that were never seen
// before become conditions for dialogue generation.
//
// The reference model generates the history backwards from a_t as an
// order-2 Markov chain over whole tag sets. Each step's distribution is a
// Witten-Bell interpolation of four count levels:
//
//   unigram  ->  previous step  ->  two previous steps
//            ->  two previous steps + utterance feature
//
// on top of a uniform floor. Phase 2 keeps the phase-1 tables and, at every
// level, treats the phase-1 estimate p as a Dirichlet prior for the target
// counts of that level's context:
//
//   (scale * target_count + a * p) / (scale * target_total + a)
//
// with a = prior_strength * (types seen in the phase-1 context) and
// scale = phase-2 learning rate / phase-1 learning rate. Adapted lower levels
// feed the backoff of higher ones. Finally every step distribution is
// multiplied by (adapted unigram / phase-1 unigram)^marginal_exponent and
// renormalized, which carries the target group's overall act shift into
// contexts the target data never visited.

#ifndef DAAUG_HISTORY_GENERATOR_H_
#define DAAUG_HISTORY_GENERATOR_H_

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "daaug/corpus.h"
#include "daaug/instances.h"
#include "daaug/tags.h"
#include "daaug/util.h"
#include "json.hpp"

namespace daaug {

struct HistoryCondition {
  TagSet gold;            // a_t, None-free and non-empty
  std::string utterance;  // s_t
  std::string source_id;  // "<dialogue id>#<turn index>"
};

struct HistoryGenExample {
  HistoryCondition condition;
  DaHistory target;  // exactly n steps, PAD prefix allowed
};

// Coarse features of s_t: a word-count bucket plus which keyword classes
// occur. Packed into one small integer.
struct UtteranceFeaturizer {
  std::vector<int> length_bounds = {4, 10};
  std::vector<std::pair<std::string, std::vector<std::string>>> keyword_classes;

  std::uint32_t feature_of(std::string_view utterance) const;
  nlohmann::json to_json() const;
  static UtteranceFeaturizer from_json(const nlohmann::json& j);
};

UtteranceFeaturizer default_featurizer();

enum class ModelPhase { kUntrained, kPhase1, kPhase2 };
std::string_view phase_name(ModelPhase phase);

struct HistoryTrainingHyper {
  double learning_rate = 1e-4;
  // Phase 2 only.
  double prior_strength = 10.0;    // pseudo-counts per observed phase-1 type
  double marginal_exponent = 1.0;  // 0 disables the unigram rescaling
};

struct SamplingParams {
  int k_samples = 3;
  int top_k = 50;
  double top_p = 0.9;
  double temperature = 0.9;
  std::uint64_t seed = 1;

  void validate() const;
};

class HistoryModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HistorySequenceModel {
 public:
  explicit HistorySequenceModel(int n, UtteranceFeaturizer featurizer = default_featurizer());

  ModelPhase phase() const { return phase_; }
  int n() const { return n_; }
  // Real tokens (PAD included, the unknown-token slot excluded).
  std::vector<HistoryStep> vocabulary() const;

  // untrained -> phase1. Throws on empty input or a non-finite objective.
  void train_phase1(std::span<const HistoryGenExample> examples,
                    const HistoryTrainingHyper& hyper);
  // phase1 -> phase2 on target-group examples only.
  void train_phase2(std::span<const HistoryGenExample> target_examples,
                    const HistoryTrainingHyper& hyper);

  // Exact log-probability of example.target given its condition. Steps
  // outside the vocabulary are scored as the unknown token.
  double log_likelihood(const HistoryGenExample& example) const;
  double mean_log_likelihood(std::span<const HistoryGenExample> examples) const;

  // k_samples histories; a pure function of (model, condition, params,
  // stream). Temperature 0 decodes greedily.
  std::vector<DaHistory> sample(const HistoryCondition& condition, const SamplingParams& params,
                                std::uint64_t stream) const;
  DaHistory greedy(const HistoryCondition& condition) const;

  std::string serialize() const;
  static HistorySequenceModel deserialize(std::string_view blob);
  std::string digest() const;

 private:
  struct Context {
    std::uint32_t c1 = 0;
    std::uint32_t c2 = 0;
    std::uint32_t feature = 0;
    friend bool operator==(const Context&, const Context&) = default;
  };
  struct ContextHash {
    std::size_t operator()(const Context& c) const noexcept;
  };
  struct CountTable {
    std::vector<std::pair<int, double>> counts;  // token -> count
    double total = 0.0;
    void add(int token, double amount);
  };
  using Level = std::unordered_map<Context, CountTable, ContextHash>;
  static constexpr int kLevels = 4;

  static Context level_context(int level, const Context& full);
  static nlohmann::json levels_to_json(const std::array<Level, kLevels>& levels);
  static void levels_from_json(const nlohmann::json& j, std::size_t vocab_size,
                               std::array<Level, kLevels>& levels);
  Context step_context(const HistoryCondition& condition, std::uint32_t feature,
                       const DaHistory& generated) const;
  int token_id(HistoryStep step) const;
  int intern(HistoryStep step);
  void count_examples(std::span<const HistoryGenExample> examples,
                      std::array<Level, kLevels>& levels, double weight);
  // Masked, normalized distribution over token ids for history step
  // `step` (0 is the step right before t).
  std::vector<double> next_distribution(const Context& ctx, std::size_t step,
                                        bool allow_unknown) const;
  DaHistory decode(const HistoryCondition& condition, const SamplingParams* params,
                   Rng* rng) const;
  void adapt(int level, const Context& ctx, std::vector<double>& p) const;
  void compute_unigram_ratio();
  void require_trained() const;

  int n_;
  UtteranceFeaturizer featurizer_;
  ModelPhase phase_ = ModelPhase::kUntrained;
  double phase1_learning_rate_ = 0.0;
  double prior_strength_ = 0.0;  // phase 2
  double target_scale_ = 0.0;    // phase 2
  double marginal_exponent_ = 0.0;  // phase 2
  std::vector<double> unigram_ratio_;
  std::vector<std::uint32_t> vocab_;  // step bits; index 0 is the unknown token
  std::unordered_map<std::uint32_t, int> token_index_;
  std::array<Level, kLevels> levels_;         // phase-1 counts
  std::array<Level, kLevels> target_levels_;  // phase-2 counts
};

// --- Data preparation -------------------------------------------------------

struct HistoryDataConfig {
  int train_dialogues = 120;
  int gen_dialogues = 90;
  // Target-group dialogues; they join both the training and generation side.
  std::vector<std::string> target_dialogue_ids;
  int n = kDefaultHistoryLength;
  std::uint64_t seed = 1;
};

struct HistoryData {
  std::vector<HistoryGenExample> train;         // phase-1 data (all groups)
  std::vector<HistoryGenExample> target_train;  // phase-2 data
  std::vector<HistoryCondition> gen_conditions;
  std::vector<std::string> train_dialogue_ids;
  std::vector<std::string> gen_dialogue_ids;
};

HistoryGenExample example_from_instance(const Dialogue& dialogue,
                                        const PredictionInstance& instance);
std::vector<HistoryGenExample> examples_from_dialogues(const Corpus& corpus,
                                                       const std::vector<std::string>& ids,
                                                       int n);

// Shuffles the non-minor dialogues with `seed`, takes the first
// train_dialogues for training and the next gen_dialogues for generation,
// and adds the target dialogues to both sides.
HistoryData build_history_training_data(const Corpus& corpus, const HistoryDataConfig& config);

// --- Candidate sampling and novelty ------------------------------------------

struct HistoryPair {
  TagSet gold;
  DaHistory history;
  bool novel = false;
  std::string source_id;

  HistoryKey key() const { return {gold, history}; }
};

using SeenSet = std::unordered_set<HistoryKey, HistoryKeyHash>;

// k_samples candidates per condition, condition-major order. Condition i
// uses random stream i, so results do not depend on `workers`.
std::vector<HistoryPair> sample_candidates(const HistorySequenceModel& model,
                                           const std::vector<HistoryCondition>& conditions,
                                           const SamplingParams& params, int workers = 1);

// Keeps candidates whose (a_t, history) is not in `seen`, in order, adding
// each kept key to `seen` so repeats within the batch collapse too.
std::vector<HistoryPair> dedup_novel(const std::vector<HistoryPair>& candidates, SeenSet& seen);

SeenSet seen_from_instances(std::span<const PredictionInstance> instances);

// Number of novel pairs whose (a_t, history) occurs among `reference`.
std::size_t novelty_overlap(const std::vector<HistoryPair>& novel_pairs,
                            std::span<const PredictionInstance> reference);

nlohmann::json pair_to_json(const HistoryPair& pair);
HistoryPair pair_from_json(const nlohmann::json& j);
std::string pairs_to_string(const std::vector<HistoryPair>& pairs);
std::vector<HistoryPair> load_pairs(const std::string& path);

}  // namespace daaug

#endif  // DAAUG_HISTORY_GENERATOR_H_
