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

// Turns novel (a_t, DA history) pairs into training instances: a few-shot
// prompt carries the speaker style, seven real target-group exemplars and
// the condition; the completion is parsed back into operator/customer turn
// pairs and checked structurally.

#ifndef DAAUG_DIALOGUE_GENERATOR_H_
#define DAAUG_DIALOGUE_GENERATOR_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "daaug/corpus.h"
#include "daaug/history_generator.h"
#include "daaug/instances.h"
#include "daaug/llm_gateway.h"
#include "daaug/style_extractor.h"
#include "json.hpp"

namespace daaug {

inline constexpr std::string_view kDialoguePromptMarker = "### Task: dialogue generation";
inline constexpr std::string_view kConditionHeader = "### Condition";
inline constexpr int kDefaultFewShotCount = 7;

class DialogueGenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FewShotExample {
  DaHistory history;  // full, no PAD
  TagSet gold;
  std::vector<TurnPair> pairs;
  std::string source_id;
};

struct FewShotBank {
  std::vector<FewShotExample> examples;

  // Throws DialogueGenError unless there are `expected` well-formed examples.
  void validate(std::size_t expected = kDefaultFewShotCount) const;
};

// Picks `count` instances with a full (PAD-free) history from the given
// target-group dialogues, by seeded choice over a deterministic ordering.
FewShotBank build_few_shot_bank(const Corpus& corpus,
                                const std::vector<std::string>& target_dialogue_ids, int n,
                                std::uint64_t seed, int count = kDefaultFewShotCount);

struct DialogueTemplate {
  std::string system_text;
  // Placeholders: {style}, {examples}, {condition}.
  std::string user_template;
};

const DialogueTemplate& default_dialogue_template();
DialogueTemplate load_dialogue_template(const std::string& path);

struct DialoguePromptOptions {
  // Off for the ablation that generates without speaker styles.
  bool include_style = true;
  // Off for the ablation that reuses existing Low-Resource histories.
  bool require_novel = true;
  std::size_t max_input_chars = 60000;
  GenerationParams params{1.0, 1.0, 1024, ""};
};

// "DA history: A | B,C | PAD" / "Next operator DA: X" block.
std::string render_condition(const DaHistory& history, TagSet gold);

struct ParsedCondition {
  DaHistory history;
  TagSet gold;
};
// Reads the condition block of a dialogue prompt back; nullopt if absent.
std::optional<ParsedCondition> parse_condition(std::string_view prompt_text);

Prompt build_dialogue_prompt(const SpeakerStyleProfile& profile, const HistoryPair& pair,
                             const FewShotBank& bank,
                             const DialogueTemplate& tmpl = default_dialogue_template(),
                             const DialoguePromptOptions& options = {});

enum class RejectReason { kNone, kWrongTurnCount, kRoleMisorder, kUnparseable, kTagMismatch };
std::string_view reject_reason_name(RejectReason reason);

struct ParseOutcome {
  bool accepted = false;
  RejectReason reason = RejectReason::kNone;
  std::string detail;
  std::vector<TurnPair> pairs;
};

// Accepts "Operator: [tags] text" / "Customer: text" lines; the bracketed
// tags are optional but must match the expected history step when present.
// One pair is expected per non-PAD step of expected.history (at most n).
ParseOutcome parse_generated_dialogue(std::string_view text, const HistoryPair& expected, int n);

struct AugmentPolicy {
  int max_retries = 2;
  std::size_t batch_size = 64;
};

struct AugmentedInstance {
  PredictionInstance instance;
  std::string style_profile_id;
  std::string history_pair_id;
  std::string cache_key;
  int attempt = 0;
  std::string validation_status = "accepted";
};

struct AugmentTally {
  std::size_t pairs_consumed = 0;
  std::size_t completions = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t pairs_skipped = 0;
  std::map<std::string, std::size_t> rejections_by_reason;

  nlohmann::json to_json() const;
};

struct AugmentResult {
  std::vector<AugmentedInstance> instances;
  AugmentTally tally;
};

std::string history_pair_id(const HistoryPair& pair);

// Produces exactly target_count - existing_count accepted instances,
// consuming novel pairs in order. A rejected pair is retried with the next
// attempt index up to max_retries times, then skipped. Output order follows
// pair index regardless of completion order. Throws DialogueGenError when
// the pairs run out; gateway errors (budget, cache miss) propagate.
AugmentResult augment_until(std::size_t target_count, std::size_t existing_count,
                            const SpeakerStyleProfile& profile,
                            const std::vector<HistoryPair>& novel_pairs, const FewShotBank& bank,
                            LlmGateway& gateway, const AugmentPolicy& policy = {},
                            const DialogueTemplate& tmpl = default_dialogue_template(),
                            const DialoguePromptOptions& options = {});

nlohmann::json augmented_to_json(const AugmentedInstance& inst);
AugmentedInstance augmented_from_json(const nlohmann::json& j);
std::string augmented_to_string(const std::vector<AugmentedInstance>& instances);
std::vector<AugmentedInstance> load_augmented(const std::string& path);

}  // namespace daaug

#endif  // DAAUG_DIALOGUE_GENERATOR_H_
