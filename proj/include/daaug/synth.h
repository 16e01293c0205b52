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

// Synthetic travel-agency corpora with group-specific operator DA dynamics
// and customer speaking styles. Stands in for the real multi-group corpus.

#ifndef DAAUG_SYNTH_H_
#define DAAUG_SYNTH_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "daaug/corpus.h"
#include "daaug/tags.h"
#include "daaug/util.h"

namespace daaug {

// Row-stochastic matrix over the 29 tags (28 operator tags + None).
using TransitionMatrix = std::array<std::array<double, kNumTags>, kNumTags>;
using TagDistribution = std::array<double, kNumTags>;

// How a group talks. Minors get ambiguous replies in front of the
// confirmation/inquiry acts their operators favour.
struct GroupStyle {
  // Probability a customer reply hints at the next operator act.
  double keyed_reply_prob = 0.6;
  // Probability of an ambiguous reply when the next act is a trigger.
  double ambiguous_prob = 0.0;
  TagSet ambiguous_triggers;
  std::vector<std::string> operator_openers;
  double opener_prob = 0.0;
};

struct DialogueLexicon {
  std::array<std::vector<std::string>, kNumTags> operator_phrases;
  // Customer replies that lead into the keyed operator act.
  std::array<std::vector<std::string>, kNumTags> keyed_replies;
  std::vector<std::string> generic_replies;
  std::vector<std::string> ambiguous_replies;
};

struct GroupSynthSpec {
  Group group = Group::kAdult;
  int customers = 0;
  int dialogues_per_customer = 0;
  TagDistribution initial{};
  TransitionMatrix transitions{};
  GroupStyle style;
};

struct SynthSpec {
  std::vector<GroupSynthSpec> groups;
  int min_operator_turns = 14;
  int max_operator_turns = 26;
  // Weights for 1, 2, 3, ... segments per operator turn.
  std::vector<double> segments_per_turn = {0.7, 0.25, 0.05};
  DialogueLexicon lexicon;
  std::uint64_t seed = 1;
};

// Throws std::invalid_argument describing the first problem.
void validate_synth_spec(const SynthSpec& spec);

// Pure function of `spec`. Each dialogue starts with the operator and ends
// with a customer reply; operator segment tags follow the group's chain.
Corpus generate_synthetic_corpus(const SynthSpec& spec);

// Knobs for the built-in travel-agency preset.
struct SynthPreset {
  int minors = 20;
  int adults = 25;
  int seniors = 10;
  int dialogues_per_customer = 6;
  int min_operator_turns = 14;
  int max_operator_turns = 26;
  // Total-variation distance of every minor transition row from the shared
  // adult/senior matrix; 0 gives a null corpus with identical dynamics.
  double minor_perturbation_tv = 0.2;
  // Ambiguous customer phrasing for minors. Off for a null corpus.
  bool minor_style = true;
  std::uint64_t seed = 1;
};

SynthSpec make_travel_agency_spec(const SynthPreset& preset);

const DialogueLexicon& travel_agency_lexicon();
const TransitionMatrix& travel_agency_base_matrix();
GroupStyle minor_group_style();
GroupStyle default_group_style();

// Acts minors' operators drift towards: confirmations and extra inquiries.
TagSet minor_preferred_acts();

// Mixes each row with mass `tv` placed outside that row's support, so the
// row-wise total-variation distance to `base` is exactly `tv`.
TransitionMatrix perturb_matrix(const TransitionMatrix& base, double tv,
                                TagSet preferred);

double total_variation(const TagDistribution& a, const TagDistribution& b);

// Realization helpers shared with the mock completion backend.
std::string render_operator_text(const DialogueLexicon& lexicon,
                                 const GroupStyle& style,
                                 const std::vector<DaTag>& segment_tags,
                                 Rng& rng,
                                 std::vector<std::string>* segment_texts);
std::string render_customer_reply(const DialogueLexicon& lexicon,
                                  const GroupStyle& style, TagSet next_tags,
                                  Rng& rng, std::string* customer_tag);

}  // namespace daaug

#endif  // DAAUG_SYNTH_H_
