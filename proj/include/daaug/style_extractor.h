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

// Contrastive speaker-style extraction: show a completion model equally many
// target-group and non-target dialogues, ask for the target users' style and
// the operators' style towards them, and merge several sampled answers into
// one profile.

#ifndef DAAUG_STYLE_EXTRACTOR_H_
#define DAAUG_STYLE_EXTRACTOR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "daaug/corpus.h"
#include "daaug/llm_gateway.h"
#include "json.hpp"

namespace daaug {

// First line of every style-extraction prompt; identifies the prompt class.
inline constexpr std::string_view kStylePromptMarker = "### Task: speaker style extraction";

struct StyleTemplate {
  std::string system_text;
  // Placeholders: {target_group}, {num_dialogues}, {dialogues}.
  std::string user_template;
};

const StyleTemplate& default_style_template();
// Reads a user template from `path`; the system text stays the default.
StyleTemplate load_style_template(const std::string& path);

struct StylePromptOptions {
  Group target_group = Group::kMinor;
  std::size_t max_input_chars = 60000;
  GenerationParams params{1.0, 1.0, 1024, ""};
};

class StyleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pure function of its inputs. Requires as many non-target as target
// dialogues, every target dialogue in the target group and none of the
// non-target ones. Oversized prompts are rejected, never truncated.
Prompt build_style_prompt(const std::vector<Dialogue>& target,
                          const std::vector<Dialogue>& nontarget,
                          const StyleTemplate& tmpl,
                          const StylePromptOptions& options = {});

struct StyleRun {
  int attempt = 0;
  std::string text;
  std::string cache_key;
};

// One completion per attempt index 0..runs-1.
std::vector<StyleRun> extract_styles(LlmGateway& gateway, const Prompt& prompt, int runs);

struct ParsedStyles {
  std::vector<std::string> user_style;
  std::vector<std::string> operator_style;
};

// Expects a "User style" section and an "Operator style" section with one
// bullet per line; nullopt when either is missing or empty.
std::optional<ParsedStyles> parse_style_output(std::string_view text);

// Like extract_styles(), but each unparseable answer gets one re-prompt with
// a stricter format reminder before it is reported.
std::vector<StyleRun> extract_parseable_styles(LlmGateway& gateway, const Prompt& prompt,
                                               int runs);

struct SpeakerStyleProfile {
  std::vector<std::string> user_style;
  std::vector<std::string> operator_style;
  std::string strategy;
  std::vector<std::string> cache_keys;

  std::string id() const;  // content digest
  friend bool operator==(const SpeakerStyleProfile&, const SpeakerStyleProfile&) = default;
};

enum class ConsolidationStrategy { kUnion, kManualFile };

// kUnion parses each run and keeps the first occurrence of every bullet
// (compared case- and whitespace-insensitively). kManualFile returns the
// human-edited profile at `manual_path` verbatim and records the runs.
SpeakerStyleProfile consolidate_styles(const std::vector<StyleRun>& runs,
                                       ConsolidationStrategy strategy,
                                       const std::string& manual_path = "");

// Canonical bullet comparison key.
std::string normalize_bullet(std::string_view bullet);

// Renders a profile in the section format parse_style_output() accepts.
std::string render_style_sections(const SpeakerStyleProfile& profile);

nlohmann::json profile_to_json(const SpeakerStyleProfile& profile);
SpeakerStyleProfile profile_from_json(const nlohmann::json& j);
SpeakerStyleProfile load_profile(const std::string& path);

// "Operator: ...\nCustomer: ..." rendering used in prompts.
std::string render_dialogue_text(const Dialogue& dialogue);

}  // namespace daaug

#endif  // DAAUG_STYLE_EXTRACTOR_H_
