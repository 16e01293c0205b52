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

#include "daaug/mock_backend.h"

#include "daaug/dialogue_generator.h"
#include "daaug/style_extractor.h"
#include "daaug/util.h"

namespace daaug {
namespace {

constexpr std::string_view kStyleSection = "### Speaker style";

// Text of the speaker-style section, empty when the prompt has none.
std::string style_section(std::string_view text) {
  auto at = text.find(kStyleSection);
  if (at == std::string_view::npos) return "";
  auto end = text.find("\n###", at + kStyleSection.size());
  return std::string(text.substr(at, end == std::string_view::npos ? end : end - at));
}

// Plain style that produces ambiguous replies at the rate seen among the
// exemplar customer lines preceding the condition block.
GroupStyle imitated_style(const DialogueRenderRules& rules, std::string_view text) {
  GroupStyle style = rules.plain;
  auto cond_at = text.find(kConditionHeader);
  std::size_t replies = 0;
  std::size_t ambiguous = 0;
  for (const auto& line : split_lines(text.substr(0, cond_at))) {
    std::string_view l = trim(line);
    if (!l.starts_with("Customer:")) continue;
    ++replies;
    std::string_view body = trim(l.substr(9));
    for (const auto& a : rules.lexicon.ambiguous_replies) {
      if (body == a) {
        ++ambiguous;
        break;
      }
    }
  }
  if (replies == 0) return style;
  style.ambiguous_triggers = rules.styled.ambiguous_triggers;
  style.ambiguous_prob = static_cast<double>(ambiguous) / static_cast<double>(replies);
  return style;
}

std::string render_dialogue(const DialogueRenderRules& rules, const ParsedCondition& cond,
                            const GroupStyle& style, Rng& rng) {
  std::vector<HistoryStep> steps;
  for (HistoryStep s : cond.history) {
    if (s != kPadStep) steps.push_back(s);
  }
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    std::vector<DaTag> segs = steps[i].tags();
    std::string op = render_operator_text(rules.lexicon, style, segs, rng, nullptr);
    TagSet next = i + 1 < steps.size() ? steps[i + 1] : cond.gold;
    std::string cu = render_customer_reply(rules.lexicon, style, next, rng, nullptr);
    out += "Operator: [" + steps[i].to_string() + "] " + op + "\n";
    out += "Customer: " + cu + "\n";
  }
  return out;
}

}  // namespace

std::string default_mock_style_text() {
  return "User style:\n"
         "- Often answers with ambiguous intentions instead of a clear request.\n"
         "- Uses short, casual replies and leaves details to the operator.\n"
         "- Reacts to pictures and suggestions rather than naming preferences.\n"
         "Operator style:\n"
         "- Confirms the customer's wishes before searching.\n"
         "- Asks follow-up questions to narrow down vague requests.\n"
         "- Uses friendly openers and simple wording.\n";
}

MockCompletionProvider::MockCompletionProvider(MockBehavior behavior)
    : behavior_(std::move(behavior)) {}

ProviderResponse MockCompletionProvider::complete(const Prompt& prompt, int attempt) {
  calls_.fetch_add(1);
  ProviderResponse out;
  out.meta = {{"model", "mock"}};
  if (behavior_.malformed && behavior_.malformed(prompt, attempt)) {
    out.text = "I am sorry, I cannot write that conversation right now.";
    return out;
  }
  const std::string& text = prompt.user_text;
  if (text.find(kStylePromptMarker) != std::string::npos) {
    out.text = behavior_.style_response.value_or(default_mock_style_text());
    return out;
  }
  if (text.find(kDialoguePromptMarker) != std::string::npos) {
    auto cond = parse_condition(text);
    if (!cond) throw ProviderError("mock backend: dialogue prompt without a condition", false);
    std::string section = to_lower(style_section(text));
    bool styled = !behavior_.dialogue.style_keyword.empty() &&
                  section.find(to_lower(behavior_.dialogue.style_keyword)) != std::string::npos;
    Rng rng(fnv1a64(cache_key(prompt, attempt)));
    const auto& rules = behavior_.dialogue;
    GroupStyle style = styled ? rules.styled
                       : rules.imitate_exemplars ? imitated_style(rules, text)
                                                 : rules.plain;
    out.text = render_dialogue(rules, *cond, style, rng);
    return out;
  }
  throw ProviderError("mock backend: unrecognized prompt class", false);
}

}  // namespace daaug
