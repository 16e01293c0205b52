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

// Offline stand-in for a completion service. It recognizes the two prompt
// classes this project sends and answers them deterministically from the
// prompt, its parameters and the attempt index.

#ifndef DAAUG_MOCK_BACKEND_H_
#define DAAUG_MOCK_BACKEND_H_

#include <atomic>
#include <functional>
#include <optional>
#include <string>

#include "daaug/llm_gateway.h"
#include "daaug/synth.h"

namespace daaug {

struct DialogueRenderRules {
  DialogueLexicon lexicon = travel_agency_lexicon();
  // Used when the prompt's speaker-style section mentions style_keyword.
  GroupStyle styled = minor_group_style();
  GroupStyle plain = default_group_style();
  std::string style_keyword = "ambiguous";
  // Without the style cue, copy the exemplars' rate of ambiguous customer
  // replies (a weak in-context imitation) instead of replying plainly.
  bool imitate_exemplars = true;
};

struct MockBehavior {
  // Answer to style-extraction prompts; default_mock_style_text() if unset.
  std::optional<std::string> style_response;
  DialogueRenderRules dialogue;
  // Scripted failures: when this returns true the reply is unusable prose.
  std::function<bool(const Prompt&, int attempt)> malformed;
};

std::string default_mock_style_text();

class MockCompletionProvider : public CompletionProvider {
 public:
  explicit MockCompletionProvider(MockBehavior behavior = {});

  // Throws ProviderError (not retryable) for prompts of an unknown class.
  ProviderResponse complete(const Prompt& prompt, int attempt) override;

  long calls() const { return calls_.load(); }

 private:
  MockBehavior behavior_;
  std::atomic<long> calls_{0};
};

}  // namespace daaug

#endif  // DAAUG_MOCK_BACKEND_H_
