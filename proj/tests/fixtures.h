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

// Small hand-built inputs for the generation tests.

#ifndef DAAUG_TESTS_FIXTURES_H_
#define DAAUG_TESTS_FIXTURES_H_

#include "daaug/dialogue_generator.h"
#include "daaug/style_extractor.h"
#include "test_util.h"

namespace daaug::testing {

inline Corpus exemplar_corpus() {
  Corpus c;
  c.dialogues.push_back(make_dialogue("m1-d1", "m1", Group::kMinor,
                                      {"DirectionQuestion", "RequestQuestion", "RequestConfirm",
                                       "SearchConditionInform", "SearchResultInform,PhotoInform"}));
  c.dialogues.push_back(make_dialogue("m2-d1", "m2", Group::kMinor,
                                      {"None", "SeasonQuestion", "PeopleQuestion", "AgeQuestion",
                                       "SearchAdvice", "OnScreenSuggest"}));
  c.dialogues.push_back(make_dialogue("m3-d1", "m3", Group::kMinor,
                                      {"RequestQuestion", "DestinationConfirm", "AccessInform",
                                       "PriceInform", "ParkInform", "NameInform"}));
  return c;
}

inline FewShotBank exemplar_bank() {
  Corpus c = exemplar_corpus();
  return build_few_shot_bank(c, {"m1-d1", "m2-d1", "m3-d1"}, 3, 1);
}

inline SpeakerStyleProfile exemplar_profile() {
  SpeakerStyleProfile p;
  p.user_style = {"Often answers with ambiguous intentions.", "Keeps replies short."};
  p.operator_style = {"Confirms requests before searching."};
  p.strategy = "union";
  p.cache_keys = {"fixture"};
  return p;
}

inline HistoryPair search_pair() {
  HistoryPair pair;
  pair.history = {tags("RequestQuestion"), tags("RequestConfirm"), tags("SearchConditionInform")};
  pair.gold = tags("SearchInform");
  pair.novel = true;
  pair.source_id = "fixture#1";
  return pair;
}

}  // namespace daaug::testing

#endif  // DAAUG_TESTS_FIXTURES_H_
