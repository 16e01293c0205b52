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

#include "daaug/instances.h"

#include <gtest/gtest.h>

#include <sstream>

#include "daaug/synth.h"
#include "daaug/util.h"
#include "test_util.h"

namespace daaug {
namespace {

using testing::make_dialogue;
using testing::tags;

TEST(InstancesTest, AllNoneDialogueYieldsNothing) {
  auto d = make_dialogue("d", "c", Group::kAdult, {"None", "None", "None", "None"});
  EXPECT_TRUE(build_dialogue_instances(d, 3).empty());
}

TEST(InstancesTest, TwoTagGoldAfterThreeStepHistory) {
  auto d = make_dialogue("d", "c", Group::kMinor,
                         {"RequestQuestion", "None", "RequestConfirm,SearchConditionInform"});
  auto out = build_dialogue_instances(d, 3);
  ASSERT_EQ(out.size(), 1u);
  const auto& inst = out[0];
  EXPECT_EQ(inst.gold.size(), 2);
  EXPECT_EQ(inst.gold, tags("RequestConfirm,SearchConditionInform"));
  ASSERT_EQ(inst.da_history.size(), 3u);
  EXPECT_EQ(inst.da_history[0], kPadStep);
  EXPECT_EQ(inst.da_history[1], tags("RequestQuestion"));
  EXPECT_EQ(inst.da_history[2], tags("None"));  // None stays in histories
  ASSERT_EQ(inst.dialogue_history.size(), 2u);
  EXPECT_EQ(inst.dialogue_history[0].customer_text, "cu d 0");
  EXPECT_EQ(inst.pad_count(), 1);
  EXPECT_EQ(inst.meta.turn_index, 4);
  EXPECT_EQ(inst.meta.dialogue_id, "d");
  EXPECT_EQ(inst.meta.group, Group::kMinor);
  EXPECT_FALSE(check_instance(inst, 3));
}

TEST(InstancesTest, NoneIsStrippedFromGold) {
  auto d = make_dialogue("d", "c", Group::kAdult, {"SearchInform", "None,PriceInform"});
  auto out = build_dialogue_instances(d, 3);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].gold, tags("PriceInform"));
}

TEST(InstancesTest, WindowKeepsMostRecentN) {
  auto d = make_dialogue("d", "c", Group::kAdult,
                         {"SearchInform", "PriceInform", "ParkInform", "AccessInform", "NameInform"});
  auto out = build_dialogue_instances(d, 2);
  ASSERT_EQ(out.size(), 4u);
  const auto& last = out.back();
  EXPECT_EQ(last.da_history, (DaHistory{tags("ParkInform"), tags("AccessInform")}));
  EXPECT_EQ(last.dialogue_history.front().operator_text, "op d 2 ParkInform");
  EXPECT_EQ(last.pad_count(), 0);
}

TEST(InstancesTest, CustomerFirstDialogue) {
  auto d = make_dialogue("d", "c", Group::kAdult, {"SearchInform", "PriceInform"});
  Turn opening{Role::kCustomer, "hello", {{"hello", std::nullopt, std::nullopt}}};
  d.turns.insert(d.turns.begin(), opening);
  auto out = build_dialogue_instances(d, 3);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].meta.turn_index, 3);
}

TEST(InstancesTest, RejectsNonPositiveN) {
  auto d = make_dialogue("d", "c", Group::kAdult, {"SearchInform", "PriceInform"});
  EXPECT_THROW(build_dialogue_instances(d, 0), std::invalid_argument);
}

// Independent count: an operator turn qualifies when some earlier turn in
// the same dialogue is an operator turn and its tags minus None are non-empty.
std::size_t brute_force_count(const Corpus& corpus) {
  std::size_t count = 0;
  for (const auto& d : corpus.dialogues) {
    bool seen_operator = false;
    for (const auto& t : d.turns) {
      if (t.role != Role::kOperator) continue;
      bool has_real_tag = false;
      for (const auto& s : t.segments) {
        if (s.tag && *s.tag != DaTag::kNone) has_real_tag = true;
      }
      if (seen_operator && has_real_tag) ++count;
      seen_operator = true;
    }
  }
  return count;
}

TEST(InstancesTest, CountMatchesBruteForceOnFixture) {
  Corpus c;
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    std::vector<std::string> ops;
    int len = 1 + static_cast<int>(rng.index(8));
    for (int k = 0; k < len; ++k) {
      double u = rng.uniform();
      if (u < 0.3) ops.push_back("None");
      else if (u < 0.5) ops.push_back("None,SearchInform");
      else if (u < 0.8) ops.push_back("RequestConfirm");
      else ops.push_back("PriceInform,AccessInform");
    }
    auto d = make_dialogue("d" + std::to_string(i), "c" + std::to_string(i), Group::kAdult,
                           ops, rng.bernoulli(0.5));
    c.dialogues.push_back(d);
  }
  ASSERT_TRUE(validate_corpus(c).empty());
  EXPECT_EQ(build_instances(c, 3).size(), brute_force_count(c));
}

TEST(InstancesTest, PropertiesOnSyntheticCorpus) {
  Corpus c = generate_synthetic_corpus(make_travel_agency_spec(SynthPreset{.minors = 4, .adults = 4, .seniors = 2}));
  for (int n : {1, 3, 5}) {
    auto out = build_instances(c, n);
    EXPECT_EQ(out.size(), brute_force_count(c));
    for (const auto& inst : out) {
      ASSERT_FALSE(check_instance(inst, n)) << *check_instance(inst, n);
      EXPECT_EQ(inst.dialogue_history.size() + inst.pad_count(), static_cast<std::size_t>(n));
    }
  }
}

TEST(InstancesTest, CheckInstanceFlagsBrokenRecords) {
  PredictionInstance inst;
  inst.gold = tags("PriceInform");
  inst.da_history = {kPadStep, tags("SearchInform"), tags("None")};
  inst.dialogue_history = {{"a", "b"}, {"c", "d"}};
  EXPECT_FALSE(check_instance(inst, 3));
  EXPECT_TRUE(check_instance(inst, 2));
  auto none_gold = inst;
  none_gold.gold.insert(DaTag::kNone);
  EXPECT_TRUE(check_instance(none_gold, 3));
  auto empty_gold = inst;
  empty_gold.gold = {};
  EXPECT_TRUE(check_instance(empty_gold, 3));
  auto mid_pad = inst;
  mid_pad.da_history = {tags("SearchInform"), kPadStep, tags("None")};
  EXPECT_TRUE(check_instance(mid_pad, 3));
}

TEST(InstancesTest, JsonLinesRoundTrip) {
  Corpus c = generate_synthetic_corpus(make_travel_agency_spec(SynthPreset{.minors = 1, .adults = 1, .seniors = 1}));
  auto out = build_instances(c, 3);
  ASSERT_FALSE(out.empty());
  std::string text = instances_to_string(out);
  std::istringstream in(text);
  auto back = read_instances(in);
  EXPECT_EQ(back, out);
  auto j = instance_to_json(out[0]);
  EXPECT_EQ(j["da_history"][0], "PAD");
  EXPECT_EQ(instance_from_json(j), out[0]);
}

}  // namespace
}  // namespace daaug
