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

#include "daaug/splits.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "daaug/synth.h"

namespace daaug {
namespace {

const Corpus& corpus() {
  static const Corpus c = generate_synthetic_corpus(make_travel_agency_spec(SynthPreset{}));
  return c;
}

// Qualifying operator turns per dialogue, counted without the library.
std::map<std::string, std::size_t> recount() {
  std::map<std::string, std::size_t> out;
  for (const auto& d : corpus().dialogues) {
    std::size_t count = 0;
    bool seen = false;
    for (const auto& t : d.turns) {
      if (t.role != Role::kOperator) continue;
      bool real = std::any_of(t.segments.begin(), t.segments.end(),
                              [](const auto& s) { return s.tag && *s.tag != DaTag::kNone; });
      if (seen && real) ++count;
      seen = true;
    }
    out[d.id] = count;
  }
  return out;
}

std::size_t sum_over(const std::vector<std::string>& ids) {
  static const auto counts = recount();
  std::size_t total = 0;
  for (const auto& id : ids) total += counts.at(id);
  return total;
}

TEST(SplitsTest, DialogueCountsMatchPublishedTotals) {
  auto config = make_split_config(corpus(), 0);
  EXPECT_EQ(build_split(corpus(), SplitName::kMinorsOnly, config).dialogue_count(), 18u);
  EXPECT_EQ(build_split(corpus(), SplitName::kZeroShot, config).dialogue_count(), 210u);
  EXPECT_EQ(build_split(corpus(), SplitName::kLowResource, config).dialogue_count(), 228u);
  EXPECT_EQ(build_split(corpus(), SplitName::kFullResource, config).dialogue_count(), 270u);
  auto mo = build_split(corpus(), SplitName::kMinorsOnly, config);
  EXPECT_EQ(mo.valid_dialogue_ids.size(), 3u);
  auto zs = build_split(corpus(), SplitName::kZeroShot, config);
  EXPECT_EQ(zs.valid_dialogue_ids.size(), 21u);
  EXPECT_EQ(zs.test_dialogue_ids.size(), 60u);
}

TEST(SplitsTest, InstanceCountsMatchIndependentRecount) {
  for (int index = 0; index < 4; ++index) {
    auto config = make_split_config(corpus(), index);
    for (auto name : {SplitName::kMinorsOnly, SplitName::kZeroShot, SplitName::kLowResource,
                      SplitName::kFullResource}) {
      auto s = build_split(corpus(), name, config);
      EXPECT_EQ(s.train.size(), sum_over(s.train_dialogue_ids)) << split_name(name);
      EXPECT_EQ(s.valid.size(), sum_over(s.valid_dialogue_ids)) << split_name(name);
      EXPECT_EQ(s.test.size(), sum_over(s.test_dialogue_ids)) << split_name(name);
    }
  }
}

// Low-Resource data = Zero-Shot data + Minors-Only data, which is the
// identity behind 21,011 + 1,662 + 307 = 22,980.
TEST(SplitsTest, LowResourceDecomposes) {
  EXPECT_EQ(21011 + 1662 + 307, 22980);
  auto config = make_split_config(corpus(), 1);
  auto mo = build_split(corpus(), SplitName::kMinorsOnly, config);
  auto zs = build_split(corpus(), SplitName::kZeroShot, config);
  auto lr = build_split(corpus(), SplitName::kLowResource, config);
  EXPECT_EQ(lr.train.size(), zs.train.size() + mo.train.size() + mo.valid.size());
  EXPECT_EQ(lr.valid.size(), zs.valid.size());
}

std::multiset<std::string> keys(const std::vector<PredictionInstance>& v) {
  std::multiset<std::string> out;
  for (const auto& i : v) out.insert(instance_to_json(i).dump());
  return out;
}

TEST(SplitsTest, LowResourceTrainIsSubMultisetOfFullResource) {
  for (int index = 0; index < 4; ++index) {
    auto config = make_split_config(corpus(), index);
    auto lr = keys(build_split(corpus(), SplitName::kLowResource, config).train);
    auto fr = keys(build_split(corpus(), SplitName::kFullResource, config).train);
    EXPECT_TRUE(std::includes(fr.begin(), fr.end(), lr.begin(), lr.end()));
    EXPECT_LT(lr.size(), fr.size());
  }
}

TEST(SplitsTest, ZeroShotIdenticalAcrossConfigs) {
  auto first = build_split(corpus(), SplitName::kZeroShot, make_split_config(corpus(), 0));
  for (int index = 1; index < 4; ++index) {
    auto config = make_split_config(corpus(), index, 3, 10, 3, 99 + index);
    auto other = build_split(corpus(), SplitName::kZeroShot, config);
    EXPECT_EQ(other.train, first.train);
    EXPECT_EQ(other.valid, first.valid);
  }
  auto again = build_split(corpus(), SplitName::kZeroShot, make_split_config(corpus(), 0));
  EXPECT_EQ(again.train, first.train);
}

TEST(SplitsTest, TestDialoguesNeverLeakIntoTraining) {
  for (int index = 0; index < 4; ++index) {
    auto config = make_split_config(corpus(), index);
    for (auto name : {SplitName::kMinorsOnly, SplitName::kZeroShot, SplitName::kLowResource,
                      SplitName::kFullResource, SplitName::kLowResourceAug}) {
      auto s = build_split(corpus(), name, config);
      std::set<std::string> test(s.test_dialogue_ids.begin(), s.test_dialogue_ids.end());
      std::set<std::string> train(s.train_dialogue_ids.begin(), s.train_dialogue_ids.end());
      for (const auto& id : s.train_dialogue_ids) EXPECT_FALSE(test.count(id));
      for (const auto& id : s.valid_dialogue_ids) {
        EXPECT_FALSE(test.count(id));
        EXPECT_FALSE(train.count(id));
      }
      for (const auto& inst : s.train) EXPECT_FALSE(test.count(inst.meta.dialogue_id));
      for (const auto& inst : s.test) EXPECT_EQ(inst.meta.group, Group::kMinor);
    }
  }
}

TEST(SplitsTest, PropertiesAcrossHistoryLengths) {
  for (int n : {1, 2, 4}) {
    auto config = make_split_config(corpus(), 2, 3, 10, n);
    auto s = build_split(corpus(), SplitName::kFullResource, config);
    for (const auto& inst : s.train) ASSERT_FALSE(check_instance(inst, n));
  }
}

TEST(SplitsTest, InconsistentConfigsRejected) {
  auto config = make_split_config(corpus(), 0);
  auto bad = config;
  bad.low_resource_minor_ids.push_back("adult-01");
  EXPECT_THROW(build_split(corpus(), SplitName::kLowResource, bad), SplitError);
  bad = config;
  bad.full_resource_minor_ids.erase(bad.full_resource_minor_ids.begin());
  EXPECT_THROW(build_split(corpus(), SplitName::kLowResource, bad), SplitError);
  bad = config;
  bad.test_minor_ids = {config.full_resource_minor_ids.back()};
  EXPECT_THROW(build_split(corpus(), SplitName::kLowResource, bad), SplitError);
  bad = config;
  bad.low_resource_minor_ids = {"nobody"};
  EXPECT_THROW(build_split(corpus(), SplitName::kMinorsOnly, bad), SplitError);
  EXPECT_THROW(make_split_config(corpus(), 0, 3, 20), SplitError);
  EXPECT_FALSE(parse_split_name("Bogus"));
  EXPECT_EQ(parse_split_name("LowResourceAug"), SplitName::kLowResourceAug);
}

TEST(SplitsTest, ReportRows) {
  EXPECT_TRUE(split_report({}).empty());
  EXPECT_EQ(render_split_report({}), "");
  auto config = make_split_config(corpus(), 0);
  std::vector<DatasetSplit> splits;
  for (auto name : {SplitName::kMinorsOnly, SplitName::kZeroShot, SplitName::kLowResource,
                    SplitName::kFullResource}) {
    splits.push_back(build_split(corpus(), name, config));
  }
  auto rows = split_report(splits);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[2].split, "LowResource");
  EXPECT_EQ(rows[2].dialogues, 228u);
  EXPECT_EQ(rows[3].train, splits[3].train.size());
  std::string table = render_split_report(rows);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
}

}  // namespace
}  // namespace daaug
