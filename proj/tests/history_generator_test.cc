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

#include "daaug/history_generator.h"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "daaug/splits.h"
#include "daaug/synth.h"
#include "test_util.h"

namespace daaug {
namespace {

using testing::make_dialogue;
using testing::tags;

const Corpus& corpus() {
  static const Corpus c = generate_synthetic_corpus(make_travel_agency_spec(SynthPreset{}));
  return c;
}

std::vector<std::string> minor_dialogues(const Corpus& c, const std::vector<std::string>& customers) {
  std::set<std::string> want(customers.begin(), customers.end());
  std::vector<std::string> out;
  for (const auto& d : c.dialogues) {
    if (want.count(d.customer_id)) out.push_back(d.id);
  }
  return out;
}

TEST(HistoryDataTest, PartitionWithTargetsOnBothSides) {
  auto sc = make_split_config(corpus(), 0);
  HistoryDataConfig cfg;
  cfg.target_dialogue_ids = minor_dialogues(corpus(), sc.low_resource_minor_ids);
  ASSERT_EQ(cfg.target_dialogue_ids.size(), 18u);
  auto data = build_history_training_data(corpus(), cfg);
  EXPECT_EQ(data.train_dialogue_ids.size(), 138u);
  EXPECT_EQ(data.gen_dialogue_ids.size(), 108u);
  std::set<std::string> train(data.train_dialogue_ids.begin(), data.train_dialogue_ids.end());
  std::set<std::string> gen(data.gen_dialogue_ids.begin(), data.gen_dialogue_ids.end());
  std::size_t shared = 0;
  for (const auto& id : gen) shared += train.count(id);
  EXPECT_EQ(shared, 18u);
  for (const auto& ex : data.target_train) {
    EXPECT_EQ(corpus().find(ex.condition.source_id.substr(0, ex.condition.source_id.find('#')))->group,
              Group::kMinor);
  }
}

TEST(HistoryDataTest, NoTargetsMeansAdultSeniorOnly) {
  HistoryDataConfig cfg;
  auto data = build_history_training_data(corpus(), cfg);
  EXPECT_EQ(data.train_dialogue_ids.size(), 120u);
  EXPECT_EQ(data.gen_dialogue_ids.size(), 90u);
  EXPECT_TRUE(data.target_train.empty());
  cfg.train_dialogues = 200;
  EXPECT_THROW(build_history_training_data(corpus(), cfg), std::invalid_argument);
}

TEST(HistoryDataTest, ExampleCountsMatchHandCount) {
  Corpus c;
  c.dialogues.push_back(make_dialogue("a1", "a", Group::kAdult, {"SearchInform", "None", "PriceInform", "ParkInform"}));
  c.dialogues.push_back(make_dialogue("a2", "a", Group::kAdult, {"None", "None"}));
  c.dialogues.push_back(make_dialogue("s1", "s", Group::kSenior, {"AccessInform", "NameInform"}));
  c.dialogues.push_back(make_dialogue("m1", "m", Group::kMinor, {"RequestQuestion", "RequestConfirm", "None,SearchInform"}));
  HistoryDataConfig cfg;
  cfg.train_dialogues = 2;
  cfg.gen_dialogues = 1;
  cfg.target_dialogue_ids = {"m1"};
  auto data = build_history_training_data(c, cfg);
  // Qualifying turns: a1 -> 2, a2 -> 0, s1 -> 1, m1 -> 2.
  std::map<std::string, std::size_t> per{{"a1", 2}, {"a2", 0}, {"s1", 1}, {"m1", 2}};
  std::size_t train = 0, gen = 0;
  for (const auto& id : data.train_dialogue_ids) train += per[id];
  for (const auto& id : data.gen_dialogue_ids) gen += per[id];
  EXPECT_EQ(data.train.size(), train);
  EXPECT_EQ(data.gen_conditions.size(), gen);
  EXPECT_EQ(data.target_train.size(), 2u);
  for (const auto& ex : data.train) {
    EXPECT_EQ(ex.target.size(), 3u);
    EXPECT_FALSE(ex.condition.gold.empty());
    EXPECT_FALSE(ex.condition.gold.contains(DaTag::kNone));
  }
}

HistoryGenExample example(const std::string& gold, DaHistory target, std::string utt = "we can search") {
  return {{tags(gold), std::move(utt), "x#1"}, std::move(target)};
}

TEST(HistoryModelTest, MemorizesSingleRepeatedExample) {
  auto ex = example("SearchInform", {kPadStep, tags("RequestQuestion"), tags("RequestConfirm,SearchConditionInform")});
  std::vector<HistoryGenExample> data(20, ex);
  HistorySequenceModel m(3);
  m.train_phase1(data, {});
  EXPECT_EQ(m.greedy(ex.condition), ex.target);
  EXPECT_TRUE(std::isfinite(m.log_likelihood(ex)));
}

TEST(HistoryModelTest, PhaseTransitionsAreEnforced) {
  auto ex = example("SearchInform", {kPadStep, tags("RequestQuestion"), tags("None")});
  std::vector<HistoryGenExample> data{ex};
  HistorySequenceModel m(3);
  EXPECT_EQ(m.phase(), ModelPhase::kUntrained);
  EXPECT_THROW(m.sample(ex.condition, {}, 0), HistoryModelError);
  EXPECT_THROW(m.train_phase2(data, {}), HistoryModelError);
  EXPECT_THROW(m.train_phase1({}, {}), HistoryModelError);
  m.train_phase1(data, {});
  EXPECT_EQ(m.phase(), ModelPhase::kPhase1);
  EXPECT_THROW(m.train_phase1(data, {}), HistoryModelError);
  EXPECT_THROW(m.train_phase2({}, {}), HistoryModelError);
  m.train_phase2(data, {5e-5, 10.0, 1.0});
  EXPECT_EQ(m.phase(), ModelPhase::kPhase2);
  EXPECT_THROW(m.train_phase2(data, {5e-5, 10.0, 1.0}), HistoryModelError);
}

struct Fixture {
  HistoryData data;
  std::vector<HistoryGenExample> held;
};

Fixture fixture_for(const Corpus& c, std::uint64_t seed) {
  auto sc = make_split_config(c, 0, 3, 10, 3, seed);
  HistoryDataConfig cfg;
  cfg.target_dialogue_ids = minor_dialogues(c, sc.low_resource_minor_ids);
  cfg.seed = seed;
  Fixture f;
  f.data = build_history_training_data(c, cfg);
  std::set<std::string> lr(sc.low_resource_minor_ids.begin(), sc.low_resource_minor_ids.end());
  std::vector<std::string> held;
  for (const auto& d : c.dialogues) {
    if (d.group == Group::kMinor && !lr.count(d.customer_id)) held.push_back(d.id);
  }
  f.held = examples_from_dialogues(c, held, 3);
  return f;
}

TEST(HistoryModelTest, BeatsUniformBaselineAndIsDeterministic) {
  auto f = fixture_for(corpus(), 1);
  HistorySequenceModel m(3);
  m.train_phase1(f.data.train, {});
  HistorySequenceModel again(3);
  again.train_phase1(f.data.train, {});
  EXPECT_EQ(m.digest(), again.digest());
  for (const auto& ex : f.data.train) ASSERT_TRUE(std::isfinite(m.log_likelihood(ex)));
  const double v = static_cast<double>(m.vocabulary().size());
  const double uniform = 3 * std::log(1.0 / v);
  EXPECT_GT(m.mean_log_likelihood(f.held), uniform);
}

TEST(HistoryModelTest, PhaseTwoImprovesPlantedTargetLikelihood) {
  auto f = fixture_for(corpus(), 1);
  HistorySequenceModel m(3);
  m.train_phase1(f.data.train, {1e-4, 10.0, 1.0});
  double before = m.mean_log_likelihood(f.held);
  m.train_phase2(f.data.target_train, {5e-5, 10.0, 1.0});
  EXPECT_GT(m.mean_log_likelihood(f.held), before);
}

TEST(HistoryModelTest, SerializationRoundTrip) {
  auto f = fixture_for(corpus(), 2);
  HistorySequenceModel m(3);
  m.train_phase1(f.data.train, {});
  m.train_phase2(f.data.target_train, {5e-5, 10.0, 1.0});
  auto back = HistorySequenceModel::deserialize(m.serialize());
  EXPECT_EQ(back.digest(), m.digest());
  EXPECT_EQ(back.phase(), ModelPhase::kPhase2);
  EXPECT_DOUBLE_EQ(back.mean_log_likelihood(f.held), m.mean_log_likelihood(f.held));
  SamplingParams p;
  EXPECT_EQ(back.sample(f.held[0].condition, p, 7), m.sample(f.held[0].condition, p, 7));
  EXPECT_THROW(HistorySequenceModel::deserialize("garbage"), std::exception);
}

TEST(SamplingTest, DefaultsAndShape) {
  SamplingParams p;
  EXPECT_EQ(p.k_samples, 3);
  EXPECT_EQ(p.top_k, 50);
  EXPECT_DOUBLE_EQ(p.top_p, 0.9);
  EXPECT_DOUBLE_EQ(p.temperature, 0.9);
  auto f = fixture_for(corpus(), 1);
  HistorySequenceModel m(3);
  m.train_phase1(f.data.train, {});
  auto vocab = m.vocabulary();
  std::set<std::uint32_t> vocab_bits;
  for (auto s : vocab) vocab_bits.insert(s.bits());
  for (std::size_t i = 0; i < 50; ++i) {
    auto samples = m.sample(f.data.gen_conditions[i], p, i);
    ASSERT_EQ(samples.size(), 3u);
    for (const auto& h : samples) {
      ASSERT_EQ(h.size(), 3u);
      bool seen_real = false;
      for (auto step : h) {
        EXPECT_TRUE(vocab_bits.count(step.bits()));
        if (step == kPadStep) EXPECT_FALSE(seen_real) << "PAD after a real step";
        else seen_real = true;
      }
    }
  }
}

TEST(SamplingTest, GreedyAndTopKOneCollapse) {
  auto f = fixture_for(corpus(), 1);
  HistorySequenceModel m(3);
  m.train_phase1(f.data.train, {});
  for (std::size_t i = 0; i < 20; ++i) {
    const auto& cond = f.data.gen_conditions[i];
    SamplingParams cold;
    cold.temperature = 0.0;
    cold.k_samples = 4;
    for (const auto& h : m.sample(cond, cold, i)) EXPECT_EQ(h, m.greedy(cond));
    SamplingParams one;
    one.top_k = 1;
    auto hot = one;
    hot.temperature = 5.0;
    auto a = m.sample(cond, one, i);
    auto b = m.sample(cond, hot, i + 100);
    for (const auto& h : a) EXPECT_EQ(h, a[0]);
    EXPECT_EQ(a[0], b[0]);
  }
}

TEST(SamplingTest, ReproducibleAndWorkerInvariant) {
  auto f = fixture_for(corpus(), 3);
  HistorySequenceModel m(3);
  m.train_phase1(f.data.train, {});
  SamplingParams p;
  p.seed = 9;
  std::vector<HistoryCondition> conds(f.data.gen_conditions.begin(), f.data.gen_conditions.begin() + 200);
  auto one = sample_candidates(m, conds, p, 1);
  auto four = sample_candidates(m, conds, p, 4);
  EXPECT_EQ(pairs_to_string(one), pairs_to_string(four));
  EXPECT_EQ(one.size(), 600u);
  p.seed = 10;
  EXPECT_NE(pairs_to_string(sample_candidates(m, conds, p, 1)), pairs_to_string(one));
  SamplingParams bad;
  bad.k_samples = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = {};
  bad.top_p = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

HistoryPair pair(const std::string& gold, DaHistory h) { return {tags(gold), std::move(h), false, "s"}; }

TEST(DedupTest, ExamplesFromTheContract) {
  auto x = pair("SearchInform", {kPadStep, tags("None"), tags("RequestQuestion")});
  auto y = pair("PriceInform", {kPadStep, tags("None"), tags("RequestQuestion")});
  SeenSet seen;
  auto out = dedup_novel({x, x, y}, seen);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].key(), x.key());
  EXPECT_EQ(out[1].key(), y.key());
  EXPECT_TRUE(out[0].novel && out[1].novel);
  EXPECT_TRUE(dedup_novel({x, y, x}, seen).empty());
}

TEST(DedupTest, RandomFixtureMatchesSetArithmetic) {
  Rng rng(5);
  auto random_step = [&]() -> HistoryStep {
    return rng.bernoulli(0.1) ? kPadStep : TagSet{tag_at(static_cast<int>(rng.index(6)))};
  };
  std::vector<HistoryPair> candidates;
  for (int c = 0; c < 9999; ++c) {
    TagSet gold{operator_tags()[rng.index(4)]};
    for (int k = 0; k < 3; ++k) {
      candidates.push_back({gold, {random_step(), random_step(), random_step()}, false, "c"});
    }
  }
  std::vector<PredictionInstance> existing;
  for (int i = 0; i < 500; ++i) {
    PredictionInstance inst;
    inst.gold = TagSet{operator_tags()[rng.index(4)]};
    inst.da_history = {random_step(), random_step(), random_step()};
    existing.push_back(inst);
  }
  // Brute force over canonical string keys.
  std::set<std::string> seen_keys, novel_keys;
  auto key = [](TagSet g, const DaHistory& h) { return g.to_string() + "|" + history_to_string(h, "/"); };
  for (const auto& e : existing) seen_keys.insert(key(e.gold, e.da_history));
  std::vector<std::string> expected;
  for (const auto& c : candidates) {
    auto k = key(c.gold, c.history);
    if (!seen_keys.count(k) && novel_keys.insert(k).second) expected.push_back(k);
  }
  SeenSet seen = seen_from_instances(existing);
  auto novel = dedup_novel(candidates, seen);
  ASSERT_EQ(novel.size(), expected.size());
  for (std::size_t i = 0; i < novel.size(); ++i) EXPECT_EQ(key(novel[i].gold, novel[i].history), expected[i]);
  EXPECT_EQ(seen.size(), seen_keys.size() + expected.size());
}

TEST(OverlapTest, ContractExamples) {
  PredictionInstance a;
  a.gold = tags("SearchInform");
  a.da_history = {kPadStep, tags("RequestQuestion"), tags("None")};
  PredictionInstance b = a;
  b.gold = tags("PriceInform");
  std::vector<PredictionInstance> ref{a, a, b};
  auto disjoint = pair("ParkInform", {tags("AccessInform"), tags("AccessInform"), tags("AccessInform")});
  EXPECT_EQ(novelty_overlap({disjoint}, ref), 0u);
  SeenSet empty;
  auto self = dedup_novel({{a.gold, a.da_history, false, ""}, {a.gold, a.da_history, false, ""},
                           {b.gold, b.da_history, false, ""}},
                          empty);
  EXPECT_EQ(novelty_overlap(self, ref), 2u);
  // Planted: 3 of 5 pairs appear in the reference.
  std::vector<HistoryPair> planted{{a.gold, a.da_history, true, ""}, disjoint,
                                   {b.gold, b.da_history, true, ""},
                                   pair("NameInform", a.da_history),
                                   {a.gold, {kPadStep, kPadStep, tags("RequestQuestion")}, true, ""}};
  ref.push_back(PredictionInstance{{}, {kPadStep, kPadStep, tags("RequestQuestion")}, a.gold, {}});
  EXPECT_EQ(novelty_overlap(planted, ref), 3u);
}

TEST(PairsFileTest, RoundTrip) {
  testing::TempDir dir;
  std::vector<HistoryPair> pairs{pair("SearchInform", {kPadStep, tags("None"), tags("AccessInform")})};
  pairs[0].novel = true;
  auto path = dir.path() / "p.jsonl";
  write_file_atomic(path, pairs_to_string(pairs));
  auto back = load_pairs(path.string());
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].key(), pairs[0].key());
  EXPECT_TRUE(back[0].novel);
}

}  // namespace
}  // namespace daaug
