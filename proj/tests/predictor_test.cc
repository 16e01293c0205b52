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

#include "daaug/predictor.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "daaug/util.h"
#include "test_util.h"

namespace daaug {
namespace {

using testing::tags;

std::array<double, kNumOperatorTags> zeros() { return {}; }

TEST(DecodeTest, ThresholdRuleAndFallback) {
  auto s = zeros();
  s[tag_index(DaTag::kPriceInform)] = 0.9;
  s[tag_index(DaTag::kParkInform)] = 0.8;
  s[tag_index(DaTag::kNameInform)] = 0.1;
  EXPECT_EQ(decode_scores(s, 0.5), tags("PriceInform,ParkInform"));
  auto low = zeros();
  low[tag_index(DaTag::kNameInform)] = 0.3;
  low[tag_index(DaTag::kParkInform)] = 0.2;
  EXPECT_EQ(decode_scores(low, 0.5), tags("NameInform"));
  std::vector<double> wrong(5, 0.0);
  EXPECT_THROW(decode_scores(wrong, 0.5), std::invalid_argument);
}

TEST(DecodeTest, NeverEmptyNeverNone) {
  Rng rng(1);
  for (int i = 0; i < 20000; ++i) {
    auto s = zeros();
    for (auto& v : s) v = rng.uniform();
    double tau = 0.01 + 0.98 * rng.uniform();
    TagSet out = decode_scores(s, tau);
    ASSERT_FALSE(out.empty());
    ASSERT_FALSE(out.contains(DaTag::kNone));
  }
}

TEST(DecodeTest, PermutationEquivariance) {
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    auto s = zeros();
    for (auto& v : s) v = rng.uniform();
    std::vector<int> perm(kNumOperatorTags);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    auto permuted = zeros();
    for (int j = 0; j < kNumOperatorTags; ++j) permuted[perm[j]] = s[j];
    TagSet a = decode_scores(s, 0.5);
    TagSet expected;
    for (DaTag t : a.tags()) expected.insert(tag_at(perm[tag_index(t)]));
    EXPECT_EQ(decode_scores(permuted, 0.5), expected);
  }
}

TEST(DecodeTest, RaisingAScoreNeverRemovesThatTag) {
  Rng rng(3);
  for (int trial = 0; trial < 5000; ++trial) {
    auto s = zeros();
    for (auto& v : s) v = rng.uniform();
    double tau = 0.2 + 0.6 * rng.uniform();
    int j = static_cast<int>(rng.index(kNumOperatorTags));
    TagSet before = decode_scores(s, tau);
    s[j] += rng.uniform();
    if (before.contains(tag_at(j))) {
      EXPECT_TRUE(decode_scores(s, tau).contains(tag_at(j)));
    }
  }
}

PredictionInstance make_instance(DaHistory history, TagSet gold, std::vector<TurnPair> turns,
                                 std::string id = "d") {
  PredictionInstance inst;
  inst.da_history = std::move(history);
  inst.gold = gold;
  inst.dialogue_history = std::move(turns);
  inst.meta.dialogue_id = std::move(id);
  return inst;
}

TEST(LinearizeTest, PadBlocksFirst) {
  auto inst = make_instance({kPadStep, kPadStep, tags("RequestQuestion")}, tags("RequestConfirm"),
                            {{"Where to?", "Not sure."}});
  std::string text = linearize_instance(inst);
  EXPECT_EQ(text, "[PAD] [PAD] [OP] Where to? [DA] RequestQuestion [CU] Not sure.");
  EXPECT_EQ(kLinearizationVersion, "lin-v1");
}

// Test-only inverse: splits the text back into blocks of (tags, op, cu).
struct Block {
  bool pad = false;
  std::string op, da, cu;
};
std::vector<Block> parse_back(const std::string& text) {
  std::vector<Block> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text.compare(pos, 5, "[PAD]") == 0) {
      out.push_back({true, "", "", ""});
      pos += 6;
      continue;
    }
    EXPECT_EQ(text.compare(pos, 5, "[OP] "), 0);
    auto da = text.find(" [DA] ", pos);
    auto cu = text.find(" [CU] ", da);
    auto next = text.find(" [OP] ", cu);
    Block b;
    b.op = text.substr(pos + 5, da - pos - 5);
    b.da = text.substr(da + 6, cu - da - 6);
    b.cu = text.substr(cu + 6, next == std::string::npos ? std::string::npos : next - cu - 6);
    out.push_back(b);
    pos = next == std::string::npos ? text.size() : next + 1;
  }
  return out;
}

TEST(LinearizeTest, SearchExampleHistoryRoundTripsStructurally) {
  auto inst = make_instance({tags("RequestQuestion"), tags("RequestConfirm"), tags("SearchConditionInform")},
                            tags("SearchInform"),
                            {{"Where would you like to go?", "Somewhere fun."},
                             {"Somewhere fun, then?", "Yes."},
                             {"Let me set the conditions.", "Okay."}});
  std::string text = linearize_instance(inst);
  auto a = text.find("[DA] RequestQuestion");
  auto b = text.find("[DA] RequestConfirm");
  auto c = text.find("[DA] SearchConditionInform");
  EXPECT_TRUE(a < b && b < c);
  auto blocks = parse_back(text);
  ASSERT_EQ(blocks.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_FALSE(blocks[i].pad);
    EXPECT_EQ(blocks[i].da, inst.da_history[i].to_string());
    EXPECT_EQ(blocks[i].op, inst.dialogue_history[i].operator_text);
    EXPECT_EQ(blocks[i].cu, inst.dialogue_history[i].customer_text);
  }
  auto padded = make_instance({kPadStep, tags("None"), tags("PriceInform,ParkInform")}, tags("AccessInform"),
                              {{"a", "b"}, {"c", "d"}});
  auto pb = parse_back(linearize_instance(padded));
  ASSERT_EQ(pb.size(), 3u);
  EXPECT_TRUE(pb[0].pad);
  EXPECT_EQ(pb[1].da, "None");
  EXPECT_EQ(pb[2].da, "ParkInform,PriceInform");
}

const std::vector<std::string> kWords = {"trip", "hotel", "beach", "museum", "train", "lunch",
                                         "photo", "price", "hmm", "okay", "maybe", "sure"};

std::string random_text(Rng& rng, int words) {
  std::string out;
  for (int i = 0; i < words; ++i) out += (i ? " " : "") + rng.pick(kWords);
  return out;
}

// Gold is AccessInform whenever the newest history step is ParkInform;
// otherwise one of a few unrelated tags.
std::vector<PredictionInstance> planted(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<DaTag> other_hist = {DaTag::kSearchInform, DaTag::kRequestQuestion,
                                         DaTag::kPriceInform, DaTag::kNone};
  const std::vector<DaTag> other_gold = {DaTag::kRequestConfirm, DaTag::kSearchAdvice,
                                         DaTag::kPhotoInform};
  std::vector<PredictionInstance> out;
  for (std::size_t i = 0; i < count; ++i) {
    bool rule = rng.bernoulli(0.4);
    DaHistory h;
    std::vector<TurnPair> turns;
    for (int k = 0; k < 3; ++k) {
      DaTag t = (k == 2 && rule) ? DaTag::kParkInform : rng.pick(other_hist);
      h.push_back(TagSet{t});
      turns.push_back({random_text(rng, 4), random_text(rng, 3)});
    }
    TagSet gold = rule ? TagSet{DaTag::kAccessInform} : TagSet{rng.pick(other_gold)};
    out.push_back(make_instance(h, gold, turns, "p" + std::to_string(seed) + "-" + std::to_string(i)));
  }
  return out;
}

double exact_rate(const PredictorModel& m, const std::vector<PredictionInstance>& v) {
  std::size_t hits = 0;
  for (const auto& i : v) hits += m.predict(i) == i.gold;
  return static_cast<double>(hits) / v.size();
}

TEST(TrainTest, LearnsPlantedRule) {
  auto train = planted(600, 1);
  auto valid = planted(100, 2);
  auto test = planted(200, 3);
  auto m = train_predictor(train, valid, Hyperparams{}, 1);
  std::size_t rule_cases = 0;
  for (const auto& inst : test) {
    if (inst.da_history.back() != TagSet{DaTag::kParkInform}) continue;
    ++rule_cases;
    EXPECT_EQ(m.predict(inst), TagSet{DaTag::kAccessInform});
  }
  EXPECT_GT(rule_cases, 40u);
}

TEST(TrainTest, DeterministicGivenSeed) {
  auto train = planted(200, 4);
  auto valid = planted(50, 5);
  auto a = train_predictor(train, valid, Hyperparams{}, 7);
  auto b = train_predictor(train, valid, Hyperparams{}, 7);
  EXPECT_EQ(a.serialize(), b.serialize());
  EXPECT_EQ(a.meta().best_valid_exact, b.meta().best_valid_exact);
  EXPECT_EQ(exact_rate(a, valid), a.meta().best_valid_exact);
}

TEST(TrainTest, SingleInstanceIsMemorized) {
  auto one = planted(1, 6);
  one[0].gold = tags("PriceInform,ParkInform");
  auto m = train_predictor(one, one, Hyperparams{}, 1);
  EXPECT_EQ(m.predict(one[0]), one[0].gold);
}

TEST(TrainTest, InputErrors) {
  auto data = planted(10, 7);
  EXPECT_THROW(train_predictor({}, data, Hyperparams{}, 1), PredictorError);
  EXPECT_THROW(train_predictor(data, {}, Hyperparams{}, 1), PredictorError);
  EXPECT_THROW(train_predictor(data, data, Hyperparams{}, 1, {data[3].meta.dialogue_id}), PredictorError);
  auto with_none = data;
  with_none[0].gold.insert(DaTag::kNone);
  EXPECT_THROW(train_predictor(with_none, data, Hyperparams{}, 1), PredictorError);
  Hyperparams bad;
  bad.threshold = 1.0;
  EXPECT_THROW(train_predictor(data, data, bad, 1), std::invalid_argument);
}

TEST(TrainTest, EarlyStoppingKeepsBestEpoch) {
  auto train = planted(300, 8);
  auto valid = planted(60, 9);
  Hyperparams h;
  h.epochs = 8;
  h.patience = 2;
  auto m = train_predictor(train, valid, h, 3);
  const auto& per = m.meta().valid_exact_per_epoch;
  ASSERT_EQ(per.size(), static_cast<std::size_t>(m.meta().epochs_run));
  double best = *std::max_element(per.begin(), per.end());
  EXPECT_EQ(m.meta().best_valid_exact, best);
  EXPECT_EQ(per[m.meta().best_epoch - 1], best);
  EXPECT_LE(m.meta().epochs_run - m.meta().best_epoch, h.patience);
}

TEST(SerializeTest, RoundTripAndVersionCheck) {
  auto train = planted(100, 10);
  auto m = train_predictor(train, train, Hyperparams{}, 1, {}, "LowResource");
  std::string blob = m.serialize();
  auto back = PredictorModel::deserialize(blob);
  EXPECT_EQ(back.serialize(), blob);
  EXPECT_EQ(back.meta().setting, "LowResource");
  EXPECT_EQ(back.hyper(), m.hyper());
  for (const auto& inst : train) EXPECT_EQ(back.scores(inst), m.scores(inst));

  std::string other = blob;
  auto at = other.find("lin-v1");
  ASSERT_NE(at, std::string::npos);
  other.replace(at, 6, "lin-v9");
  EXPECT_THROW(PredictorModel::deserialize(other), PredictorError);
  EXPECT_THROW(PredictorModel::deserialize(blob.substr(0, blob.size() - 3)), PredictorError);
  EXPECT_THROW(PredictorModel::deserialize(blob + "x"), PredictorError);
  EXPECT_THROW(PredictorModel::deserialize("nonsense"), PredictorError);
}

TEST(GridTest, SingletonGridReturnsIt) {
  auto data = planted(60, 11);
  Hyperparams h;
  h.batch_size = 8;
  h.threshold = 0.3;
  auto r = grid_search(data, data, {h}, {1});
  EXPECT_EQ(r.best, h);
  EXPECT_EQ(r.rows.size(), 1u);
}

TEST(GridTest, SabotagedConfigLoses) {
  auto train = planted(200, 12);
  auto valid = planted(60, 13);
  Hyperparams dead;
  dead.learning_rate = 0.0;
  Hyperparams alive;
  auto r = grid_search(train, valid, {dead, alive}, {1, 2});
  EXPECT_EQ(r.best, alive);
}

TEST(GridTest, WinnerMatchesIndependentReevaluation) {
  auto train = planted(200, 14);
  auto valid = planted(80, 15);
  HyperGrid g;
  g.batch_sizes = {8, 32};
  g.learning_rates = {0.5, 4.0};
  g.thresholds = {0.3, 0.6};
  g.epochs = 4;
  auto configs = g.expand();
  ASSERT_EQ(configs.size(), 8u);
  std::vector<std::uint64_t> seeds = {1, 2};
  auto r = grid_search(train, valid, configs, seeds);
  ASSERT_EQ(r.rows.size(), 16u);

  std::size_t best = 0;
  std::vector<double> means;
  for (const auto& h : configs) {
    double sum = 0;
    for (auto s : seeds) sum += exact_rate(train_predictor(train, valid, h, s), valid);
    means.push_back(sum / seeds.size());
    if (means.back() > means[best]) best = means.size() - 1;
  }
  EXPECT_EQ(r.best, configs[best]);
  EXPECT_DOUBLE_EQ(r.best_mean_exact, means[best]);
  std::string tsv = r.to_tsv();
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 17);
}

TEST(GridTest, JsonRoundTrip) {
  HyperGrid g;
  g.thresholds = {0.45};
  auto back = HyperGrid::from_json(g.to_json());
  EXPECT_EQ(back.expand(), g.expand());
  Hyperparams h;
  h.learning_rate = 8.0;
  EXPECT_EQ(Hyperparams::from_json(h.to_json()), h);
}

}  // namespace
}  // namespace daaug
