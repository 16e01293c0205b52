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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "daaug/dialogue_generator.h"
#include "daaug/evaluation.h"
#include "daaug/history_generator.h"
#include "daaug/instances.h"
#include "daaug/llm_gateway.h"
#include "daaug/metrics.h"
#include "daaug/mock_backend.h"
#include "daaug/pipeline.h"
#include "daaug/predictor.h"
#include "daaug/splits.h"
#include "daaug/synth.h"
#include "daaug/util.h"
#include "fixtures.h"
#include "json.hpp"

namespace {

using namespace daaug;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int p = 4) { return format_fixed(v, p); }

// Metric oracle over every (prediction, gold) pair of subsets of a 10-tag
// universe: 1024 x 1024 = 1,048,576 pairs. An empty gold set has no defined
// score, so there the contract is that both metrics refuse the input.
Verdict ac1() {
  auto t0 = Clock::now();
  const auto& ops = operator_tags();
  std::vector<TagSet> subsets(1024);
  for (unsigned m = 0; m < 1024; ++m) {
    for (int i = 0; i < 10; ++i) {
      if (m & (1u << i)) subsets[m].insert(ops[i]);
    }
  }
  std::size_t pairs = 0, disagreements = 0;
  for (unsigned p = 0; p < 1024; ++p) {
    for (unsigned g = 0; g < 1024; ++g) {
      ++pairs;
      if (g == 0) {
        bool threw_e = false, threw_p = false;
        try { (void)exact_match(subsets[p], subsets[g]); } catch (const std::invalid_argument&) { threw_e = true; }
        try { (void)partial_match(subsets[p], subsets[g]); } catch (const std::invalid_argument&) { threw_p = true; }
        disagreements += !(threw_e && threw_p);
        continue;
      }
      std::set<int> sp, sg;
      for (int i = 0; i < 10; ++i) {
        if (p & (1u << i)) sp.insert(i);
        if (g & (1u << i)) sg.insert(i);
      }
      bool eq = sp == sg;
      bool inter = false;
      for (int x : sp) inter = inter || sg.count(x);
      disagreements += exact_match(subsets[p], subsets[g]) != eq;
      disagreements += partial_match(subsets[p], subsets[g]) != inter;
    }
  }
  double secs = seconds_since(t0);
  return {pairs == 1048576 && disagreements == 0 && secs < 10.0,
          std::to_string(pairs) + " pairs, " + std::to_string(disagreements) + " disagreements, " +
              fmt(secs, 2) + " s"};
}

std::size_t recount(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::size_t total = 0;
  for (const auto& id : ids) {
    const Dialogue* d = corpus.find(id);
    bool seen_operator = false;
    for (const auto& t : d->turns) {
      if (t.role != Role::kOperator) continue;
      if (seen_operator) {
        bool informative = false;
        for (const auto& s : t.segments) informative = informative || (s.tag && *s.tag != DaTag::kNone);
        total += informative;
      }
      seen_operator = true;
    }
  }
  return total;
}

Verdict ac2() {
  Corpus corpus = generate_synthetic_corpus(make_travel_agency_spec(SynthPreset{}));
  SplitConfig cfg = make_split_config(corpus, 0, 3, 10, 3, 1);
  const std::vector<std::pair<SplitName, std::size_t>> want = {
      {SplitName::kMinorsOnly, 18}, {SplitName::kZeroShot, 210},
      {SplitName::kLowResource, 228}, {SplitName::kFullResource, 270}};
  bool ok = corpus.dialogues.size() == 330;
  std::string detail = std::to_string(corpus.dialogues.size()) + " dialogues;";
  for (const auto& [name, count] : want) {
    DatasetSplit s = build_split(corpus, name, cfg);
    std::size_t instances = s.train.size() + s.valid.size();
    std::vector<std::string> ids = s.train_dialogue_ids;
    ids.insert(ids.end(), s.valid_dialogue_ids.begin(), s.valid_dialogue_ids.end());
    std::size_t brute = recount(corpus, ids);
    bool test_ok = s.test.size() == recount(corpus, s.test_dialogue_ids);
    ok = ok && s.dialogue_count() == count && instances == brute && test_ok;
    detail += " " + std::string(split_name(name)) + " " + std::to_string(s.dialogue_count()) + "/" +
              std::to_string(instances) + (instances == brute && test_ok ? "" : " (recount mismatch)");
  }
  return {ok, detail};
}

std::vector<HistoryPair> distinct_pairs(std::size_t count, std::uint64_t seed) {
  std::vector<HistoryPair> out;
  std::set<std::string> ids;
  Rng rng(seed);
  while (out.size() < count) {
    HistoryPair p;
    for (int i = 0; i < 3; ++i) p.history.push_back(TagSet{operator_tags()[rng.index(kNumOperatorTags)]});
    p.gold = TagSet{operator_tags()[rng.index(kNumOperatorTags)]};
    p.novel = true;
    p.source_id = "acc#" + std::to_string(out.size());
    if (ids.insert(history_pair_id(p)).second) out.push_back(p);
  }
  return out;
}

// Table 1, split 1: Full-Resource 26,375 vs Low-Resource 22,980 instances.
Verdict ac3() {
  const std::size_t full = 26375, low = 22980;
  MockBehavior b;
  b.malformed = [](const Prompt& p, int attempt) {
    return mix64(fnv1a64(p.user_text) + static_cast<std::uint64_t>(attempt)) % 4 == 0;
  };
  GatewayOptions o;
  o.mode = LlmMode::kRecord;
  o.parallelism = 8;
  LlmGateway gw(o, std::make_shared<MockCompletionProvider>(b), std::make_shared<CompletionCache>());
  AugmentPolicy policy;
  policy.max_retries = 1;
  auto r = augment_until(full, low, testing::exemplar_profile(), distinct_pairs(5000, 3),
                         testing::exemplar_bank(), gw, policy);
  bool ok = r.instances.size() == full - low && r.tally.accepted == full - low &&
            r.tally.rejected > 0 && r.tally.pairs_skipped > 0;
  return {ok, std::to_string(r.instances.size()) + " instances (want " + std::to_string(full - low) +
                  "), " + std::to_string(r.tally.rejected) + " rejections, " +
                  std::to_string(r.tally.pairs_skipped) + " pairs skipped"};
}

std::string key_string(const HistoryPair& p) {
  std::string s = p.gold.to_string() + "|";
  for (const auto& step : p.history) s += step_to_string(step) + ";";
  return s;
}

Verdict ac4() {
  Rng rng(4);
  std::size_t violations = 0, emitted = 0;
  for (int batch = 0; batch < 10000; ++batch) {
    // A small alphabet forces frequent repeats and seen-set hits.
    const int alphabet = 2 + static_cast<int>(rng.index(5));
    auto random_pair = [&] {
      HistoryPair p;
      for (int i = 0; i < 3; ++i) {
        bool pad = i == 0 && rng.bernoulli(0.2);
        p.history.push_back(pad ? kPadStep : TagSet{operator_tags()[rng.index(alphabet)]});
      }
      p.gold = TagSet{operator_tags()[rng.index(alphabet)]};
      return p;
    };
    SeenSet seen;
    std::set<std::string> seen_brute;
    for (std::size_t i = rng.index(20); i > 0; --i) {
      auto p = random_pair();
      seen.insert(p.key());
      seen_brute.insert(key_string(p));
    }
    std::vector<HistoryPair> cand;
    for (std::size_t i = 1 + rng.index(60); i > 0; --i) cand.push_back(random_pair());
    auto out = dedup_novel(cand, seen);
    emitted += out.size();

    std::set<std::string> expect;
    std::vector<std::string> expect_order;
    for (const auto& c : cand) {
      std::string k = key_string(c);
      if (!seen_brute.count(k) && expect.insert(k).second) expect_order.push_back(k);
    }
    std::set<std::string> got;
    std::vector<std::string> got_order;
    for (const auto& p : out) {
      std::string k = key_string(p);
      if (!got.insert(k).second) ++violations;      // duplicate in output
      if (seen_brute.count(k)) ++violations;        // overlaps the seen set
      got_order.push_back(k);
    }
    if (got_order != expect_order) ++violations;     // lost or extra novel pairs
  }
  return {violations == 0, "10000 batches, " + std::to_string(emitted) + " pairs emitted, " +
                               std::to_string(violations) + " violations"};
}

struct SeedResult {
  double ll1 = 0, ll2 = 0;
  std::size_t overlap1 = 0, overlap2 = 0;
};

// Phase-1 vs phase-2 history models on one synthetic corpus. The held-out
// target set is every minor outside the Low-Resource minors.
SeedResult history_experiment(std::uint64_t seed, double tv, bool novelty) {
  SynthPreset preset;
  preset.seed = seed;
  preset.minor_perturbation_tv = tv;
  preset.minor_style = tv > 0;
  Corpus c = generate_synthetic_corpus(make_travel_agency_spec(preset));
  SplitConfig sc = make_split_config(c, 0, 3, 10, 3, seed);
  std::set<std::string> lr(sc.low_resource_minor_ids.begin(), sc.low_resource_minor_ids.end());
  std::vector<std::string> lr_ids, held;
  for (const auto& d : c.dialogues) {
    if (lr.count(d.customer_id)) lr_ids.push_back(d.id);
    else if (d.group == Group::kMinor) held.push_back(d.id);
  }
  HistoryDataConfig hc;
  hc.target_dialogue_ids = lr_ids;
  hc.seed = seed;
  HistoryData hd = build_history_training_data(c, hc);
  auto held_examples = examples_from_dialogues(c, held, 3);

  HistorySequenceModel model(3);
  model.train_phase1(hd.train, {});
  SeedResult r;
  r.ll1 = model.mean_log_likelihood(held_examples);
  HistorySequenceModel phase1 = model;
  model.train_phase2(hd.target_train, {5e-5, 10.0});
  r.ll2 = model.mean_log_likelihood(held_examples);
  if (!novelty) return r;

  DatasetSplit split = build_split(c, SplitName::kLowResource, sc);
  std::vector<PredictionInstance> reference;
  for (const auto& id : held) {
    auto v = build_dialogue_instances(*c.find(id), 3);
    reference.insert(reference.end(), v.begin(), v.end());
  }
  SamplingParams sp;
  sp.seed = seed;
  SeenSet s1 = seen_from_instances(split.train);
  SeenSet s2 = s1;
  auto n1 = dedup_novel(sample_candidates(phase1, hd.gen_conditions, sp), s1);
  auto n2 = dedup_novel(sample_candidates(model, hd.gen_conditions, sp), s2);
  r.overlap1 = novelty_overlap(n1, reference);
  r.overlap2 = novelty_overlap(n2, reference);
  return r;
}

std::vector<SeedResult> planted_results;

Verdict ac5() {
  auto t0 = Clock::now();
  int improved = 0;
  std::string gains;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    planted_results.push_back(history_experiment(seed, 0.2, true));
    const auto& r = planted_results.back();
    improved += r.ll2 > r.ll1;
    gains += (gains.empty() ? "" : " ") + fmt(r.ll2 - r.ll1, 3);
  }
  std::vector<double> base, delta;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto r = history_experiment(seed, 0.0, false);
    base.push_back(r.ll1);
    delta.push_back(r.ll2 - r.ll1);
  }
  auto [base_mean, sigma] = mean_and_sample_std(base);
  (void)base_mean;
  double null_delta = mean_and_sample_std(delta).first;
  bool null_ok = std::abs(null_delta) < 3 * sigma;
  double secs = seconds_since(t0);
  bool ok = improved >= 4 && null_ok && secs < 120.0;
  return {ok, "planted gains [" + gains + "] improved " + std::to_string(improved) +
                  "/5; null mean change " + fmt(null_delta) + " vs 3 sigma " + fmt(3 * sigma) + "; " +
                  fmt(secs, 1) + " s"};
}

Verdict ac6() {
  int wins = 0;
  std::string counts;
  for (const auto& r : planted_results) {
    wins += r.overlap2 >= r.overlap1;
    counts += (counts.empty() ? "" : " ") + std::to_string(r.overlap1) + "->" + std::to_string(r.overlap2);
  }
  return {planted_results.size() == 5 && wins >= 4,
          "phase1->phase2 overlap [" + counts + "], phase 2 >= phase 1 in " + std::to_string(wins) + "/5"};
}

const fs::path kWork = DAAUG_ACCEPTANCE_WORKDIR;

PipelineConfig config_for(const fs::path& out, const std::string& mode, const fs::path& cache) {
  std::vector<std::string> overrides = {"output_dir=" + out.string(), "llm.mode=" + mode,
                                        "workers=4"};
  if (!cache.empty()) overrides.push_back("llm.cache=" + cache.string());
  return load_pipeline_config(DAAUG_ACCEPTANCE_CONFIG, overrides);
}

bool pipeline_recorded = false;
std::vector<EvalReport> e2e_reports;

Verdict ac7() {
  auto t0 = Clock::now();
  fs::remove_all(kWork / "record");
  Pipeline(config_for(kWork / "record", "record", {})).run({});
  pipeline_recorded = true;
  double secs = seconds_since(t0);
  auto load = [](const fs::path& f) { return EvalReport::from_json(nlohmann::json::parse(read_file(f))); };
  EvalReport abl = load(kWork / "record" / "ablate" / "report.json");
  EvalReport eval = load(kWork / "record" / "eval" / "report.json");
  e2e_reports = {abl, eval};
  auto mean = [&](std::string_view v) {
    const auto* a = abl.find(v);
    return a ? a->mean_exact : std::nan("");
  };
  const double lr = mean(kAblationLowResource);
  const double ours = mean(kAblationOurs);
  const double no_hist = mean(kAblationNoHistoryGen);
  const double no_style = mean(kAblationNoStyle);
  bool ok = ours >= lr && no_hist >= lr && no_style >= lr && secs < 600.0;
  std::string detail = "exact over " + std::to_string(abl.splits.size()) + " splits x 5 seeds: LowResource " +
                       fmt(lr) + ", Ours " + fmt(ours) + ", w/o DA History Gen " + fmt(no_hist) +
                       ", w/o Speaker Style " + fmt(no_style);
  const auto* lr1 = eval.find("LowResource");
  const auto* aug1 = eval.find("LowResourceAug");
  if (lr1 && aug1) detail += "; primary split LowResource " + fmt(lr1->mean_exact) + " vs LowResourceAug " + fmt(aug1->mean_exact);
  return {ok, detail + "; " + fmt(secs, 1) + " s"};
}

std::vector<fs::path> compared_files(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(root / "dialogues")) {
    if (e.path().filename().string().rfind("aug_", 0) == 0) out.push_back(fs::relative(e.path(), root));
  }
  for (const char* f : {"report.txt", "eval/report.json", "eval/per_seed.tsv", "eval/table.txt",
                        "ablate/report.json", "ablate/per_seed.tsv", "ablate/table.txt"}) {
    out.emplace_back(f);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Verdict ac8() {
  if (!pipeline_recorded) return {false, "no recorded run to replay"};
  const fs::path cache = kWork / "record" / "llm_cache.jsonl";
  for (const char* run : {"replay_a", "replay_b"}) {
    fs::remove_all(kWork / run);
    Pipeline(config_for(kWork / run, "replay", cache)).run({});
  }
  auto files = compared_files(kWork / "replay_a");
  std::size_t differing = 0;
  std::string first_diff;
  for (const auto& f : files) {
    std::string a = read_file(kWork / "replay_a" / f);
    bool same = fs::is_regular_file(kWork / "replay_b" / f) && a == read_file(kWork / "replay_b" / f) &&
                a == read_file(kWork / "record" / f);
    if (!same && differing++ == 0) first_diff = f.string();
  }
  return {differing == 0 && files.size() > 7,
          std::to_string(files.size()) + " files compared across record and two replays, " +
              std::to_string(differing) + " differ" + (first_diff.empty() ? "" : " (first: " + first_diff + ")")};
}

Verdict ac9() {
  Rng rng(9);
  std::size_t bad = 0;
  std::array<double, kNumOperatorTags> s{};
  for (int i = 0; i < 100000; ++i) {
    const int shape = i % 3;
    for (auto& v : s) {
      v = shape == 0 ? rng.uniform() : shape == 1 ? rng.uniform() * 0.3 : (rng.bernoulli(0.5) ? 1.0 : 0.0);
    }
    double tau = 0.05 + 0.9 * rng.uniform();
    TagSet p = decode_scores(s, tau);
    bad += p.empty() || p.contains(DaTag::kNone);
  }
  // Exact <= partial on random fixtures and on every row of the end-to-end run.
  std::size_t fixtures = 0, order_violations = 0;
  for (int f = 0; f < 200; ++f) {
    std::vector<PredictionInstance> v(50);
    for (auto& inst : v) {
      inst.gold = TagSet{operator_tags()[rng.index(6)]};
      if (rng.bernoulli(0.3)) inst.gold.insert(operator_tags()[rng.index(6)]);
    }
    auto sc = evaluate(
        [&](const PredictionInstance&) {
          std::array<double, kNumOperatorTags> x{};
          for (int j = 0; j < 6; ++j) x[j] = rng.uniform();
          return decode_scores(x, 0.5);
        },
        v);
    ++fixtures;
    order_violations += sc.exact > sc.partial;
  }
  for (const auto& r : e2e_reports) {
    for (const auto& row : r.rows) {
      ++fixtures;
      order_violations += row.scores.exact > row.scores.partial;
    }
  }
  return {bad == 0 && order_violations == 0 && !e2e_reports.empty(),
          "100000 score vectors, " + std::to_string(bad) + " empty/None predictions; " +
              std::to_string(fixtures) + " evaluated fixtures, " + std::to_string(order_violations) +
              " with exact > partial"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << name << (v.pass ? " PASS " : " FAIL ") << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
