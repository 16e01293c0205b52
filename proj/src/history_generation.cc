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

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <thread>

#include "daaug/history_generator.h"

namespace daaug {

using nlohmann::json;

HistoryGenExample example_from_instance(const Dialogue& dialogue,
                                        const PredictionInstance& instance) {
  const auto idx = static_cast<std::size_t>(instance.meta.turn_index);
  if (idx >= dialogue.turns.size() || dialogue.id != instance.meta.dialogue_id) {
    throw std::invalid_argument("instance does not belong to dialogue " + dialogue.id);
  }
  HistoryGenExample ex;
  ex.condition.gold = instance.gold;
  ex.condition.utterance = dialogue.turns[idx].text;
  ex.condition.source_id = dialogue.id + "#" + std::to_string(idx);
  ex.target = instance.da_history;
  return ex;
}

std::vector<HistoryGenExample> examples_from_dialogues(const Corpus& corpus,
                                                       const std::vector<std::string>& ids,
                                                       int n) {
  std::vector<HistoryGenExample> out;
  for (const auto& id : ids) {
    const Dialogue* d = corpus.find(id);
    if (d == nullptr) throw std::invalid_argument("unknown dialogue id '" + id + "'");
    for (const auto& inst : build_dialogue_instances(*d, n)) {
      out.push_back(example_from_instance(*d, inst));
    }
  }
  return out;
}

HistoryData build_history_training_data(const Corpus& corpus, const HistoryDataConfig& config) {
  if (config.train_dialogues < 0 || config.gen_dialogues < 0) {
    throw std::invalid_argument("dialogue counts must be non-negative");
  }
  std::set<std::string> targets(config.target_dialogue_ids.begin(),
                                config.target_dialogue_ids.end());
  std::vector<std::string> pool;
  for (const auto& d : corpus.dialogues) {
    if (d.group != Group::kMinor && !targets.count(d.id)) pool.push_back(d.id);
  }
  for (const auto& id : targets) {
    if (corpus.find(id) == nullptr) throw std::invalid_argument("unknown target dialogue '" + id + "'");
  }
  const auto need = static_cast<std::size_t>(config.train_dialogues + config.gen_dialogues);
  if (pool.size() < need) {
    throw std::invalid_argument("need " + std::to_string(need) +
                                " non-target dialogues for history data, corpus has " +
                                std::to_string(pool.size()));
  }
  std::sort(pool.begin(), pool.end());
  Rng rng(config.seed);
  rng.shuffle(pool);

  HistoryData out;
  out.train_dialogue_ids.assign(pool.begin(), pool.begin() + config.train_dialogues);
  out.gen_dialogue_ids.assign(pool.begin() + config.train_dialogues, pool.begin() + need);
  for (const auto& id : config.target_dialogue_ids) {
    out.train_dialogue_ids.push_back(id);
    out.gen_dialogue_ids.push_back(id);
  }
  Rng order(mix64(config.seed) + 1);
  order.shuffle(out.gen_dialogue_ids);

  out.train = examples_from_dialogues(corpus, out.train_dialogue_ids, config.n);
  out.target_train = examples_from_dialogues(corpus, config.target_dialogue_ids, config.n);
  for (auto& ex : examples_from_dialogues(corpus, out.gen_dialogue_ids, config.n)) {
    out.gen_conditions.push_back(std::move(ex.condition));
  }
  return out;
}

std::vector<HistoryPair> sample_candidates(const HistorySequenceModel& model,
                                           const std::vector<HistoryCondition>& conditions,
                                           const SamplingParams& params, int workers) {
  params.validate();
  std::vector<std::vector<DaHistory>> per(conditions.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= conditions.size()) return;
      try {
        per[i] = model.sample(conditions[i], params, i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  std::size_t w = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, conditions.size()));
  if (w == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < w; ++k) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<HistoryPair> out;
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    for (auto& h : per[i]) {
      out.push_back({conditions[i].gold, std::move(h), false, conditions[i].source_id});
    }
  }
  return out;
}

std::vector<HistoryPair> dedup_novel(const std::vector<HistoryPair>& candidates, SeenSet& seen) {
  std::vector<HistoryPair> out;
  for (const auto& c : candidates) {
    if (seen.insert(c.key()).second) {
      out.push_back(c);
      out.back().novel = true;
    }
  }
  return out;
}

SeenSet seen_from_instances(std::span<const PredictionInstance> instances) {
  SeenSet seen;
  for (const auto& inst : instances) seen.insert(key_of(inst));
  return seen;
}

std::size_t novelty_overlap(const std::vector<HistoryPair>& novel_pairs,
                            std::span<const PredictionInstance> reference) {
  SeenSet ref = seen_from_instances(reference);
  SeenSet counted;
  std::size_t hits = 0;
  for (const auto& p : novel_pairs) {
    HistoryKey k = p.key();
    if (ref.count(k) && counted.insert(k).second) ++hits;
  }
  return hits;
}

json pair_to_json(const HistoryPair& pair) {
  return {{"a_t", tags_to_json(pair.gold)},
          {"history", history_to_json(pair.history)},
          {"novel", pair.novel},
          {"source", pair.source_id}};
}

HistoryPair pair_from_json(const json& j) {
  HistoryPair p;
  p.gold = tags_from_json(j.at("a_t"));
  p.history = history_from_json(j.at("history"));
  p.novel = j.value("novel", false);
  p.source_id = j.value("source", "");
  return p;
}

std::string pairs_to_string(const std::vector<HistoryPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += pair_to_json(p).dump();
    out += '\n';
  }
  return out;
}

std::vector<HistoryPair> load_pairs(const std::string& path) {
  std::vector<HistoryPair> out;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(read_file(path))) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(pair_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace daaug
