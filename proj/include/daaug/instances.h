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

#ifndef DAAUG_INSTANCES_H_
#define DAAUG_INSTANCES_H_

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "daaug/corpus.h"
#include "daaug/tags.h"
#include "json.hpp"

namespace daaug {

inline constexpr int kDefaultHistoryLength = 3;

struct TurnPair {
  std::string operator_text;
  std::string customer_text;

  friend bool operator==(const TurnPair&, const TurnPair&) = default;
};

struct InstanceMeta {
  std::string dialogue_id;
  // Index into Dialogue::turns of the operator turn being predicted.
  int turn_index = 0;
  Group group = Group::kAdult;

  friend bool operator==(const InstanceMeta&, const InstanceMeta&) = default;
};

// One DA-prediction example: the previous (up to n) operator/customer
// turn-pairs and the operator's DA history predict the current turn's tags.
//
// da_history always has exactly n steps; when fewer than n turn-pairs
// precede the target, the missing oldest steps are PAD. The real steps are
// right-aligned with dialogue_history.
struct PredictionInstance {
  std::vector<TurnPair> dialogue_history;
  DaHistory da_history;
  TagSet gold;
  InstanceMeta meta;

  int pad_count() const {
    return static_cast<int>(da_history.size() - dialogue_history.size());
  }

  friend bool operator==(const PredictionInstance&,
                         const PredictionInstance&) = default;
};

// (a_t, H_a) pair identity, used for novelty bookkeeping.
struct HistoryKey {
  TagSet gold;
  DaHistory history;

  friend bool operator==(const HistoryKey&, const HistoryKey&) = default;
  friend auto operator<=>(const HistoryKey&, const HistoryKey&) = default;
};

struct HistoryKeyHash {
  std::size_t operator()(const HistoryKey& k) const noexcept;
};

inline HistoryKey key_of(const PredictionInstance& inst) {
  return {inst.gold, inst.da_history};
}

// Returns the broken invariant, if any.
std::optional<std::string> check_instance(const PredictionInstance& inst, int n);

// One instance per operator turn (from the second one on) whose tags,
// with None removed, are non-empty. A turn-pair is an operator turn and the
// customer turn right after it; unpaired turns never enter a history.
std::vector<PredictionInstance> build_dialogue_instances(const Dialogue& dialogue,
                                                         int n);
std::vector<PredictionInstance> build_instances(const Corpus& corpus, int n);

nlohmann::json tags_to_json(TagSet tags);
TagSet tags_from_json(const nlohmann::json& j);

nlohmann::json history_to_json(const DaHistory& history);
DaHistory history_from_json(const nlohmann::json& j);

nlohmann::json instance_to_json(const PredictionInstance& inst);
PredictionInstance instance_from_json(const nlohmann::json& j);

// Line-delimited instance files.
void write_instances(std::ostream& out,
                     const std::vector<PredictionInstance>& instances);
std::string instances_to_string(const std::vector<PredictionInstance>& instances);
std::vector<PredictionInstance> read_instances(std::istream& in);
std::vector<PredictionInstance> load_instances(const std::string& path);

}  // namespace daaug

#endif  // DAAUG_INSTANCES_H_
