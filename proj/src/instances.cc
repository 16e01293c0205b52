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

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "daaug/util.h"

namespace daaug {

using nlohmann::json;

std::size_t HistoryKeyHash::operator()(const HistoryKey& k) const noexcept {
  std::uint64_t h = mix64(k.gold.bits());
  for (HistoryStep s : k.history) h = mix64(h ^ s.bits());
  return static_cast<std::size_t>(h);
}

std::optional<std::string> check_instance(const PredictionInstance& inst, int n) {
  if (static_cast<int>(inst.da_history.size()) != n) return "da_history length != n";
  if (inst.dialogue_history.size() > inst.da_history.size()) {
    return "dialogue_history longer than da_history";
  }
  if (inst.gold.empty()) return "gold is empty";
  if (inst.gold.contains(DaTag::kNone)) return "gold contains None";
  int pads = inst.pad_count();
  for (int i = 0; i < n; ++i) {
    bool pad = inst.da_history[i].empty();
    if (pad != (i < pads)) return "PAD steps must form the oldest prefix";
  }
  return std::nullopt;
}

std::vector<PredictionInstance> build_dialogue_instances(const Dialogue& dialogue,
                                                         int n) {
  if (n < 1) throw std::invalid_argument("history length n must be >= 1");
  // Pair every operator turn with the customer turn that follows it.
  struct OpTurn {
    int turn_index;
    TagSet tags;
    std::optional<TurnPair> pair;
  };
  std::vector<OpTurn> ops;
  const auto& turns = dialogue.turns;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (turns[i].role != Role::kOperator) continue;
    OpTurn op{static_cast<int>(i), turns[i].tag_set(), std::nullopt};
    if (i + 1 < turns.size() && turns[i + 1].role == Role::kCustomer) {
      op.pair = TurnPair{turns[i].text, turns[i + 1].text};
    }
    ops.push_back(std::move(op));
  }

  std::vector<PredictionInstance> out;
  for (std::size_t t = 1; t < ops.size(); ++t) {
    TagSet gold = ops[t].tags.without_none();
    if (gold.empty()) continue;
    PredictionInstance inst;
    inst.gold = gold;
    inst.meta = {dialogue.id, ops[t].turn_index, dialogue.group};
    std::size_t first = t >= static_cast<std::size_t>(n) ? t - n : 0;
    for (std::size_t j = first; j < t; ++j) {
      // Alternating roles guarantee every earlier operator turn is paired.
      inst.dialogue_history.push_back(*ops[j].pair);
    }
    inst.da_history.assign(n - (t - first), kPadStep);
    for (std::size_t j = first; j < t; ++j) inst.da_history.push_back(ops[j].tags);
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<PredictionInstance> build_instances(const Corpus& corpus, int n) {
  std::vector<PredictionInstance> out;
  for (const auto& d : corpus.dialogues) {
    auto part = build_dialogue_instances(d, n);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return out;
}

json history_to_json(const DaHistory& history) {
  json arr = json::array();
  for (HistoryStep step : history) {
    if (step.empty()) {
      arr.push_back(std::string(kPadToken));
      continue;
    }
    json tags = json::array();
    for (DaTag t : step.tags()) tags.push_back(std::string(tag_name(t)));
    arr.push_back(std::move(tags));
  }
  return arr;
}

TagSet tags_from_json(const json& j) {
  if (!j.is_array()) throw std::runtime_error("tag list must be an array");
  TagSet s;
  for (const auto& name : j) {
    auto tag = parse_tag(name.get<std::string>());
    if (!tag) throw std::runtime_error("unknown DA tag '" + name.get<std::string>() + "'");
    s.insert(*tag);
  }
  return s;
}

json tags_to_json(TagSet s) {
  json arr = json::array();
  for (DaTag t : s.tags()) arr.push_back(std::string(tag_name(t)));
  return arr;
}

DaHistory history_from_json(const json& j) {
  if (!j.is_array()) throw std::runtime_error("da_history must be an array");
  DaHistory h;
  for (const auto& step : j) {
    if (step.is_string() && step.get<std::string>() == kPadToken) {
      h.push_back(kPadStep);
    } else {
      TagSet s = tags_from_json(step);
      if (s.empty()) throw std::runtime_error("history step has no tags");
      h.push_back(s);
    }
  }
  return h;
}

json instance_to_json(const PredictionInstance& inst) {
  json dh = json::array();
  for (const auto& p : inst.dialogue_history) {
    dh.push_back({{"operator", p.operator_text}, {"customer", p.customer_text}});
  }
  return {{"dialogue_history", std::move(dh)},
          {"da_history", history_to_json(inst.da_history)},
          {"gold", tags_to_json(inst.gold)},
          {"meta",
           {{"dialogue_id", inst.meta.dialogue_id},
            {"turn_index", inst.meta.turn_index},
            {"group", std::string(group_name(inst.meta.group))}}}};
}

PredictionInstance instance_from_json(const json& j) {
  PredictionInstance inst;
  for (const auto& p : j.at("dialogue_history")) {
    inst.dialogue_history.push_back(
        {p.at("operator").get<std::string>(), p.at("customer").get<std::string>()});
  }
  inst.da_history = history_from_json(j.at("da_history"));
  inst.gold = tags_from_json(j.at("gold"));
  const json& meta = j.at("meta");
  inst.meta.dialogue_id = meta.at("dialogue_id").get<std::string>();
  inst.meta.turn_index = meta.at("turn_index").get<int>();
  auto group = parse_group(meta.at("group").get<std::string>());
  if (!group) throw std::runtime_error("unknown group in instance meta");
  inst.meta.group = *group;
  return inst;
}

void write_instances(std::ostream& out,
                     const std::vector<PredictionInstance>& instances) {
  for (const auto& inst : instances) out << instance_to_json(inst).dump() << '\n';
}

std::string instances_to_string(const std::vector<PredictionInstance>& instances) {
  std::ostringstream out;
  write_instances(out, instances);
  return out.str();
}

std::vector<PredictionInstance> read_instances(std::istream& in) {
  std::vector<PredictionInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(instance_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("instance line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<PredictionInstance> load_instances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_instances(in);
}

}  // namespace daaug
