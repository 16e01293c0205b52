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

#include "daaug/corpus.h"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "daaug/util.h"
#include "json.hpp"

namespace daaug {
namespace {

using nlohmann::json;

std::string require_string(const json& obj, const char* key,
                           std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw CorpusError(line, std::string("missing field '") + key + "'");
  }
  if (!it->is_string()) {
    throw CorpusError(line, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

const json& require_array(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw CorpusError(line, std::string("missing field '") + key + "'");
  }
  if (!it->is_array()) {
    throw CorpusError(line, std::string("field '") + key + "' must be an array");
  }
  return *it;
}

Dialogue dialogue_from_json(const json& rec, std::size_t line) {
  Dialogue d;
  d.id = require_string(rec, "id", line);
  d.customer_id = require_string(rec, "customer_id", line);
  auto group = parse_group(require_string(rec, "group", line));
  if (!group) throw CorpusError(line, "unknown group '" + rec["group"].get<std::string>() + "'");
  d.group = *group;
  for (const json& jt : require_array(rec, "turns", line)) {
    if (!jt.is_object()) throw CorpusError(line, "turn must be an object");
    Turn t;
    auto role = parse_role(require_string(jt, "role", line));
    if (!role) throw CorpusError(line, "unknown role '" + jt["role"].get<std::string>() + "'");
    t.role = *role;
    t.text = require_string(jt, "text", line);
    for (const json& js : require_array(jt, "segments", line)) {
      if (!js.is_object()) throw CorpusError(line, "segment must be an object");
      FunctionalSegment seg;
      seg.text = require_string(js, "text", line);
      if (auto it = js.find("tag"); it != js.end() && !it->is_null()) {
        if (!it->is_string()) throw CorpusError(line, "field 'tag' must be a string");
        auto name = it->get<std::string>();
        if (t.role == Role::kOperator) {
          auto tag = parse_tag(name);
          if (!tag) throw CorpusError(line, "unknown DA tag '" + name + "'");
          seg.tag = *tag;
        } else {
          seg.customer_tag = name;
        }
      }
      t.segments.push_back(std::move(seg));
    }
    d.turns.push_back(std::move(t));
  }
  return d;
}

json dialogue_to_json(const Dialogue& d) {
  json turns = json::array();
  for (const Turn& t : d.turns) {
    json segs = json::array();
    for (const FunctionalSegment& s : t.segments) {
      json js = {{"text", s.text}};
      if (s.tag) js["tag"] = std::string(tag_name(*s.tag));
      else if (s.customer_tag) js["tag"] = *s.customer_tag;
      segs.push_back(std::move(js));
    }
    turns.push_back({{"role", std::string(role_name(t.role))},
                     {"text", t.text},
                     {"segments", std::move(segs)}});
  }
  return {{"id", d.id},
          {"customer_id", d.customer_id},
          {"group", std::string(group_name(d.group))},
          {"turns", std::move(turns)}};
}

std::string joined_segments(const Turn& t) {
  std::string joined;
  for (const auto& s : t.segments) {
    joined += s.text;
    joined += ' ';
  }
  return normalize_space(joined);
}

void validate_dialogue(const Dialogue& d, std::vector<Violation>& out) {
  auto add = [&](std::string rule) { out.push_back({d.id, std::move(rule)}); };
  if (d.id.empty()) add("dialogue id must be non-empty");
  if (d.customer_id.empty()) add("customer_id must be non-empty");
  if (d.turns.size() < 2) add("dialogue needs at least 2 turns");
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    const Turn& t = d.turns[i];
    std::string where = "turn " + std::to_string(i) + ": ";
    if (i > 0 && d.turns[i - 1].role == t.role) add(where + "roles must alternate");
    if (t.role == Role::kOperator && t.segments.empty()) {
      add(where + "operator turn has no segments");
    }
    bool bad_segment = false;
    for (const auto& s : t.segments) {
      if (trim(s.text).empty()) bad_segment = true;
      if (t.role == Role::kOperator && !s.tag) bad_segment = true;
      if (t.role == Role::kCustomer && s.tag) bad_segment = true;
    }
    if (bad_segment) add(where + "segment text empty or tag/role mismatch");
    if (!t.segments.empty() && joined_segments(t) != normalize_space(t.text)) {
      add(where + "segments do not reconstruct turn text");
    }
  }
}

}  // namespace

std::string_view role_name(Role role) {
  return role == Role::kOperator ? "operator" : "customer";
}

std::string_view group_name(Group group) {
  switch (group) {
    case Group::kMinor: return "minor";
    case Group::kAdult: return "adult";
    case Group::kSenior: return "senior";
  }
  return "adult";
}

std::optional<Role> parse_role(std::string_view name) {
  if (name == "operator") return Role::kOperator;
  if (name == "customer") return Role::kCustomer;
  return std::nullopt;
}

std::optional<Group> parse_group(std::string_view name) {
  if (name == "minor") return Group::kMinor;
  if (name == "adult") return Group::kAdult;
  if (name == "senior") return Group::kSenior;
  return std::nullopt;
}

TagSet Turn::tag_set() const {
  TagSet s;
  for (const auto& seg : segments) {
    if (seg.tag) s.insert(*seg.tag);
  }
  return s;
}

const Dialogue* Corpus::find(std::string_view id) const {
  for (const auto& d : dialogues) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

CorpusError::CorpusError(std::size_t line, const std::string& message)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message
                              : message),
      line_(line) {}

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::set<std::string> ids;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    json rec;
    try {
      rec = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw CorpusError(line, std::string("malformed record: ") + e.what());
    }
    if (!rec.is_object()) throw CorpusError(line, "record must be an object");
    if (!rec.contains("id") && rec.contains("provenance")) {
      if (!rec["provenance"].is_string()) {
        throw CorpusError(line, "field 'provenance' must be a string");
      }
      corpus.provenance = rec["provenance"].get<std::string>();
      continue;
    }
    Dialogue d = dialogue_from_json(rec, line);
    if (!ids.insert(d.id).second) {
      throw CorpusError(line, "duplicate dialogue id '" + d.id + "'");
    }
    std::vector<Violation> v;
    validate_dialogue(d, v);
    if (!v.empty()) throw CorpusError(line, v.front().rule);
    corpus.dialogues.push_back(std::move(d));
  }
  // Cross-record rules (customer -> group consistency).
  auto violations = validate_corpus(corpus);
  if (!violations.empty()) {
    throw CorpusError(0, "dialogue '" + violations.front().dialogue_id +
                             "': " + violations.front().rule);
  }
  return corpus;
}

Corpus parse_corpus_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in);
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError(0, "cannot open corpus file " + path);
  return parse_corpus(in);
}

void serialize_corpus(const Corpus& corpus, std::ostream& out) {
  if (!corpus.provenance.empty()) {
    out << json{{"provenance", corpus.provenance}}.dump() << '\n';
  }
  for (const auto& d : corpus.dialogues) out << dialogue_to_json(d).dump() << '\n';
}

std::string serialize_corpus_string(const Corpus& corpus) {
  std::ostringstream out;
  serialize_corpus(corpus, out);
  return out.str();
}

std::vector<Violation> validate_corpus(const Corpus& corpus) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  std::map<std::string, Group> customer_group;
  for (const auto& d : corpus.dialogues) {
    if (!ids.insert(d.id).second) out.push_back({d.id, "duplicate dialogue id"});
    auto [it, fresh] = customer_group.emplace(d.customer_id, d.group);
    if (!fresh && it->second != d.group) {
      out.push_back({d.id, "customer '" + d.customer_id + "' appears under two groups"});
    }
    validate_dialogue(d, out);
  }
  return out;
}

std::vector<std::string> customers_in_group(const Corpus& corpus, Group group) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& d : corpus.dialogues) {
    if (d.group == group && seen.insert(d.customer_id).second) {
      out.push_back(d.customer_id);
    }
  }
  return out;
}

}  // namespace daaug
