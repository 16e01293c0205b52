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

// DA-annotated dialogue corpora: data model, validation and the
// line-delimited JSON file format (one dialogue per line).

#ifndef DAAUG_CORPUS_H_
#define DAAUG_CORPUS_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "daaug/tags.h"

namespace daaug {

enum class Role { kOperator, kCustomer };
enum class Group { kMinor, kAdult, kSenior };

std::string_view role_name(Role role);
std::string_view group_name(Group group);
std::optional<Role> parse_role(std::string_view name);
std::optional<Group> parse_group(std::string_view name);

struct FunctionalSegment {
  std::string text;
  // Operator segments carry exactly one DA tag.
  std::optional<DaTag> tag;
  // Customer tags are kept verbatim and are not interpreted downstream.
  std::optional<std::string> customer_tag;

  friend bool operator==(const FunctionalSegment&,
                         const FunctionalSegment&) = default;
};

struct Turn {
  Role role = Role::kOperator;
  std::string text;
  std::vector<FunctionalSegment> segments;

  // Union of the operator segment tags.
  TagSet tag_set() const;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Dialogue {
  std::string id;
  std::string customer_id;
  Group group = Group::kAdult;
  std::vector<Turn> turns;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

struct Corpus {
  std::vector<Dialogue> dialogues;
  std::string provenance;

  const Dialogue* find(std::string_view id) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

class CorpusError : public std::runtime_error {
 public:
  CorpusError(std::size_t line, const std::string& message);
  // 1-based line of the offending record; 0 when not tied to a line.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Violation {
  std::string dialogue_id;
  std::string rule;
};

// Reads a corpus file. Every record is schema-checked and the assembled
// corpus must pass validate_corpus(); the first problem throws CorpusError
// naming its line.
Corpus parse_corpus(std::istream& in);
Corpus parse_corpus_string(std::string_view text);
Corpus load_corpus(const std::string& path);

void serialize_corpus(const Corpus& corpus, std::ostream& out);
std::string serialize_corpus_string(const Corpus& corpus);

// Empty iff every corpus invariant holds.
std::vector<Violation> validate_corpus(const Corpus& corpus);

// Customer ids belonging to `group`, in first-appearance order.
std::vector<std::string> customers_in_group(const Corpus& corpus, Group group);

}  // namespace daaug

#endif  // DAAUG_CORPUS_H_
