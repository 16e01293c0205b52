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

// Small fixture builders shared by the unit tests.

#ifndef DAAUG_TESTS_TEST_UTIL_H_
#define DAAUG_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "daaug/corpus.h"
#include "daaug/tags.h"

namespace daaug::testing {

inline TagSet tags(std::string_view joined) {
  auto t = TagSet::parse(joined);
  if (!t) throw std::invalid_argument("bad tag list in fixture: " + std::string(joined));
  return *t;
}

// Alternating operator/customer turns; operator turn i carries op_tags[i]
// ("A,B" or "None") and texts "op <id> <i>" / "cu <id> <i>".
inline Dialogue make_dialogue(const std::string& id, const std::string& customer, Group group,
                              const std::vector<std::string>& op_tags, bool trailing_customer = true) {
  Dialogue d;
  d.id = id;
  d.customer_id = customer;
  d.group = group;
  for (std::size_t i = 0; i < op_tags.size(); ++i) {
    Turn op;
    op.role = Role::kOperator;
    std::vector<std::string> parts;
    for (DaTag t : tags(op_tags[i]).tags()) {
      FunctionalSegment s;
      s.text = "op " + id + " " + std::to_string(i) + " " + std::string(tag_name(t));
      s.tag = t;
      parts.push_back(s.text);
      op.segments.push_back(s);
    }
    for (std::size_t k = 0; k < parts.size(); ++k) op.text += (k ? " " : "") + parts[k];
    d.turns.push_back(op);
    if (i + 1 < op_tags.size() || trailing_customer) {
      Turn cu;
      cu.role = Role::kCustomer;
      cu.text = "cu " + id + " " + std::to_string(i);
      cu.segments.push_back({cu.text, std::nullopt, std::nullopt});
      d.turns.push_back(cu);
    }
  }
  return d;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("daaug-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace daaug::testing

#endif  // DAAUG_TESTS_TEST_UTIL_H_
