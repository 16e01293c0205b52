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

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "daaug/util.h"

namespace daaug {
namespace {

std::set<std::string> as_set(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

std::vector<std::string> effective_test_minors(const Corpus& corpus,
                                               const SplitConfig& config) {
  if (!config.test_minor_ids.empty()) return config.test_minor_ids;
  auto full = as_set(config.full_resource_minor_ids);
  std::vector<std::string> out;
  for (const auto& id : customers_in_group(corpus, Group::kMinor)) {
    if (!full.count(id)) out.push_back(id);
  }
  return out;
}

// Dialogues of each customer, in corpus order.
std::map<std::string, std::vector<const Dialogue*>> by_customer(const Corpus& corpus) {
  std::map<std::string, std::vector<const Dialogue*>> out;
  for (const auto& d : corpus.dialogues) out[d.customer_id].push_back(&d);
  return out;
}

void append(std::vector<PredictionInstance>& out, const Dialogue& d, int n) {
  auto part = build_dialogue_instances(d, n);
  out.insert(out.end(), std::make_move_iterator(part.begin()),
             std::make_move_iterator(part.end()));
}

}  // namespace

std::string_view split_name(SplitName name) {
  switch (name) {
    case SplitName::kMinorsOnly: return "MinorsOnly";
    case SplitName::kZeroShot: return "ZeroShot";
    case SplitName::kLowResource: return "LowResource";
    case SplitName::kFullResource: return "FullResource";
    case SplitName::kLowResourceAug: return "LowResourceAug";
  }
  return "LowResource";
}

std::optional<SplitName> parse_split_name(std::string_view name) {
  for (auto s : {SplitName::kMinorsOnly, SplitName::kZeroShot, SplitName::kLowResource,
                 SplitName::kFullResource, SplitName::kLowResourceAug}) {
    if (split_name(s) == name) return s;
  }
  return std::nullopt;
}

SplitConfig make_split_config(const Corpus& corpus, int split_index,
                              int low_resource, int full_resource, int n,
                              std::uint64_t seed) {
  auto minors = customers_in_group(corpus, Group::kMinor);
  std::sort(minors.begin(), minors.end());
  if (low_resource < 1 || full_resource < low_resource ||
      static_cast<std::size_t>(full_resource) >= minors.size()) {
    throw SplitError("not enough minors for the requested split sizes");
  }
  SplitConfig config;
  config.n = n;
  config.seed = seed;
  std::size_t m = minors.size();
  std::size_t start = (static_cast<std::size_t>(split_index) * low_resource) % m;
  for (int i = 0; i < full_resource; ++i) {
    const auto& id = minors[(start + i) % m];
    if (i < low_resource) config.low_resource_minor_ids.push_back(id);
    config.full_resource_minor_ids.push_back(id);
  }
  return config;
}

void check_split_config(const Corpus& corpus, const SplitConfig& config) {
  if (config.n < 1) throw SplitError("history length n must be >= 1");
  if (config.low_resource_minor_ids.empty()) throw SplitError("no low-resource minors");
  auto minors = as_set(customers_in_group(corpus, Group::kMinor));
  auto check_minors = [&](const std::vector<std::string>& ids, const char* what) {
    for (const auto& id : ids) {
      if (!minors.count(id)) {
        throw SplitError(std::string(what) + " id '" + id + "' is not a minor in the corpus");
      }
    }
    if (as_set(ids).size() != ids.size()) throw SplitError(std::string(what) + " ids repeat");
  };
  check_minors(config.low_resource_minor_ids, "low-resource");
  check_minors(config.full_resource_minor_ids, "full-resource");
  check_minors(config.test_minor_ids, "test");
  auto full = as_set(config.full_resource_minor_ids);
  for (const auto& id : config.low_resource_minor_ids) {
    if (!full.count(id)) throw SplitError("low-resource minor '" + id + "' missing from full-resource set");
  }
  auto test = effective_test_minors(corpus, config);
  if (test.empty()) throw SplitError("no test minors");
  for (const auto& id : test) {
    if (full.count(id)) throw SplitError("test minor '" + id + "' also in full-resource set");
  }
  int available = 0;
  for (const auto& d : corpus.dialogues) available += d.group != Group::kMinor;
  if (config.validation_dialogues < 0 || config.validation_dialogues >= available) {
    throw SplitError("validation_dialogues exceeds the adult/senior dialogues available");
  }
}

std::vector<std::string> validation_dialogue_ids(const Corpus& corpus, int count) {
  std::vector<std::pair<std::uint64_t, std::string>> keyed;
  for (const auto& d : corpus.dialogues) {
    if (d.group != Group::kMinor) keyed.emplace_back(fnv1a64(d.id), d.id);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::string> out;
  for (int i = 0; i < count && i < static_cast<int>(keyed.size()); ++i) {
    out.push_back(keyed[i].second);
  }
  std::sort(out.begin(), out.end());
  return out;
}

DatasetSplit build_split(const Corpus& corpus, SplitName name,
                         const SplitConfig& config) {
  check_split_config(corpus, config);
  const int n = config.n;
  DatasetSplit split;
  split.name = name;
  auto customers = by_customer(corpus);
  auto add_train = [&](const Dialogue& d) {
    split.train_dialogue_ids.push_back(d.id);
    append(split.train, d, n);
  };
  auto add_valid = [&](const Dialogue& d) {
    split.valid_dialogue_ids.push_back(d.id);
    append(split.valid, d, n);
  };

  if (name == SplitName::kMinorsOnly) {
    // One held-out dialogue per low-resource minor, picked by seed.
    Rng rng(config.seed);
    for (const auto& id : config.low_resource_minor_ids) {
      const auto& dialogues = customers[id];
      std::size_t held = rng.index(dialogues.size());
      for (std::size_t i = 0; i < dialogues.size(); ++i) {
        if (i == held) add_valid(*dialogues[i]);
        else add_train(*dialogues[i]);
      }
    }
  } else {
    auto valid_ids = as_set(validation_dialogue_ids(corpus, config.validation_dialogues));
    std::set<std::string> minors;
    if (name == SplitName::kLowResource || name == SplitName::kLowResourceAug) {
      minors = as_set(config.low_resource_minor_ids);
    } else if (name == SplitName::kFullResource) {
      minors = as_set(config.full_resource_minor_ids);
    }
    for (const auto& d : corpus.dialogues) {
      if (d.group == Group::kMinor) {
        if (minors.count(d.customer_id)) add_train(d);
      } else if (valid_ids.count(d.id)) {
        add_valid(d);
      } else {
        add_train(d);
      }
    }
  }

  for (const auto& id : effective_test_minors(corpus, config)) {
    for (const Dialogue* d : customers[id]) {
      split.test_dialogue_ids.push_back(d->id);
      append(split.test, *d, n);
    }
  }
  return split;
}

std::vector<SplitReportRow> split_report(const std::vector<DatasetSplit>& splits) {
  std::vector<SplitReportRow> rows;
  for (const auto& s : splits) {
    rows.push_back({std::string(split_name(s.name)), s.dialogue_count(), s.train.size(),
                    s.valid.size(), s.test.size()});
  }
  return rows;
}

std::string render_split_report(const std::vector<SplitReportRow>& rows) {
  std::ostringstream out;
  if (rows.empty()) return "";
  out << "Setting\tDialogues\tTrain\tValid\tTest\n";
  for (const auto& r : rows) {
    out << r.split << '\t' << r.dialogues << '\t' << r.train << '\t' << r.valid << '\t'
        << r.test << '\n';
  }
  return out.str();
}

}  // namespace daaug
