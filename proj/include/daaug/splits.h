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

// Experimental settings for low-resource DA prediction:
//
//   MinorsOnly      the low-resource minors' dialogues only
//   ZeroShot        every adult/senior dialogue, no minors
//   LowResource     MinorsOnly + ZeroShot
//   FullResource    ZeroShot + all dialogues of the full-resource minors
//   LowResourceAug  LowResource, later topped up with generated data
//
// Dialogue counts include the validation dialogues: adult/senior settings
// hold out `validation_dialogues` adult/senior dialogues, MinorsOnly holds
// out one dialogue per low-resource minor. Test dialogues belong to the
// test minors and never appear in training or validation.

#ifndef DAAUG_SPLITS_H_
#define DAAUG_SPLITS_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "daaug/corpus.h"
#include "daaug/instances.h"

namespace daaug {

enum class SplitName {
  kMinorsOnly,
  kZeroShot,
  kLowResource,
  kFullResource,
  kLowResourceAug,
};

std::string_view split_name(SplitName name);
std::optional<SplitName> parse_split_name(std::string_view name);

struct SplitConfig {
  std::vector<std::string> low_resource_minor_ids;
  // Superset of low_resource_minor_ids.
  std::vector<std::string> full_resource_minor_ids;
  // Empty means every minor outside full_resource_minor_ids.
  std::vector<std::string> test_minor_ids;
  int validation_dialogues = 21;
  int n = kDefaultHistoryLength;
  std::uint64_t seed = 1;
};

struct DatasetSplit {
  SplitName name = SplitName::kLowResource;
  std::vector<PredictionInstance> train;
  std::vector<PredictionInstance> valid;
  std::vector<PredictionInstance> test;
  std::vector<std::string> train_dialogue_ids;
  std::vector<std::string> valid_dialogue_ids;
  std::vector<std::string> test_dialogue_ids;

  std::size_t dialogue_count() const {
    return train_dialogue_ids.size() + valid_dialogue_ids.size();
  }
};

class SplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rotating assignment over the sorted minor ids: split k (0-based) takes
// `low_resource` minors starting at k * low_resource, extends them to
// `full_resource` minors, and tests on the rest.
SplitConfig make_split_config(const Corpus& corpus, int split_index,
                              int low_resource = 3, int full_resource = 10,
                              int n = kDefaultHistoryLength,
                              std::uint64_t seed = 1);

// Throws SplitError on an inconsistent config.
void check_split_config(const Corpus& corpus, const SplitConfig& config);

DatasetSplit build_split(const Corpus& corpus, SplitName name,
                         const SplitConfig& config);

// Adult/senior validation dialogues; a function of the corpus only, so the
// ZeroShot training set is the same under every SplitConfig.
std::vector<std::string> validation_dialogue_ids(const Corpus& corpus, int count);

struct SplitReportRow {
  std::string split;
  std::size_t dialogues = 0;
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;
};

std::vector<SplitReportRow> split_report(const std::vector<DatasetSplit>& splits);
std::string render_split_report(const std::vector<SplitReportRow>& rows);

}  // namespace daaug

#endif  // DAAUG_SPLITS_H_
