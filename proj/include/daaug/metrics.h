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

#ifndef DAAUG_METRICS_H_
#define DAAUG_METRICS_H_

#include <stdexcept>

#include "daaug/tags.h"

namespace daaug {

// Predicted set equals the gold set. Gold must be non-empty.
inline bool exact_match(TagSet pred, TagSet gold) {
  if (gold.empty()) throw std::invalid_argument("gold tag set is empty");
  return pred == gold;
}

// Predicted and gold sets share at least one tag. Gold must be non-empty.
inline bool partial_match(TagSet pred, TagSet gold) {
  if (gold.empty()) throw std::invalid_argument("gold tag set is empty");
  return pred.intersects(gold);
}

}  // namespace daaug

#endif  // DAAUG_METRICS_H_
