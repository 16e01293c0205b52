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

#include "daaug/tags.h"

#include <algorithm>

namespace daaug {
namespace {

constexpr std::array<std::string_view, kNumTags> kNames = {
    "DirectionQuestion",
    "SeasonQuestion",
    "PeopleQuestion",
    "AgeQuestion",
    "ExperienceQuestion",
    "RequestQuestion",
    "SearchAdvice",
    "RequestConfirm",
    "DestinationConfirm",
    "AddDestinationList",
    "TravelSummary",
    "SearchInform",
    "PhotoInform",
    "SearchConditionInform",
    "NameInform",
    "IntroductionInform",
    "OfficeHoursInform",
    "PriceInform",
    "FeatureInform",
    "AccessInform",
    "PhoneNumberInform",
    "ParkInform",
    "EmptyInform",
    "MistakeInform",
    "OperatorSpotImpression",
    "SearchResultInform",
    "OnScreenSuggest",
    "OnScreenQuestion",
    "None",
};

// Tag indices ordered by name; drives canonical rendering.
const std::array<int, kNumTags>& name_order() {
  static const std::array<int, kNumTags> order = [] {
    std::array<int, kNumTags> o{};
    for (int i = 0; i < kNumTags; ++i) o[i] = i;
    std::sort(o.begin(), o.end(),
              [](int a, int b) { return kNames[a] < kNames[b]; });
    return o;
  }();
  return order;
}

}  // namespace

std::string_view tag_name(DaTag tag) { return kNames[tag_index(tag)]; }

std::optional<DaTag> parse_tag(std::string_view name) {
  for (int i = 0; i < kNumTags; ++i) {
    if (kNames[i] == name) return tag_at(i);
  }
  return std::nullopt;
}

const std::array<DaTag, kNumOperatorTags>& operator_tags() {
  static const std::array<DaTag, kNumOperatorTags> tags = [] {
    std::array<DaTag, kNumOperatorTags> t{};
    for (int i = 0; i < kNumOperatorTags; ++i) t[i] = tag_at(i);
    return t;
  }();
  return tags;
}

std::vector<DaTag> TagSet::tags() const {
  std::vector<DaTag> out;
  out.reserve(size());
  for (int i : name_order()) {
    if (contains(tag_at(i))) out.push_back(tag_at(i));
  }
  return out;
}

std::string TagSet::to_string() const {
  std::string out;
  for (DaTag t : tags()) {
    if (!out.empty()) out += ',';
    out += tag_name(t);
  }
  return out;
}

std::optional<TagSet> TagSet::parse(std::string_view joined) {
  TagSet s;
  while (!joined.empty()) {
    auto comma = joined.find(',');
    auto name = joined.substr(0, comma);
    auto tag = parse_tag(name);
    if (!tag) return std::nullopt;
    s.insert(*tag);
    if (comma == std::string_view::npos) break;
    joined.remove_prefix(comma + 1);
  }
  return s;
}

std::string step_to_string(HistoryStep step) {
  return step.empty() ? std::string(kPadToken) : step.to_string();
}

std::string history_to_string(const DaHistory& history, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i) out += sep;
    out += step_to_string(history[i]);
  }
  return out;
}

}  // namespace daaug
