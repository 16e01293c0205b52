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

#ifndef DAAUG_TAGS_H_
#define DAAUG_TAGS_H_

#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace daaug {

// Operator dialogue-act tags of the travel-agency task, plus the "None"
// label used for non-informative segments ("Yeah", "Uh-huh").
enum class DaTag : std::uint8_t {
  kDirectionQuestion,
  kSeasonQuestion,
  kPeopleQuestion,
  kAgeQuestion,
  kExperienceQuestion,
  kRequestQuestion,
  kSearchAdvice,
  kRequestConfirm,
  kDestinationConfirm,
  kAddDestinationList,
  kTravelSummary,
  kSearchInform,
  kPhotoInform,
  kSearchConditionInform,
  kNameInform,
  kIntroductionInform,
  kOfficeHoursInform,
  kPriceInform,
  kFeatureInform,
  kAccessInform,
  kPhoneNumberInform,
  kParkInform,
  kEmptyInform,
  kMistakeInform,
  kOperatorSpotImpression,
  kSearchResultInform,
  kOnScreenSuggest,
  kOnScreenQuestion,
  kNone,
};

inline constexpr int kNumOperatorTags = 28;
inline constexpr int kNumTags = kNumOperatorTags + 1;  // operator tags + None

constexpr int tag_index(DaTag tag) { return static_cast<int>(tag); }
constexpr DaTag tag_at(int index) { return static_cast<DaTag>(index); }

// Name exactly as written in corpus files ("None" for kNone).
std::string_view tag_name(DaTag tag);
std::optional<DaTag> parse_tag(std::string_view name);

// All 28 operator tags (None excluded), in declaration order.
const std::array<DaTag, kNumOperatorTags>& operator_tags();

// A set of tags packed into a bitmask. Iteration and rendering use the
// canonical order (sorted by tag name), so two equal sets always render
// identically. The empty set doubles as the PAD marker in DA histories;
// a real operator turn always carries at least one tag.
class TagSet {
 public:
  constexpr TagSet() = default;
  TagSet(std::initializer_list<DaTag> tags) {
    for (DaTag t : tags) insert(t);
  }
  static constexpr TagSet from_bits(std::uint32_t bits) {
    TagSet s;
    s.bits_ = bits & kMask;
    return s;
  }
  static TagSet from_range(const std::vector<DaTag>& tags) {
    TagSet s;
    for (DaTag t : tags) s.insert(t);
    return s;
  }

  constexpr void insert(DaTag t) { bits_ |= bit(t); }
  constexpr void erase(DaTag t) { bits_ &= ~bit(t); }
  constexpr bool contains(DaTag t) const { return (bits_ & bit(t)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr std::uint32_t bits() const { return bits_; }

  constexpr TagSet without_none() const {
    return from_bits(bits_ & ~bit(DaTag::kNone));
  }
  constexpr TagSet intersect(TagSet other) const {
    return from_bits(bits_ & other.bits_);
  }
  constexpr bool intersects(TagSet other) const {
    return (bits_ & other.bits_) != 0;
  }

  // Members sorted by tag name.
  std::vector<DaTag> tags() const;
  // Comma-joined canonical rendering, e.g. "RequestConfirm,SearchInform".
  std::string to_string() const;
  // Inverse of to_string(); nullopt on an unknown name. "" yields {}.
  static std::optional<TagSet> parse(std::string_view joined);

  friend constexpr bool operator==(TagSet a, TagSet b) = default;
  friend constexpr auto operator<=>(TagSet a, TagSet b) = default;

 private:
  static constexpr std::uint32_t kMask = (1u << kNumTags) - 1;
  static constexpr std::uint32_t bit(DaTag t) { return 1u << tag_index(t); }
  std::uint32_t bits_ = 0;
};

// One step of a DA history: the canonical tag set of an operator turn, or
// PAD (empty) when the dialogue has fewer than n prior turns.
using HistoryStep = TagSet;
inline constexpr HistoryStep kPadStep{};
inline constexpr std::string_view kPadToken = "PAD";

using DaHistory = std::vector<HistoryStep>;

// "PAD" for pad steps, otherwise the canonical tag list.
std::string step_to_string(HistoryStep step);
std::string history_to_string(const DaHistory& history, std::string_view sep);

}  // namespace daaug

#endif  // DAAUG_TAGS_H_
