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

#include "daaug/synth.h"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

namespace daaug {
namespace {

using T = DaTag;

struct Edge {
  DaTag to;
  double weight;
};

struct Row {
  DaTag from;
  std::vector<Edge> edges;
};

// Typical operator flow: hearing questions, search, spot information,
// confirmation and summary. Adults and seniors share it.
const std::vector<Row>& base_rows() {
  static const std::vector<Row> rows = {
      {T::kDirectionQuestion, {{T::kSeasonQuestion, 3}, {T::kPeopleQuestion, 2}, {T::kRequestQuestion, 3}, {T::kNone, 2}}},
      {T::kSeasonQuestion, {{T::kPeopleQuestion, 3}, {T::kRequestQuestion, 3}, {T::kAgeQuestion, 1}, {T::kNone, 3}}},
      {T::kPeopleQuestion, {{T::kAgeQuestion, 4}, {T::kRequestQuestion, 3}, {T::kNone, 3}}},
      {T::kAgeQuestion, {{T::kExperienceQuestion, 3}, {T::kRequestQuestion, 4}, {T::kNone, 3}}},
      {T::kExperienceQuestion, {{T::kRequestQuestion, 5}, {T::kDirectionQuestion, 2}, {T::kNone, 3}}},
      {T::kRequestQuestion, {{T::kSearchInform, 4}, {T::kSearchConditionInform, 3}, {T::kNone, 3}}},
      {T::kSearchAdvice, {{T::kSearchInform, 5}, {T::kSearchConditionInform, 2}, {T::kNone, 3}}},
      {T::kRequestConfirm, {{T::kSearchInform, 4}, {T::kSearchConditionInform, 3}, {T::kNone, 3}}},
      {T::kDestinationConfirm, {{T::kAddDestinationList, 5}, {T::kTravelSummary, 2}, {T::kNone, 3}}},
      {T::kAddDestinationList, {{T::kTravelSummary, 3}, {T::kOnScreenSuggest, 3}, {T::kNone, 4}}},
      {T::kTravelSummary, {{T::kDirectionQuestion, 3}, {T::kOnScreenSuggest, 3}, {T::kNone, 4}}},
      {T::kSearchInform, {{T::kSearchResultInform, 5}, {T::kEmptyInform, 1}, {T::kNone, 4}}},
      {T::kPhotoInform, {{T::kFeatureInform, 4}, {T::kOperatorSpotImpression, 3}, {T::kNone, 3}}},
      {T::kSearchConditionInform, {{T::kSearchInform, 5}, {T::kSearchResultInform, 2}, {T::kNone, 3}}},
      {T::kNameInform, {{T::kIntroductionInform, 4}, {T::kPhotoInform, 3}, {T::kNone, 3}}},
      {T::kIntroductionInform, {{T::kFeatureInform, 3}, {T::kAccessInform, 2}, {T::kPriceInform, 2}, {T::kNone, 3}}},
      {T::kOfficeHoursInform, {{T::kPriceInform, 3}, {T::kAccessInform, 3}, {T::kNone, 4}}},
      {T::kPriceInform, {{T::kOfficeHoursInform, 2}, {T::kParkInform, 2}, {T::kAccessInform, 2}, {T::kNone, 4}}},
      {T::kFeatureInform, {{T::kOperatorSpotImpression, 3}, {T::kAccessInform, 2}, {T::kPriceInform, 2}, {T::kNone, 3}}},
      {T::kAccessInform, {{T::kParkInform, 3}, {T::kPhoneNumberInform, 2}, {T::kDestinationConfirm, 2}, {T::kNone, 3}}},
      {T::kPhoneNumberInform, {{T::kDestinationConfirm, 4}, {T::kOfficeHoursInform, 2}, {T::kNone, 4}}},
      {T::kParkInform, {{T::kDestinationConfirm, 4}, {T::kPhoneNumberInform, 2}, {T::kNone, 4}}},
      {T::kEmptyInform, {{T::kMistakeInform, 2}, {T::kSearchConditionInform, 4}, {T::kNone, 4}}},
      {T::kMistakeInform, {{T::kNameInform, 4}, {T::kNone, 6}}},
      {T::kOperatorSpotImpression, {{T::kOnScreenSuggest, 3}, {T::kDestinationConfirm, 3}, {T::kNone, 4}}},
      {T::kSearchResultInform, {{T::kNameInform, 4}, {T::kOnScreenSuggest, 3}, {T::kNone, 3}}},
      {T::kOnScreenSuggest, {{T::kNameInform, 3}, {T::kPhotoInform, 3}, {T::kNone, 4}}},
      {T::kOnScreenQuestion, {{T::kDestinationConfirm, 4}, {T::kNameInform, 2}, {T::kNone, 4}}},
      {T::kNone, {{T::kDirectionQuestion, 1}, {T::kRequestQuestion, 2}, {T::kNameInform, 2}, {T::kIntroductionInform, 2},
                  {T::kFeatureInform, 2}, {T::kOnScreenSuggest, 2}, {T::kTravelSummary, 1}, {T::kSearchInform, 2},
                  {T::kPhotoInform, 1}, {T::kSearchConditionInform, 1}}},
  };
  return rows;
}

DialogueLexicon build_lexicon() {
  DialogueLexicon lx;
  auto op = [&](DaTag t, std::vector<std::string> phrases) {
    lx.operator_phrases[tag_index(t)] = std::move(phrases);
  };
  auto reply = [&](DaTag t, std::vector<std::string> phrases) {
    lx.keyed_replies[tag_index(t)] = std::move(phrases);
  };
  op(T::kDirectionQuestion, {"To which destination are you planning to travel?", "Which area would you like to visit?"});
  op(T::kSeasonQuestion, {"When will you go?", "Which season are you thinking of?"});
  op(T::kPeopleQuestion, {"How many people are traveling with you?", "Who will you be traveling with?"});
  op(T::kAgeQuestion, {"How old are your children?", "May I ask the ages of your companions?"});
  op(T::kExperienceQuestion, {"Have you ever been to Osaka?", "Have you visited this area before?"});
  op(T::kRequestQuestion, {"What would you like to do there?", "Is there anything you want to try on this trip?"});
  op(T::kSearchAdvice, {"Should I look for a restaurant there?", "Shall I search for places to eat as well?"});
  op(T::kRequestConfirm, {"You want to go to a spa, don't you?", "So you would like somewhere with animals, right?"});
  op(T::kDestinationConfirm, {"Am I correct in assuming that you are going to Yashi Park?", "So this park is the place, correct?"});
  op(T::kAddDestinationList, {"I'll add this location to the list.", "Let me put this spot on your list."});
  op(T::kTravelSummary, {"Looking back, you plan to visit the Toshogu Shrine first.", "To summarize, you will start at the shrine and then the museum."});
  op(T::kSearchInform, {"I will now search.", "Let me search the system for that."});
  op(T::kPhotoInform, {"Here is a picture of a meal containing a lot of salmon roe.", "This photo shows the view from the observation deck."});
  op(T::kSearchConditionInform, {"I can also filter by the time required.", "I can narrow it down by area if you like."});
  op(T::kNameInform, {"There is a commercial complex called the Sapporo Factory.", "There is an aquarium called Sunshine Aquarium."});
  op(T::kIntroductionInform, {"It was established in 1876.", "It is a historic garden built by a feudal lord."});
  op(T::kOfficeHoursInform, {"Our business hours span 10:00 a.m. to 10:00 p.m.", "It is closed on Mondays."});
  op(T::kPriceInform, {"The admission fee is 360 yen.", "Lunch there costs about 1,500 yen."});
  op(T::kFeatureInform, {"It is recommended for women even when it rains.", "It is famous for its autumn leaves."});
  op(T::kAccessInform, {"This location is a five-minute walk from the railway station.", "You can get there by bus from the airport."});
  op(T::kPhoneNumberInform, {"The phone number is 095 824.", "You can call them at 011 231."});
  op(T::kParkInform, {"There are three parking lots.", "Parking is available next to the entrance."});
  op(T::kEmptyInform, {"I do not see anything in the search results.", "Unfortunately nothing came up for that."});
  op(T::kMistakeInform, {"Sorry, this store is open on all days of the week.", "My apologies, the fee I mentioned was wrong."});
  op(T::kOperatorSpotImpression, {"This restaurant looks nice and inexpensive.", "This place looks really fun."});
  op(T::kSearchResultInform, {"It appears there are numerous stores in this location.", "Quite a few spots came up."});
  op(T::kOnScreenSuggest, {"How about this site?", "What about the one on the screen now?"});
  op(T::kOnScreenQuestion, {"Which one looks the best, number 1, 2, or 3?", "Which of these on the screen do you like?"});
  op(T::kNone, {"Yeah.", "Uh-huh.", "I see."});

  reply(T::kDirectionQuestion, {"I want to plan a new trip."});
  reply(T::kSeasonQuestion, {"We would like to go to Hokkaido."});
  reply(T::kPeopleQuestion, {"We are going in the summer holidays."});
  reply(T::kAgeQuestion, {"I will go with my family and my kids."});
  reply(T::kExperienceQuestion, {"The kids are in elementary school."});
  reply(T::kRequestQuestion, {"No, it is my first time there."});
  reply(T::kSearchAdvice, {"We also need somewhere to have lunch."});
  reply(T::kRequestConfirm, {"A hot spring would be nice, I think."});
  reply(T::kDestinationConfirm, {"That park looks perfect for us."});
  reply(T::kAddDestinationList, {"Yes, that is the one."});
  reply(T::kTravelSummary, {"I think that is everything."});
  reply(T::kSearchInform, {"Please look for a place with a nice view."});
  reply(T::kPhotoInform, {"What does it look like?"});
  reply(T::kSearchConditionInform, {"There are too many, can you narrow it?"});
  reply(T::kNameInform, {"What kind of places are there?"});
  reply(T::kIntroductionInform, {"Tell me more about that place."});
  reply(T::kOfficeHoursInform, {"What time does it open?"});
  reply(T::kPriceInform, {"How much does it cost?"});
  reply(T::kFeatureInform, {"What is it known for?"});
  reply(T::kAccessInform, {"How do we get there?"});
  reply(T::kPhoneNumberInform, {"Can I call them directly?"});
  reply(T::kParkInform, {"We will drive there, is that fine?"});
  reply(T::kEmptyInform, {"Is there a zoo with pandas in town?"});
  reply(T::kMistakeInform, {"Wait, are they really closed then?"});
  reply(T::kOperatorSpotImpression, {"Oh, that sounds good."});
  reply(T::kSearchResultInform, {"Did you find anything?"});
  reply(T::kOnScreenSuggest, {"Do you have any recommendations?"});
  reply(T::kOnScreenQuestion, {"They all look good to me."});

  lx.generic_replies = {"Okay.", "Yes.", "Right.", "I see.", "Sounds good."};
  lx.ambiguous_replies = {"Um... I don't really know.", "Anything is fine, I guess.",
                          "Maybe? I'm not sure.", "Hmm, whatever you think.",
                          "I don't know, um, maybe something fun?"};
  return lx;
}

int sample_segment_count(const SynthSpec& spec, Rng& rng) {
  return static_cast<int>(rng.categorical(spec.segments_per_turn)) + 1;
}

DaTag sample_tag(std::span<const double> dist, Rng& rng) {
  return tag_at(static_cast<int>(rng.categorical(dist)));
}

Dialogue generate_dialogue(const SynthSpec& spec, const GroupSynthSpec& g,
                           std::string id, std::string customer_id, Rng& rng) {
  int span = spec.max_operator_turns - spec.min_operator_turns + 1;
  int num_turns = spec.min_operator_turns + static_cast<int>(rng.index(span));

  // Operator DA sequence first: the flattened segment tags form one chain.
  std::vector<std::vector<DaTag>> turn_tags(num_turns);
  DaTag state = sample_tag(g.initial, rng);
  for (auto& tags : turn_tags) {
    int segments = sample_segment_count(spec, rng);
    for (int s = 0; s < segments; ++s) {
      if (s > 0) state = sample_tag(g.transitions[tag_index(state)], rng);
      tags.push_back(state);
    }
    state = sample_tag(g.transitions[tag_index(state)], rng);
  }

  Dialogue d;
  d.id = std::move(id);
  d.customer_id = std::move(customer_id);
  d.group = g.group;
  for (int i = 0; i < num_turns; ++i) {
    Turn op;
    op.role = Role::kOperator;
    std::vector<std::string> seg_texts;
    op.text = render_operator_text(spec.lexicon, g.style, turn_tags[i], rng, &seg_texts);
    for (std::size_t s = 0; s < seg_texts.size(); ++s) {
      op.segments.push_back({seg_texts[s], turn_tags[i][s], std::nullopt});
    }
    d.turns.push_back(std::move(op));

    TagSet next = i + 1 < num_turns ? TagSet::from_range(turn_tags[i + 1]) : TagSet{};
    Turn cu;
    cu.role = Role::kCustomer;
    std::string customer_tag;
    cu.text = render_customer_reply(spec.lexicon, g.style, next, rng, &customer_tag);
    cu.segments.push_back({cu.text, std::nullopt, customer_tag});
    d.turns.push_back(std::move(cu));
  }
  return d;
}

}  // namespace

void validate_synth_spec(const SynthSpec& spec) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("synth spec: " + msg); };
  if (spec.groups.empty()) fail("no groups");
  if (spec.min_operator_turns < 1 || spec.max_operator_turns < spec.min_operator_turns) {
    fail("operator turn range must satisfy 1 <= min <= max");
  }
  if (spec.segments_per_turn.empty()) fail("segments_per_turn is empty");
  double seg_mass = 0.0;
  for (double w : spec.segments_per_turn) {
    if (w < 0.0) fail("negative segment weight");
    seg_mass += w;
  }
  if (!(seg_mass > 0.0)) fail("segment weights sum to zero");
  for (const auto& g : spec.groups) {
    std::string name(group_name(g.group));
    if (g.customers <= 0 || g.dialogues_per_customer <= 0) fail(name + ": counts must be positive");
    auto check_row = [&](const TagDistribution& row, const std::string& what) {
      double sum = 0.0;
      for (double p : row) {
        if (p < 0.0) fail(name + ": negative probability in " + what);
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) fail(name + ": " + what + " does not sum to 1");
    };
    check_row(g.initial, "initial distribution");
    for (int r = 0; r < kNumTags; ++r) {
      check_row(g.transitions[r], "transition row " + std::string(tag_name(tag_at(r))));
    }
  }
  for (int t = 0; t < kNumTags; ++t) {
    if (spec.lexicon.operator_phrases[t].empty()) {
      fail("lexicon has no operator phrase for " + std::string(tag_name(tag_at(t))));
    }
  }
  if (spec.lexicon.generic_replies.empty()) fail("lexicon has no generic replies");
}

Corpus generate_synthetic_corpus(const SynthSpec& spec) {
  validate_synth_spec(spec);
  Corpus corpus;
  corpus.provenance = "synthetic travel-agency corpus, seed " + std::to_string(spec.seed);
  for (const auto& g : spec.groups) {
    for (int c = 1; c <= g.customers; ++c) {
      char cid[64];
      std::snprintf(cid, sizeof(cid), "%s-%02d", std::string(group_name(g.group)).c_str(), c);
      // One stream per customer so group sizes do not perturb each other.
      Rng rng(mix64(spec.seed) ^ fnv1a64(cid));
      for (int k = 1; k <= g.dialogues_per_customer; ++k) {
        std::string did = std::string(cid) + "-d" + std::to_string(k);
        corpus.dialogues.push_back(generate_dialogue(spec, g, did, cid, rng));
      }
    }
  }
  return corpus;
}

const DialogueLexicon& travel_agency_lexicon() {
  static const DialogueLexicon lexicon = build_lexicon();
  return lexicon;
}

const TransitionMatrix& travel_agency_base_matrix() {
  static const TransitionMatrix m = [] {
    TransitionMatrix out{};
    for (const Row& row : base_rows()) {
      double total = 0.0;
      for (const Edge& e : row.edges) total += e.weight;
      for (const Edge& e : row.edges) {
        out[tag_index(row.from)][tag_index(e.to)] = e.weight / total;
      }
    }
    return out;
  }();
  return m;
}

TagSet minor_preferred_acts() {
  return {T::kRequestConfirm, T::kRequestQuestion, T::kDestinationConfirm,
          T::kOnScreenQuestion, T::kSearchAdvice};
}

GroupStyle minor_group_style() {
  GroupStyle s;
  s.keyed_reply_prob = 0.3;
  s.ambiguous_prob = 0.85;
  s.ambiguous_triggers = minor_preferred_acts();
  s.operator_openers = {"Okay!", "Hmm, let's see.", "Alright!"};
  s.opener_prob = 0.3;
  return s;
}

GroupStyle default_group_style() { return GroupStyle{}; }

TransitionMatrix perturb_matrix(const TransitionMatrix& base, double tv,
                                TagSet preferred) {
  if (tv < 0.0 || tv > 1.0) throw std::invalid_argument("perturbation tv must lie in [0, 1]");
  TransitionMatrix out = base;
  if (tv == 0.0) return out;
  for (int r = 0; r < kNumTags; ++r) {
    std::vector<int> targets;
    for (int c = 0; c < kNumTags; ++c) {
      if (base[r][c] == 0.0 && preferred.contains(tag_at(c))) targets.push_back(c);
    }
    if (targets.empty()) {
      for (int c = 0; c < kNumTags; ++c) {
        if (base[r][c] == 0.0) targets.push_back(c);
      }
    }
    if (targets.empty()) throw std::invalid_argument("row has full support; cannot perturb");
    for (int c = 0; c < kNumTags; ++c) out[r][c] = (1.0 - tv) * base[r][c];
    for (int c : targets) out[r][c] += tv / static_cast<double>(targets.size());
  }
  return out;
}

double total_variation(const TagDistribution& a, const TagDistribution& b) {
  double d = 0.0;
  for (int i = 0; i < kNumTags; ++i) d += std::abs(a[i] - b[i]);
  return 0.5 * d;
}

SynthSpec make_travel_agency_spec(const SynthPreset& preset) {
  SynthSpec spec;
  spec.seed = preset.seed;
  spec.min_operator_turns = preset.min_operator_turns;
  spec.max_operator_turns = preset.max_operator_turns;
  spec.lexicon = travel_agency_lexicon();

  TagDistribution initial{};
  initial[tag_index(T::kDirectionQuestion)] = 0.5;
  initial[tag_index(T::kNone)] = 0.3;
  initial[tag_index(T::kRequestQuestion)] = 0.2;

  const TransitionMatrix& base = travel_agency_base_matrix();
  auto add = [&](Group g, int customers, TransitionMatrix m, GroupStyle style) {
    if (customers <= 0) return;
    spec.groups.push_back({g, customers, preset.dialogues_per_customer, initial,
                           std::move(m), std::move(style)});
  };
  add(Group::kMinor, preset.minors,
      perturb_matrix(base, preset.minor_perturbation_tv, minor_preferred_acts()),
      preset.minor_style ? minor_group_style() : default_group_style());
  add(Group::kAdult, preset.adults, base, default_group_style());
  add(Group::kSenior, preset.seniors, base, default_group_style());
  return spec;
}

std::string render_operator_text(const DialogueLexicon& lexicon,
                                 const GroupStyle& style,
                                 const std::vector<DaTag>& segment_tags,
                                 Rng& rng,
                                 std::vector<std::string>* segment_texts) {
  std::string text;
  for (std::size_t s = 0; s < segment_tags.size(); ++s) {
    std::string seg = rng.pick(lexicon.operator_phrases[tag_index(segment_tags[s])]);
    if (s == 0 && !style.operator_openers.empty() && rng.bernoulli(style.opener_prob)) {
      seg = rng.pick(style.operator_openers) + " " + seg;
    }
    if (!text.empty()) text += ' ';
    text += seg;
    if (segment_texts) segment_texts->push_back(std::move(seg));
  }
  return text;
}

std::string render_customer_reply(const DialogueLexicon& lexicon,
                                  const GroupStyle& style, TagSet next_tags,
                                  Rng& rng, std::string* customer_tag) {
  auto set_tag = [&](const char* t) {
    if (customer_tag) *customer_tag = t;
  };
  if (next_tags.intersects(style.ambiguous_triggers) && !lexicon.ambiguous_replies.empty() &&
      rng.bernoulli(style.ambiguous_prob)) {
    set_tag("Hesitation");
    return rng.pick(lexicon.ambiguous_replies);
  }
  std::vector<DaTag> keyed;
  for (DaTag t : next_tags.without_none().tags()) {
    if (!lexicon.keyed_replies[tag_index(t)].empty()) keyed.push_back(t);
  }
  if (!keyed.empty() && rng.bernoulli(style.keyed_reply_prob)) {
    set_tag("Answer");
    return rng.pick(lexicon.keyed_replies[tag_index(rng.pick(keyed))]);
  }
  set_tag("Acknowledge");
  return rng.pick(lexicon.generic_replies);
}

}  // namespace daaug
