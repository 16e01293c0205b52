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

#include "daaug/dialogue_generator.h"

#include <algorithm>
#include <set>

#include "daaug/util.h"

namespace daaug {

using nlohmann::json;

namespace {

constexpr std::string_view kHistoryLabel = "DA history: ";
constexpr std::string_view kGoldLabel = "Next operator DA: ";

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

std::optional<HistoryStep> parse_step(std::string_view s) {
  s = trim(s);
  if (s == kPadToken) return kPadStep;
  auto set = TagSet::parse(s);
  if (!set || set->empty()) return std::nullopt;
  return set;
}

std::string render_example(const FewShotExample& ex, int index) {
  std::string out = "[Example " + std::to_string(index) + "]\n";
  out += render_condition(ex.history, ex.gold);
  for (std::size_t i = 0; i < ex.pairs.size(); ++i) {
    out += "Operator: [" + ex.history[i].to_string() + "] " + ex.pairs[i].operator_text + "\n";
    out += "Customer: " + ex.pairs[i].customer_text + "\n";
  }
  return out;
}

std::size_t real_steps(const DaHistory& h) {
  return static_cast<std::size_t>(
      std::count_if(h.begin(), h.end(), [](HistoryStep s) { return s != kPadStep; }));
}

}  // namespace

void FewShotBank::validate(std::size_t expected) const {
  if (examples.size() != expected) {
    throw DialogueGenError("few-shot bank holds " + std::to_string(examples.size()) +
                           " examples, expected " + std::to_string(expected));
  }
  for (const auto& ex : examples) {
    if (ex.pairs.empty() || ex.pairs.size() != ex.history.size() ||
        real_steps(ex.history) != ex.history.size() || ex.gold.empty()) {
      throw DialogueGenError("malformed few-shot example " + ex.source_id);
    }
  }
}

FewShotBank build_few_shot_bank(const Corpus& corpus,
                                const std::vector<std::string>& target_dialogue_ids, int n,
                                std::uint64_t seed, int count) {
  std::vector<std::string> ids = target_dialogue_ids;
  std::sort(ids.begin(), ids.end());
  std::vector<FewShotExample> pool;
  for (const auto& id : ids) {
    const Dialogue* d = corpus.find(id);
    if (d == nullptr) throw DialogueGenError("unknown exemplar dialogue '" + id + "'");
    for (const auto& inst : build_dialogue_instances(*d, n)) {
      if (inst.pad_count() != 0) continue;
      pool.push_back({inst.da_history, inst.gold, inst.dialogue_history,
                      d->id + "#" + std::to_string(inst.meta.turn_index)});
    }
  }
  if (static_cast<int>(pool.size()) < count) {
    throw DialogueGenError("only " + std::to_string(pool.size()) +
                           " exemplar candidates for a bank of " + std::to_string(count));
  }
  Rng rng(seed);
  rng.shuffle(pool);
  pool.resize(count);
  FewShotBank bank{std::move(pool)};
  bank.validate(count);
  return bank;
}

const DialogueTemplate& default_dialogue_template() {
  static const DialogueTemplate tmpl{
      "You write realistic dialogues between a travel agency operator and a customer.",
      std::string(kDialoguePromptMarker) +
          "\n"
          "Write the dialogue that leads up to the next operator turn.\n"
          "Each operator turn performs the dialogue acts shown in brackets, in the given order.\n"
          "Write one \"Operator:\" line and one \"Customer:\" line per history step, and "
          "nothing else.\n"
          "{style}"
          "\n"
          "### Examples\n"
          "{examples}"
          "\n"
          "{condition}"};
  return tmpl;
}

DialogueTemplate load_dialogue_template(const std::string& path) {
  DialogueTemplate t = default_dialogue_template();
  t.user_template = read_file(path);
  if (t.user_template.find(kDialoguePromptMarker) == std::string::npos) {
    t.user_template = std::string(kDialoguePromptMarker) + "\n" + t.user_template;
  }
  for (std::string_view ph : {"{examples}", "{condition}"}) {
    if (t.user_template.find(ph) == std::string::npos) {
      throw DialogueGenError("dialogue template " + path + " lacks " + std::string(ph));
    }
  }
  return t;
}

std::string render_condition(const DaHistory& history, TagSet gold) {
  return std::string(kHistoryLabel) + history_to_string(history, " | ") + "\n" +
         std::string(kGoldLabel) + gold.to_string() + "\n";
}

std::optional<ParsedCondition> parse_condition(std::string_view prompt_text) {
  auto at = prompt_text.rfind(kConditionHeader);
  if (at == std::string_view::npos) return std::nullopt;
  std::optional<DaHistory> history;
  std::optional<TagSet> gold;
  for (const auto& raw : split_lines(prompt_text.substr(at))) {
    std::string_view line = trim(raw);
    if (line.rfind(kHistoryLabel, 0) == 0) {
      DaHistory h;
      for (const auto& part : split(line.substr(kHistoryLabel.size()), '|')) {
        auto step = parse_step(part);
        if (!step) return std::nullopt;
        h.push_back(*step);
      }
      history = std::move(h);
    } else if (line.rfind(kGoldLabel, 0) == 0) {
      gold = TagSet::parse(trim(line.substr(kGoldLabel.size())));
      if (!gold) return std::nullopt;
    }
  }
  if (!history || !gold) return std::nullopt;
  return ParsedCondition{std::move(*history), *gold};
}

Prompt build_dialogue_prompt(const SpeakerStyleProfile& profile, const HistoryPair& pair,
                             const FewShotBank& bank, const DialogueTemplate& tmpl,
                             const DialoguePromptOptions& options) {
  if (options.require_novel && !pair.novel) {
    throw DialogueGenError("dialogue prompts are built for novel pairs only");
  }
  if (pair.gold.empty() || real_steps(pair.history) == 0) {
    throw DialogueGenError("history pair has no real steps or an empty a_t");
  }
  bank.validate(bank.examples.size() == 0 ? kDefaultFewShotCount : bank.examples.size());
  std::string style;
  if (options.include_style) {
    if (profile.user_style.empty() || profile.operator_style.empty()) {
      throw DialogueGenError("speaker style profile has an empty section");
    }
    style = "\n### Speaker style\n" + render_style_sections(profile);
  }
  std::string examples;
  for (std::size_t i = 0; i < bank.examples.size(); ++i) {
    if (i) examples += '\n';
    examples += render_example(bank.examples[i], static_cast<int>(i) + 1);
  }
  std::string condition = std::string(kConditionHeader) + "\n" +
                          render_condition(pair.history, pair.gold) + "Dialogue:\n";

  Prompt p;
  p.system_text = tmpl.system_text;
  std::string user = tmpl.user_template;
  user = replace_all(user, "{style}", style);
  user = replace_all(user, "{examples}", examples);
  user = replace_all(user, "{condition}", condition);
  p.user_text = std::move(user);
  p.params = options.params;
  if (p.system_text.size() + p.user_text.size() > options.max_input_chars) {
    throw DialogueGenError("dialogue prompt of " + std::to_string(p.user_text.size()) +
                           " chars exceeds the input limit of " +
                           std::to_string(options.max_input_chars));
  }
  return p;
}

std::string_view reject_reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::kNone: return "none";
    case RejectReason::kWrongTurnCount: return "wrong_turn_count";
    case RejectReason::kRoleMisorder: return "role_misorder";
    case RejectReason::kUnparseable: return "unparseable";
    case RejectReason::kTagMismatch: return "tag_mismatch";
  }
  return "none";
}

ParseOutcome parse_generated_dialogue(std::string_view text, const HistoryPair& expected, int n) {
  auto reject = [](RejectReason r, std::string detail) {
    ParseOutcome o;
    o.reason = r;
    o.detail = std::move(detail);
    return o;
  };
  struct Line {
    Role role;
    std::string text;
  };
  std::vector<Line> lines;
  for (const auto& raw : split_lines(text)) {
    std::string_view line = trim(raw);
    while (!line.empty() && line.front() == '*') line.remove_prefix(1);
    if (line.empty()) continue;
    std::optional<Role> role;
    std::size_t skip = 0;
    if (starts_with_ci(line, "operator:")) {
      role = Role::kOperator;
      skip = 9;
    } else if (starts_with_ci(line, "customer:")) {
      role = Role::kCustomer;
      skip = 9;
    }
    if (role) {
      std::string_view body = line.substr(skip);
      while (!body.empty() && body.front() == '*') body.remove_prefix(1);
      lines.push_back({*role, std::string(trim(body))});
    } else if (!lines.empty()) {
      lines.back().text += " " + std::string(line);  // wrapped turn
    }
    // Preamble before the first role line is ignored.
  }
  if (lines.empty()) return reject(RejectReason::kUnparseable, "no Operator:/Customer: lines");

  for (std::size_t i = 0; i < lines.size(); ++i) {
    Role want = i % 2 == 0 ? Role::kOperator : Role::kCustomer;
    if (lines[i].role != want) {
      return reject(RejectReason::kRoleMisorder,
                    "line " + std::to_string(i + 1) + " should be " + std::string(role_name(want)));
    }
  }
  std::vector<HistoryStep> steps;
  for (HistoryStep s : expected.history) {
    if (s != kPadStep) steps.push_back(s);
  }
  const std::size_t want_pairs = std::min<std::size_t>(steps.size(), static_cast<std::size_t>(n));
  if (lines.size() % 2 != 0 || lines.size() / 2 != want_pairs) {
    return reject(RejectReason::kWrongTurnCount,
                  std::to_string(lines.size()) + " turns for " + std::to_string(want_pairs) +
                      " expected pairs");
  }

  ParseOutcome out;
  for (std::size_t i = 0; i < want_pairs; ++i) {
    std::string op = lines[2 * i].text;
    if (!op.empty() && op.front() == '[') {
      auto close = op.find(']');
      if (close == std::string::npos) {
        return reject(RejectReason::kUnparseable, "unterminated tag bracket");
      }
      auto tags = TagSet::parse(trim(std::string_view(op).substr(1, close - 1)));
      if (!tags || *tags != steps[i]) {
        return reject(RejectReason::kTagMismatch,
                      "operator turn " + std::to_string(i + 1) + " is tagged [" +
                          op.substr(1, close - 1) + "], expected " + steps[i].to_string());
      }
      op = std::string(trim(std::string_view(op).substr(close + 1)));
    }
    std::string cu = lines[2 * i + 1].text;
    if (op.empty() || cu.empty()) {
      return reject(RejectReason::kUnparseable, "empty turn text in pair " + std::to_string(i + 1));
    }
    out.pairs.push_back({normalize_space(op), normalize_space(cu)});
  }
  out.accepted = true;
  return out;
}

json AugmentTally::to_json() const {
  return {{"pairs_consumed", pairs_consumed}, {"completions", completions},
          {"accepted", accepted},             {"rejected", rejected},
          {"pairs_skipped", pairs_skipped},   {"rejections_by_reason", rejections_by_reason}};
}

std::string history_pair_id(const HistoryPair& pair) {
  return sha256_hex(json{{"a_t", tags_to_json(pair.gold)},
                         {"history", history_to_json(pair.history)}}
                        .dump())
      .substr(0, 16);
}

AugmentResult augment_until(std::size_t target_count, std::size_t existing_count,
                            const SpeakerStyleProfile& profile,
                            const std::vector<HistoryPair>& novel_pairs, const FewShotBank& bank,
                            LlmGateway& gateway, const AugmentPolicy& policy,
                            const DialogueTemplate& tmpl, const DialoguePromptOptions& options) {
  if (target_count < existing_count) {
    throw std::invalid_argument("target count " + std::to_string(target_count) +
                                " is below the existing " + std::to_string(existing_count));
  }
  if (policy.max_retries < 0 || policy.batch_size == 0) {
    throw std::invalid_argument("invalid augmentation policy");
  }
  const std::size_t need = target_count - existing_count;
  const std::string profile_id = profile.id();
  const int n = bank.examples.empty() ? kDefaultHistoryLength
                                      : static_cast<int>(bank.examples.front().history.size());
  AugmentResult result;
  std::size_t next_pair = 0;

  while (result.instances.size() < need) {
    const std::size_t want = std::min(need - result.instances.size(), policy.batch_size);
    if (next_pair >= novel_pairs.size()) {
      throw DialogueGenError("novel pairs exhausted after " + std::to_string(next_pair) +
                             " pairs with " + std::to_string(result.instances.size()) + " of " +
                             std::to_string(need) + " instances accepted");
    }
    // A window never holds more pairs than instances still needed, so the
    // total is exact and acceptance order is the pair order.
    const std::size_t begin = next_pair;
    const std::size_t end = std::min(novel_pairs.size(), begin + want);
    next_pair = end;
    result.tally.pairs_consumed += end - begin;

    std::vector<Prompt> prompts;
    for (std::size_t i = begin; i < end; ++i) {
      prompts.push_back(build_dialogue_prompt(profile, novel_pairs[i], bank, tmpl, options));
    }
    std::vector<std::optional<AugmentedInstance>> accepted(end - begin);
    std::vector<std::size_t> pending(end - begin);
    for (std::size_t k = 0; k < pending.size(); ++k) pending[k] = k;

    for (int attempt = 0; attempt <= policy.max_retries && !pending.empty(); ++attempt) {
      std::vector<CompletionRequest> requests;
      for (std::size_t k : pending) requests.push_back({prompts[k], attempt});
      auto items = gateway.complete_batch(requests);
      std::vector<std::size_t> still;
      for (std::size_t r = 0; r < items.size(); ++r) {
        if (items[r].error) std::rethrow_exception(items[r].error);
        ++result.tally.completions;
        const std::size_t k = pending[r];
        const HistoryPair& pair = novel_pairs[begin + k];
        ParseOutcome parsed = parse_generated_dialogue(items[r].result.text, pair, n);
        if (!parsed.accepted) {
          ++result.tally.rejected;
          ++result.tally.rejections_by_reason[std::string(reject_reason_name(parsed.reason))];
          still.push_back(k);
          continue;
        }
        AugmentedInstance aug;
        aug.instance.dialogue_history = std::move(parsed.pairs);
        aug.instance.da_history = pair.history;
        aug.instance.gold = pair.gold;
        aug.instance.meta.group = Group::kMinor;
        aug.instance.meta.turn_index = static_cast<int>(2 * aug.instance.dialogue_history.size());
        aug.history_pair_id = history_pair_id(pair);
        aug.instance.meta.dialogue_id = "aug-" + aug.history_pair_id;
        aug.style_profile_id = profile_id;
        aug.cache_key = items[r].result.cache_key;
        aug.attempt = attempt;
        if (auto err = check_instance(aug.instance, static_cast<int>(pair.history.size()))) {
          throw DialogueGenError("augmented instance is invalid: " + *err);
        }
        ++result.tally.accepted;
        accepted[k] = std::move(aug);
      }
      pending = std::move(still);
    }
    result.tally.pairs_skipped += pending.size();
    for (auto& a : accepted) {
      if (a) result.instances.push_back(std::move(*a));
    }
  }
  return result;
}

json augmented_to_json(const AugmentedInstance& inst) {
  json j = instance_to_json(inst.instance);
  j["provenance"] = {{"style_profile_id", inst.style_profile_id},
                     {"history_pair_id", inst.history_pair_id},
                     {"cache_key", inst.cache_key},
                     {"attempt", inst.attempt},
                     {"validation_status", inst.validation_status}};
  return j;
}

AugmentedInstance augmented_from_json(const json& j) {
  AugmentedInstance a;
  a.instance = instance_from_json(j);
  const json& p = j.at("provenance");
  a.style_profile_id = p.at("style_profile_id").get<std::string>();
  a.history_pair_id = p.at("history_pair_id").get<std::string>();
  a.cache_key = p.at("cache_key").get<std::string>();
  a.attempt = p.value("attempt", 0);
  a.validation_status = p.value("validation_status", "accepted");
  return a;
}

std::string augmented_to_string(const std::vector<AugmentedInstance>& instances) {
  std::string out;
  for (const auto& a : instances) {
    out += augmented_to_json(a).dump();
    out += '\n';
  }
  return out;
}

std::vector<AugmentedInstance> load_augmented(const std::string& path) {
  std::vector<AugmentedInstance> out;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(read_file(path))) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(augmented_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw DialogueGenError(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace daaug
