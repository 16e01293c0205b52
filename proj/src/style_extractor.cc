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

#include "daaug/style_extractor.h"

#include <cctype>
#include <set>
#include <sstream>

#include "daaug/util.h"

namespace daaug {
namespace {

using nlohmann::json;

constexpr std::string_view kFormatReminder =
    "\n\nReminder: answer with exactly two sections. The first line is "
    "\"User style:\" followed by one \"- \" bullet per line; then "
    "\"Operator style:\" followed by one \"- \" bullet per line. No other text.";

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

enum class Section { kNone, kUser, kOperator };

// Header detection tolerates markdown decoration ("## User Style", "**...**").
std::optional<Section> header_of(std::string_view line) {
  std::string cleaned;
  for (char c : line) {
    if (c != '#' && c != '*' && c != '_') cleaned += c;
  }
  std::string lower = to_lower(trim(cleaned));
  if (lower.empty() || lower.size() > 60) return std::nullopt;
  bool colon_or_bare = lower.back() == ':' || lower.find(':') == std::string::npos;
  if (!colon_or_bare) return std::nullopt;
  if (lower.rfind("user style", 0) == 0 || lower.rfind("target user", 0) == 0) {
    return Section::kUser;
  }
  if (lower.rfind("operator style", 0) == 0 || lower.rfind("speaker style", 0) == 0) {
    return Section::kOperator;
  }
  return std::nullopt;
}

// Strips a bullet marker ("-", "*", "•", "1.", "2)"); nullopt if none.
std::optional<std::string> bullet_of(std::string_view line) {
  line = trim(line);
  if (line.empty()) return std::nullopt;
  if (line[0] == '-' || line[0] == '*') {
    line.remove_prefix(1);
  } else if (line.rfind("\xe2\x80\xa2", 0) == 0) {  // U+2022
    line.remove_prefix(3);
  } else if (std::isdigit(static_cast<unsigned char>(line[0]))) {
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size() || (line[i] != '.' && line[i] != ')')) return std::nullopt;
    line.remove_prefix(i + 1);
  } else {
    return std::nullopt;
  }
  auto body = trim(line);
  if (body.empty()) return std::nullopt;
  return std::string(body);
}

void add_unique(std::vector<std::string>& out, std::set<std::string>& seen,
                const std::vector<std::string>& bullets) {
  for (const auto& b : bullets) {
    if (seen.insert(normalize_bullet(b)).second) out.push_back(b);
  }
}

}  // namespace

const StyleTemplate& default_style_template() {
  static const StyleTemplate tmpl{
      "You analyse conversations between travel agency operators and their customers.",
      std::string(kStylePromptMarker) +
          "\n"
          "Below are {num_dialogues} dialogues between a travel agency operator and a customer.\n"
          "Half of them are marked TARGET: the customer belongs to the {target_group} group.\n"
          "The others are marked NON-TARGET: the customer belongs to a different group.\n"
          "Compare the two kinds of dialogue and describe\n"
          "  (1) the speaking style of the TARGET customers, and\n"
          "  (2) the speaking style of the operator when talking with TARGET customers.\n"
          "Describe abstract tendencies that steer the conversation, not single words.\n"
          "\n"
          "Answer in this format:\n"
          "User style:\n"
          "- <statement>\n"
          "Operator style:\n"
          "- <statement>\n"
          "\n"
          "{dialogues}"};
  return tmpl;
}

StyleTemplate load_style_template(const std::string& path) {
  StyleTemplate t = default_style_template();
  t.user_template = read_file(path);
  if (t.user_template.find(kStylePromptMarker) == std::string::npos) {
    t.user_template = std::string(kStylePromptMarker) + "\n" + t.user_template;
  }
  return t;
}

std::string render_dialogue_text(const Dialogue& dialogue) {
  std::string out;
  for (const auto& t : dialogue.turns) {
    out += t.role == Role::kOperator ? "Operator: " : "Customer: ";
    out += t.text;
    out += '\n';
  }
  return out;
}

Prompt build_style_prompt(const std::vector<Dialogue>& target,
                          const std::vector<Dialogue>& nontarget,
                          const StyleTemplate& tmpl, const StylePromptOptions& options) {
  if (target.empty() || target.size() != nontarget.size()) {
    throw StyleError("style prompt needs equally many target and non-target dialogues (got " +
                     std::to_string(target.size()) + " + " + std::to_string(nontarget.size()) +
                     ")");
  }
  for (const auto& d : target) {
    if (d.group != options.target_group) {
      throw StyleError("target dialogue '" + d.id + "' is not in the target group");
    }
  }
  for (const auto& d : nontarget) {
    if (d.group == options.target_group) {
      throw StyleError("non-target dialogue '" + d.id + "' is in the target group");
    }
  }
  std::string blocks;
  int index = 0;
  auto add = [&](const Dialogue& d, const char* label) {
    blocks += "[Dialogue " + std::to_string(++index) + ": " + label + "]\n";
    blocks += render_dialogue_text(d);
    blocks += '\n';
  };
  for (const auto& d : target) add(d, "TARGET");
  for (const auto& d : nontarget) add(d, "NON-TARGET");

  Prompt p;
  p.system_text = tmpl.system_text;
  std::string user = tmpl.user_template;
  user = replace_all(user, "{num_dialogues}", std::to_string(index));
  user = replace_all(user, "{target_group}", group_name(options.target_group));
  user = replace_all(user, "{dialogues}", blocks);
  p.user_text = std::move(user);
  p.params = options.params;
  if (p.system_text.size() + p.user_text.size() > options.max_input_chars) {
    throw StyleError("style prompt of " + std::to_string(p.user_text.size()) +
                     " chars exceeds the input limit of " +
                     std::to_string(options.max_input_chars));
  }
  return p;
}

std::vector<StyleRun> extract_styles(LlmGateway& gateway, const Prompt& prompt, int runs) {
  if (runs < 1) throw StyleError("runs must be >= 1");
  std::vector<CompletionRequest> requests;
  for (int i = 0; i < runs; ++i) requests.push_back({prompt, i});
  auto results = gateway.complete_batch(requests);
  std::vector<StyleRun> out;
  for (int i = 0; i < runs; ++i) {
    if (results[i].error) {
      try {
        std::rethrow_exception(results[i].error);
      } catch (const std::exception& e) {
        throw StyleError("style extraction run " + std::to_string(i) + ": " + e.what());
      }
    }
    out.push_back({i, std::move(results[i].result.text), std::move(results[i].result.cache_key)});
  }
  return out;
}

std::optional<ParsedStyles> parse_style_output(std::string_view text) {
  ParsedStyles out;
  Section current = Section::kNone;
  for (const auto& line : split_lines(text)) {
    if (auto h = header_of(line)) {
      current = *h;
      continue;
    }
    if (current == Section::kNone) continue;
    if (auto b = bullet_of(line)) {
      (current == Section::kUser ? out.user_style : out.operator_style).push_back(*b);
    }
  }
  if (out.user_style.empty() || out.operator_style.empty()) return std::nullopt;
  return out;
}

std::vector<StyleRun> extract_parseable_styles(LlmGateway& gateway, const Prompt& prompt,
                                               int runs) {
  auto out = extract_styles(gateway, prompt, runs);
  Prompt strict = prompt;
  strict.user_text += kFormatReminder;
  for (auto& run : out) {
    if (parse_style_output(run.text)) continue;
    CompletionResult retry = gateway.complete(strict, run.attempt);
    if (!parse_style_output(retry.text)) {
      throw StyleError("style extraction run " + std::to_string(run.attempt) +
                       " produced no parseable sections, even after a re-prompt");
    }
    run.text = std::move(retry.text);
    run.cache_key = std::move(retry.cache_key);
  }
  return out;
}

std::string normalize_bullet(std::string_view bullet) {
  std::string s = to_lower(normalize_space(bullet));
  while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == ';')) s.pop_back();
  return s;
}

SpeakerStyleProfile consolidate_styles(const std::vector<StyleRun>& runs,
                                       ConsolidationStrategy strategy,
                                       const std::string& manual_path) {
  if (runs.empty()) throw StyleError("no extraction runs to consolidate");
  SpeakerStyleProfile profile;
  for (const auto& r : runs) profile.cache_keys.push_back(r.cache_key);

  if (strategy == ConsolidationStrategy::kManualFile) {
    if (manual_path.empty()) throw StyleError("manual-file strategy needs a profile path");
    SpeakerStyleProfile manual = load_profile(manual_path);
    profile.user_style = std::move(manual.user_style);
    profile.operator_style = std::move(manual.operator_style);
    profile.strategy = "manual-file";
  } else {
    std::set<std::string> seen_user, seen_op;
    for (const auto& r : runs) {
      auto parsed = parse_style_output(r.text);
      if (!parsed) {
        throw StyleError("run " + std::to_string(r.attempt) + " (" + r.cache_key +
                         ") has no recognizable user/operator style sections");
      }
      add_unique(profile.user_style, seen_user, parsed->user_style);
      add_unique(profile.operator_style, seen_op, parsed->operator_style);
    }
    profile.strategy = "union";
  }
  if (profile.user_style.empty() || profile.operator_style.empty()) {
    throw StyleError("consolidated profile has an empty section");
  }
  return profile;
}

std::string render_style_sections(const SpeakerStyleProfile& profile) {
  std::string out = "User style:\n";
  for (const auto& b : profile.user_style) out += "- " + b + "\n";
  out += "Operator style:\n";
  for (const auto& b : profile.operator_style) out += "- " + b + "\n";
  return out;
}

std::string SpeakerStyleProfile::id() const {
  return sha256_hex(profile_to_json(*this).dump()).substr(0, 16);
}

json profile_to_json(const SpeakerStyleProfile& profile) {
  json prov = json::array();
  prov.push_back("strategy:" + profile.strategy);
  for (const auto& k : profile.cache_keys) prov.push_back("cache_key:" + k);
  return {{"user_style", profile.user_style},
          {"operator_style", profile.operator_style},
          {"provenance", std::move(prov)}};
}

SpeakerStyleProfile profile_from_json(const json& j) {
  SpeakerStyleProfile p;
  p.user_style = j.at("user_style").get<std::vector<std::string>>();
  p.operator_style = j.at("operator_style").get<std::vector<std::string>>();
  for (const auto& entry : j.value("provenance", json::array())) {
    auto s = entry.get<std::string>();
    if (s.rfind("strategy:", 0) == 0) p.strategy = s.substr(9);
    else if (s.rfind("cache_key:", 0) == 0) p.cache_keys.push_back(s.substr(10));
  }
  return p;
}

SpeakerStyleProfile load_profile(const std::string& path) {
  try {
    return profile_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw StyleError("profile " + path + ": " + e.what());
  }
}

}  // namespace daaug
