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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <tuple>

#include "daaug/history_generator.h"

namespace daaug {
namespace {

using nlohmann::json;

// Context values: a history step is its tag bits (PAD is 0); a_t carries a
// flag so it never collides with a step holding the same tags.
constexpr std::uint32_t kGoldFlag = 1u << 30;
constexpr std::uint32_t kBos = 1u << 31;
constexpr std::uint32_t kUnknownBits = 0xFFFFFFFFu;
constexpr int kUnknownId = 0;
constexpr int kPadId = 1;
constexpr int kFormatVersion = 1;

void check_condition(const HistoryCondition& c) {
  if (c.gold.empty()) throw HistoryModelError("condition a_t is empty");
  if (c.gold.contains(DaTag::kNone)) throw HistoryModelError("condition a_t contains None");
}

}  // namespace

// --- Featurizer --------------------------------------------------------------

std::uint32_t UtteranceFeaturizer::feature_of(std::string_view utterance) const {
  std::istringstream words{std::string(utterance)};
  int count = 0;
  for (std::string w; words >> w;) ++count;
  std::uint32_t bucket = 0;
  for (int bound : length_bounds) {
    if (count > bound) ++bucket;
  }
  std::string lower = to_lower(utterance);
  std::uint32_t mask = 0;
  for (std::size_t i = 0; i < keyword_classes.size(); ++i) {
    for (const auto& kw : keyword_classes[i].second) {
      if (lower.find(kw) != std::string::npos) {
        mask |= 1u << i;
        break;
      }
    }
  }
  return bucket + static_cast<std::uint32_t>(length_bounds.size() + 1) * mask;
}

json UtteranceFeaturizer::to_json() const {
  json classes = json::array();
  for (const auto& [name, kws] : keyword_classes) {
    classes.push_back({{"name", name}, {"keywords", kws}});
  }
  return {{"length_bounds", length_bounds}, {"keyword_classes", std::move(classes)}};
}

UtteranceFeaturizer UtteranceFeaturizer::from_json(const json& j) {
  UtteranceFeaturizer f;
  f.length_bounds = j.at("length_bounds").get<std::vector<int>>();
  for (const auto& c : j.at("keyword_classes")) {
    f.keyword_classes.emplace_back(c.at("name").get<std::string>(),
                                   c.at("keywords").get<std::vector<std::string>>());
  }
  return f;
}

UtteranceFeaturizer default_featurizer() {
  UtteranceFeaturizer f;
  f.keyword_classes = {
      {"question", {"?"}},
      {"confirm", {"right?", "correct", "don't you", "is that"}},
      {"search", {"look for", "search", "found", "result"}},
      {"screen", {"screen", "this site", "these"}},
  };
  return f;
}

std::string_view phase_name(ModelPhase phase) {
  switch (phase) {
    case ModelPhase::kUntrained: return "untrained";
    case ModelPhase::kPhase1: return "phase1";
    case ModelPhase::kPhase2: return "phase2";
  }
  return "untrained";
}

void SamplingParams::validate() const {
  if (k_samples < 1) throw std::invalid_argument("k_samples must be >= 1");
  if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw std::invalid_argument("top_p must lie in (0, 1]");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("temperature must be finite and >= 0");
  }
}

// --- Model -------------------------------------------------------------------

std::size_t HistorySequenceModel::ContextHash::operator()(const Context& c) const noexcept {
  return mix64((static_cast<std::uint64_t>(c.c1) << 32 | c.c2) ^ mix64(c.feature));
}

void HistorySequenceModel::CountTable::add(int token, double amount) {
  for (auto& [t, c] : counts) {
    if (t == token) {
      c += amount;
      total += amount;
      return;
    }
  }
  counts.emplace_back(token, amount);
  total += amount;
}

HistorySequenceModel::HistorySequenceModel(int n, UtteranceFeaturizer featurizer)
    : n_(n), featurizer_(std::move(featurizer)) {
  if (n < 1) throw std::invalid_argument("history length must be >= 1");
  vocab_ = {kUnknownBits};
  intern(kPadStep);
}

std::vector<HistoryStep> HistorySequenceModel::vocabulary() const {
  std::vector<HistoryStep> out;
  for (std::size_t i = 1; i < vocab_.size(); ++i) out.push_back(TagSet::from_bits(vocab_[i]));
  return out;
}

int HistorySequenceModel::token_id(HistoryStep step) const {
  auto it = token_index_.find(step.bits());
  return it == token_index_.end() ? kUnknownId : it->second;
}

int HistorySequenceModel::intern(HistoryStep step) {
  auto [it, inserted] = token_index_.emplace(step.bits(), static_cast<int>(vocab_.size()));
  if (inserted) vocab_.push_back(step.bits());
  return it->second;
}

HistorySequenceModel::Context HistorySequenceModel::level_context(int level,
                                                                  const Context& full) {
  switch (level) {
    case 0: return {};
    case 1: return {full.c1, 0, 0};
    case 2: return {full.c1, full.c2, 0};
    default: return full;
  }
}

HistorySequenceModel::Context HistorySequenceModel::step_context(
    const HistoryCondition& condition, std::uint32_t feature, const DaHistory& generated) const {
  const std::uint32_t gold = condition.gold.bits() | kGoldFlag;
  std::size_t j = generated.size();
  Context ctx;
  ctx.c1 = j == 0 ? gold : generated[j - 1].bits();
  ctx.c2 = j == 0 ? kBos : j == 1 ? gold : generated[j - 2].bits();
  ctx.feature = feature;
  return ctx;
}

void HistorySequenceModel::count_examples(std::span<const HistoryGenExample> examples,
                                          std::array<Level, kLevels>& levels, double weight) {
  for (const auto& ex : examples) {
    check_condition(ex.condition);
    if (static_cast<int>(ex.target.size()) != n_) {
      throw HistoryModelError("target history of " + ex.condition.source_id + " has " +
                              std::to_string(ex.target.size()) + " steps, expected " +
                              std::to_string(n_));
    }
    std::uint32_t feature = featurizer_.feature_of(ex.condition.utterance);
    DaHistory generated;
    for (int j = 0; j < n_; ++j) {
      HistoryStep x = ex.target[n_ - 1 - j];
      bool after_pad = j > 0 && generated.back() == kPadStep;
      if ((j == 0 && x == kPadStep) || (after_pad && x != kPadStep)) {
        throw HistoryModelError("target history of " + ex.condition.source_id +
                                " is not a PAD prefix followed by real steps");
      }
      if (!after_pad) {
        Context full = step_context(ex.condition, feature, generated);
        int id = intern(x);
        for (int l = 0; l < kLevels; ++l) levels[l][level_context(l, full)].add(id, weight);
      }
      generated.push_back(x);
    }
  }
}

std::vector<double> HistorySequenceModel::next_distribution(const Context& ctx, std::size_t step,
                                                            bool allow_unknown) const {
  const std::size_t v = vocab_.size();
  std::vector<double> p(v, 0.0);
  // Once a PAD is emitted everything further back is PAD.
  if (step > 0 && ctx.c1 == kPadStep.bits()) {
    p[kPadId] = 1.0;
    return p;
  }
  std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(v));
  std::vector<double> next(v);
  for (int l = 0; l < kLevels; ++l) {
    auto it = levels_[l].find(level_context(l, ctx));
    if (it == levels_[l].end() || it->second.total <= 0.0) {
      if (phase_ == ModelPhase::kPhase2) adapt(l, ctx, p);
      continue;
    }
    const CountTable& table = it->second;
    double types = static_cast<double>(table.counts.size());
    double denom = table.total + types;
    for (std::size_t x = 0; x < v; ++x) next[x] = types * p[x];
    for (const auto& [t, c] : table.counts) next[t] += c;
    for (std::size_t x = 0; x < v; ++x) p[x] = next[x] / denom;
    if (phase_ == ModelPhase::kPhase2) adapt(l, ctx, p);
  }
  if (phase_ == ModelPhase::kPhase2) {
    for (std::size_t x = 0; x < v; ++x) p[x] *= unigram_ratio_[x];
  }
  if (step == 0) p[kPadId] = 0.0;
  if (!allow_unknown) p[kUnknownId] = 0.0;
  double z = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= z;
  return p;
}

// Posterior mean under a Dirichlet prior centred on the phase-1 estimate:
// (scale * target_count + strength * p) / (scale * target_total + strength).
// Posterior mean under a Dirichlet prior centred on the phase-1 estimate p,
// with prior_strength pseudo-counts per type the phase-1 context has seen.
void HistorySequenceModel::adapt(int level, const Context& ctx, std::vector<double>& p) const {
  auto it = target_levels_[level].find(level_context(level, ctx));
  if (it == target_levels_[level].end() || it->second.total <= 0.0) return;
  const CountTable& table = it->second;
  auto base = levels_[level].find(level_context(level, ctx));
  double types = base == levels_[level].end() ? 1.0 : static_cast<double>(base->second.counts.size());
  const double strength = prior_strength_ * types;
  const double denom = target_scale_ * table.total + strength;
  for (double& x : p) x *= strength / denom;
  for (const auto& [t, c] : table.counts) p[t] += target_scale_ * c / denom;
}

// Phase-2 marginal shift: (adapted unigram / phase-1 unigram)^exponent.
void HistorySequenceModel::compute_unigram_ratio() {
  const std::size_t v = vocab_.size();
  std::vector<double> p1(v, 1.0 / static_cast<double>(v));
  auto it = levels_[0].find(Context{});
  if (it != levels_[0].end() && it->second.total > 0.0) {
    const CountTable& t = it->second;
    double types = static_cast<double>(t.counts.size());
    for (double& x : p1) x *= types / (t.total + types);
    for (const auto& [tok, c] : t.counts) p1[tok] += c / (t.total + types);
  }
  std::vector<double> q = p1;
  adapt(0, Context{}, q);
  unigram_ratio_.resize(v);
  for (std::size_t x = 0; x < v; ++x) unigram_ratio_[x] = std::pow(q[x] / p1[x], marginal_exponent_);
}

void HistorySequenceModel::require_trained() const {
  if (phase_ == ModelPhase::kUntrained) throw HistoryModelError("model is untrained");
}

void HistorySequenceModel::train_phase1(std::span<const HistoryGenExample> examples,
                                        const HistoryTrainingHyper& hyper) {
  if (phase_ != ModelPhase::kUntrained) {
    throw HistoryModelError("phase-1 training needs an untrained model, found " +
                            std::string(phase_name(phase_)));
  }
  if (examples.empty()) throw HistoryModelError("phase-1 training set is empty");
  if (!(hyper.learning_rate > 0.0)) throw HistoryModelError("learning rate must be positive");
  std::array<Level, kLevels> levels;
  count_examples(examples, levels, 1.0);
  levels_ = std::move(levels);
  phase1_learning_rate_ = hyper.learning_rate;
  phase_ = ModelPhase::kPhase1;
  double ll = mean_log_likelihood(examples);
  if (!std::isfinite(ll)) throw HistoryModelError("phase-1 objective is not finite");
}

void HistorySequenceModel::train_phase2(std::span<const HistoryGenExample> target_examples,
                                        const HistoryTrainingHyper& hyper) {
  if (phase_ != ModelPhase::kPhase1) {
    throw HistoryModelError("phase-2 training needs a phase-1 model, found " +
                            std::string(phase_name(phase_)));
  }
  if (target_examples.empty()) throw HistoryModelError("phase-2 training set is empty");
  if (!(hyper.learning_rate > 0.0)) throw HistoryModelError("learning rate must be positive");
  if (!(hyper.prior_strength > 0.0)) throw HistoryModelError("prior strength must be positive");
  if (!(hyper.marginal_exponent >= 0.0)) throw HistoryModelError("marginal exponent must be >= 0");

  std::array<Level, kLevels> target;
  count_examples(target_examples, target, 1.0);
  target_levels_ = std::move(target);
  prior_strength_ = hyper.prior_strength;
  target_scale_ = hyper.learning_rate / phase1_learning_rate_;
  marginal_exponent_ = hyper.marginal_exponent;
  compute_unigram_ratio();
  phase_ = ModelPhase::kPhase2;
  double ll = mean_log_likelihood(target_examples);
  if (!std::isfinite(ll)) throw HistoryModelError("phase-2 objective is not finite");
}

double HistorySequenceModel::log_likelihood(const HistoryGenExample& example) const {
  require_trained();
  check_condition(example.condition);
  if (static_cast<int>(example.target.size()) != n_) {
    throw HistoryModelError("history length mismatch in log_likelihood");
  }
  std::uint32_t feature = featurizer_.feature_of(example.condition.utterance);
  DaHistory generated;
  double ll = 0.0;
  for (int j = 0; j < n_; ++j) {
    HistoryStep x = example.target[n_ - 1 - j];
    auto p = next_distribution(step_context(example.condition, feature, generated), j, true);
    ll += std::log(p[token_id(x)]);
    generated.push_back(x);
  }
  return ll;
}

double HistorySequenceModel::mean_log_likelihood(
    std::span<const HistoryGenExample> examples) const {
  if (examples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& ex : examples) sum += log_likelihood(ex);
  return sum / static_cast<double>(examples.size());
}

namespace {

// Temperature, then top-k, then nucleus truncation; returns a token id.
int pick_token(const std::vector<double>& p, const SamplingParams& params, Rng& rng) {
  std::vector<std::pair<double, int>> cand;  // (log weight, id)
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) cand.emplace_back(std::log(p[i]) / params.temperature, static_cast<int>(i));
  }
  std::stable_sort(cand.begin(), cand.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  if (static_cast<int>(cand.size()) > params.top_k) cand.resize(params.top_k);
  double top = cand.front().first;
  std::vector<double> w;
  double z = 0.0;
  for (const auto& c : cand) {
    w.push_back(std::exp(c.first - top));
    z += w.back();
  }
  double cum = 0.0;
  std::size_t keep = 0;
  while (keep < w.size()) {
    cum += w[keep] / z;
    ++keep;
    if (cum >= params.top_p) break;
  }
  w.resize(keep);
  return cand[rng.categorical(w)].second;
}

int argmax_token(const std::vector<double>& p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

}  // namespace

DaHistory HistorySequenceModel::decode(const HistoryCondition& condition,
                                       const SamplingParams* params, Rng* rng) const {
  std::uint32_t feature = featurizer_.feature_of(condition.utterance);
  DaHistory generated;
  for (int j = 0; j < n_; ++j) {
    auto p = next_distribution(step_context(condition, feature, generated), j, false);
    int id = params == nullptr || params->temperature == 0.0 ? argmax_token(p)
                                                            : pick_token(p, *params, *rng);
    generated.push_back(TagSet::from_bits(vocab_[id]));
  }
  std::reverse(generated.begin(), generated.end());
  return generated;
}

std::vector<DaHistory> HistorySequenceModel::sample(const HistoryCondition& condition,
                                                    const SamplingParams& params,
                                                    std::uint64_t stream) const {
  params.validate();
  require_trained();
  check_condition(condition);
  Rng rng(mix64(params.seed) ^ stream);
  std::vector<DaHistory> out;
  for (int k = 0; k < params.k_samples; ++k) out.push_back(decode(condition, &params, &rng));
  return out;
}

DaHistory HistorySequenceModel::greedy(const HistoryCondition& condition) const {
  require_trained();
  check_condition(condition);
  return decode(condition, nullptr, nullptr);
}

// --- Checkpoint --------------------------------------------------------------

nlohmann::json HistorySequenceModel::levels_to_json(const std::array<Level, kLevels>& levels) {
  json out = json::array();
  for (const auto& level : levels) {
    std::vector<std::pair<Context, const CountTable*>> rows;
    for (const auto& [ctx, table] : level) rows.emplace_back(ctx, &table);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return std::tie(a.first.c1, a.first.c2, a.first.feature) <
             std::tie(b.first.c1, b.first.c2, b.first.feature);
    });
    json arr = json::array();
    for (const auto& [ctx, table] : rows) {
      auto counts = table->counts;
      std::sort(counts.begin(), counts.end());
      json cs = json::array();
      for (const auto& [t, c] : counts) cs.push_back({t, c});
      arr.push_back({ctx.c1, ctx.c2, ctx.feature, std::move(cs)});
    }
    out.push_back(std::move(arr));
  }
  return out;
}

void HistorySequenceModel::levels_from_json(const nlohmann::json& j, std::size_t vocab_size,
                                            std::array<Level, kLevels>& levels) {
  if (j.size() != kLevels) throw HistoryModelError("wrong number of count levels");
  for (int l = 0; l < kLevels; ++l) {
    for (const auto& row : j[l]) {
      Context ctx{row.at(0).get<std::uint32_t>(), row.at(1).get<std::uint32_t>(),
                  row.at(2).get<std::uint32_t>()};
      CountTable& table = levels[l][ctx];
      for (const auto& tc : row.at(3)) {
        int t = tc.at(0).get<int>();
        if (t < 0 || t >= static_cast<int>(vocab_size)) {
          throw HistoryModelError("count refers to unknown token");
        }
        table.add(t, tc.at(1).get<double>());
      }
    }
  }
}

std::string HistorySequenceModel::serialize() const {
  json vocab = json::array();
  for (std::size_t i = 1; i < vocab_.size(); ++i) {
    vocab.push_back(step_to_string(TagSet::from_bits(vocab_[i])));
  }
  json j = {{"format", "daaug-history-model"},
            {"version", kFormatVersion},
            {"phase", phase_name(phase_)},
            {"n", n_},
            {"phase1_learning_rate", phase1_learning_rate_},
            {"prior_strength", prior_strength_},
            {"target_scale", target_scale_},
            {"marginal_exponent", marginal_exponent_},
            {"featurizer", featurizer_.to_json()},
            {"vocab", std::move(vocab)},
            {"levels", levels_to_json(levels_)},
            {"target_levels", levels_to_json(target_levels_)}};
  return j.dump();
}

HistorySequenceModel HistorySequenceModel::deserialize(std::string_view blob) {
  try {
    json j = json::parse(blob);
    if (j.at("format") != "daaug-history-model" || j.at("version") != kFormatVersion) {
      throw HistoryModelError("unsupported checkpoint format");
    }
    HistorySequenceModel m(j.at("n").get<int>(),
                           UtteranceFeaturizer::from_json(j.at("featurizer")));
    std::string phase = j.at("phase").get<std::string>();
    if (phase == "phase1") m.phase_ = ModelPhase::kPhase1;
    else if (phase == "phase2") m.phase_ = ModelPhase::kPhase2;
    else if (phase == "untrained") m.phase_ = ModelPhase::kUntrained;
    else throw HistoryModelError("unknown phase '" + phase + "'");
    m.phase1_learning_rate_ = j.at("phase1_learning_rate").get<double>();
    m.prior_strength_ = j.at("prior_strength").get<double>();
    m.target_scale_ = j.at("target_scale").get<double>();
    m.vocab_ = {kUnknownBits};
    m.token_index_.clear();
    for (const auto& s : j.at("vocab")) {
      std::string name = s.get<std::string>();
      auto step = name == kPadToken ? std::optional<TagSet>(kPadStep) : TagSet::parse(name);
      if (!step) throw HistoryModelError("bad vocabulary entry '" + name + "'");
      m.intern(*step);
    }
    levels_from_json(j.at("levels"), m.vocab_.size(), m.levels_);
    levels_from_json(j.at("target_levels"), m.vocab_.size(), m.target_levels_);
    m.marginal_exponent_ = j.at("marginal_exponent").get<double>();
    if (m.phase_ == ModelPhase::kPhase2) m.compute_unigram_ratio();
    return m;
  } catch (const json::exception& e) {
    throw HistoryModelError(std::string("corrupt checkpoint: ") + e.what());
  }
}

std::string HistorySequenceModel::digest() const { return sha256_hex(serialize()); }

}  // namespace daaug
