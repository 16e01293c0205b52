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

#include "daaug/predictor.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <numeric>

#include "daaug/metrics.h"
#include "daaug/util.h"

namespace daaug {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "DAAUGPM1";

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Lowercased words, "?"/"!" and bracketed markers such as "[op]".
std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == '[') {
      auto close = text.find(']', i);
      if (close != std::string_view::npos && close - i <= 8) {
        flush();
        out.push_back(to_lower(text.substr(i, close - i + 1)));
        i = close;
        continue;
      }
    }
    if (std::isalnum(c) || c == '\'' || c >= 0x80) {
      cur += static_cast<char>(std::tolower(c));
    } else {
      flush();
      if (c == '?' || c == '!') out.emplace_back(1, static_cast<char>(c));
    }
  }
  flush();
  return out;
}

std::uint32_t hash_feature(std::string_view prefix, std::string_view body) {
  return static_cast<std::uint32_t>(fnv1a64(body, fnv1a64(prefix)) &
                                    (PredictorModel::kDims - 1));
}

void add_ngrams(std::vector<std::uint32_t>& out, std::string_view prefix,
                const std::vector<std::string>& toks) {
  std::string uni = std::string(prefix) + "u:";
  std::string bi = std::string(prefix) + "b:";
  for (std::size_t i = 0; i < toks.size(); ++i) {
    out.push_back(hash_feature(uni, toks[i]));
    if (i + 1 < toks.size()) out.push_back(hash_feature(bi, toks[i] + " " + toks[i + 1]));
  }
}

double exact_rate(const PredictorModel& m, std::span<const PredictionInstance> data) {
  std::size_t hits = 0;
  for (const auto& inst : data) hits += exact_match(m.predict(inst), inst.gold);
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

void check_provenance(std::span<const PredictionInstance> data,
                      const std::set<std::string>& forbidden, const char* what) {
  if (forbidden.empty()) return;
  for (const auto& inst : data) {
    if (forbidden.count(inst.meta.dialogue_id)) {
      throw PredictorError(std::string(what) + " set contains held-out test dialogue '" +
                           inst.meta.dialogue_id + "'");
    }
  }
}

}  // namespace

std::string linearize_instance(const PredictionInstance& instance) {
  std::string out;
  const int pads = instance.pad_count();
  for (std::size_t i = 0; i < instance.da_history.size(); ++i) {
    if (i) out += ' ';
    if (static_cast<int>(i) < pads) {
      out += "[PAD]";
      continue;
    }
    const TurnPair& p = instance.dialogue_history[i - pads];
    out += "[OP] " + p.operator_text + " [DA] " + instance.da_history[i].to_string() + " [CU] " +
           p.customer_text;
  }
  return out;
}

void Hyperparams::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) {
    throw std::invalid_argument("warmup_ratio must lie in [0, 1)");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be finite and >= 0");
  }
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
}

json Hyperparams::to_json() const {
  return {{"batch_size", batch_size}, {"warmup_ratio", warmup_ratio},
          {"learning_rate", learning_rate}, {"epochs", epochs},
          {"patience", patience}, {"threshold", threshold}};
}

Hyperparams Hyperparams::from_json(const json& j) {
  Hyperparams h;
  h.batch_size = j.value("batch_size", h.batch_size);
  h.warmup_ratio = j.value("warmup_ratio", h.warmup_ratio);
  h.learning_rate = j.value("learning_rate", h.learning_rate);
  h.epochs = j.value("epochs", h.epochs);
  h.patience = j.value("patience", h.patience);
  h.threshold = j.value("threshold", h.threshold);
  return h;
}

TagSet decode_scores(std::span<const double> scores, double threshold) {
  if (scores.size() != static_cast<std::size_t>(kNumOperatorTags)) {
    throw std::invalid_argument("expected one score per operator tag");
  }
  TagSet out;
  std::size_t best = 0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] >= threshold) out.insert(tag_at(static_cast<int>(j)));
    if (scores[j] > scores[best]) best = j;
  }
  if (out.empty()) out.insert(tag_at(static_cast<int>(best)));
  return out;
}

std::vector<std::uint32_t> instance_features(const PredictionInstance& instance) {
  std::vector<std::uint32_t> f;
  add_ngrams(f, "", tokenize(linearize_instance(instance)));
  if (!instance.dialogue_history.empty()) {
    const TurnPair& last = instance.dialogue_history.back();
    add_ngrams(f, "lc", tokenize(last.customer_text));
    add_ngrams(f, "lo", tokenize(last.operator_text));
  }
  // History tags by distance from the current turn (1 = most recent).
  const std::size_t n = instance.da_history.size();
  for (std::size_t k = 1; k <= n; ++k) {
    HistoryStep step = instance.da_history[n - k];
    std::string pos = "h" + std::to_string(k);
    f.push_back(hash_feature(pos + "=", step_to_string(step)));
    for (DaTag t : step.tags()) f.push_back(hash_feature(pos + "t=", tag_name(t)));
  }
  if (n >= 2) {
    f.push_back(hash_feature("h12=", step_to_string(instance.da_history[n - 1]) + "|" +
                                         step_to_string(instance.da_history[n - 2])));
  }
  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end()), f.end());
  return f;
}

PredictorModel::PredictorModel()
    : version_(kLinearizationVersion), weights_(kDims * kNumOperatorTags, 0.0) {}

std::array<double, kNumOperatorTags> PredictorModel::scores(
    const PredictionInstance& instance) const {
  if (version_ != kLinearizationVersion) {
    throw PredictorError("model uses linearization '" + version_ + "', expected '" +
                         std::string(kLinearizationVersion) + "'");
  }
  auto feats = instance_features(instance);
  const double scale = feats.empty() ? 0.0 : 1.0 / std::sqrt(static_cast<double>(feats.size()));
  std::array<double, kNumOperatorTags> z = bias_;
  for (std::uint32_t f : feats) {
    const double* w = &weights_[static_cast<std::size_t>(f) * kNumOperatorTags];
    for (int j = 0; j < kNumOperatorTags; ++j) z[j] += w[j] * scale;
  }
  for (double& v : z) v = sigmoid(v);
  return z;
}

TagSet PredictorModel::predict(const PredictionInstance& instance) const {
  auto s = scores(instance);
  return decode_scores(s, hyper_.threshold);
}

PredictorModel train_predictor(std::span<const PredictionInstance> train,
                               std::span<const PredictionInstance> valid,
                               const Hyperparams& hyper, std::uint64_t seed,
                               const std::set<std::string>& forbidden_dialogues,
                               std::string setting) {
  hyper.validate();
  if (train.empty()) throw PredictorError("training set is empty");
  if (valid.empty()) throw PredictorError("validation set is empty");
  check_provenance(train, forbidden_dialogues, "training");
  check_provenance(valid, forbidden_dialogues, "validation");

  const std::size_t n = train.size();
  std::vector<std::vector<std::uint32_t>> feats(n);
  std::vector<double> scale(n);
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (train[i].gold.empty() || train[i].gold.contains(DaTag::kNone)) {
      throw PredictorError("training gold must be a non-empty None-free tag set");
    }
    feats[i] = instance_features(train[i]);
    scale[i] = feats[i].empty() ? 0.0 : 1.0 / std::sqrt(static_cast<double>(feats[i].size()));
    labels[i] = train[i].gold.bits();
  }

  PredictorModel model;
  model.hyper_ = hyper;
  model.meta_.setting = std::move(setting);
  model.meta_.seed = seed;
  PredictorModel best = model;
  double best_exact = -1.0;
  int since_best = 0;

  const std::size_t bsz = static_cast<std::size_t>(hyper.batch_size);
  const std::size_t steps_per_epoch = (n + bsz - 1) / bsz;
  const double total_steps = static_cast<double>(steps_per_epoch * hyper.epochs);
  const double warm = std::round(hyper.warmup_ratio * total_steps);
  std::size_t step = 0;

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::array<double, kNumOperatorTags>> resid(bsz);

  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    rng.shuffle(order);
    double loss = 0.0;
    for (std::size_t start = 0; start < n; start += bsz, ++step) {
      const std::size_t end = std::min(n, start + bsz);
      const double t = static_cast<double>(step);
      double lr = hyper.learning_rate;
      if (t < warm) lr *= (t + 1.0) / warm;
      else lr *= std::max(0.0, (total_steps - t) / (total_steps - warm));
      // Gradients are taken at the pre-batch weights (true minibatch step).
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        std::array<double, kNumOperatorTags> z = model.bias_;
        for (std::uint32_t f : feats[i]) {
          const double* w = &model.weights_[static_cast<std::size_t>(f) * kNumOperatorTags];
          for (int j = 0; j < kNumOperatorTags; ++j) z[j] += w[j] * scale[i];
        }
        for (int j = 0; j < kNumOperatorTags; ++j) {
          const double y = (labels[i] >> j) & 1u;
          const double p = sigmoid(z[j]);
          loss -= y * std::log(std::max(p, 1e-300)) + (1 - y) * std::log(std::max(1 - p, 1e-300));
          resid[b - start][j] = p - y;
        }
      }
      const double step_size = lr / static_cast<double>(end - start);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        const auto& r = resid[b - start];
        for (std::uint32_t f : feats[i]) {
          double* w = &model.weights_[static_cast<std::size_t>(f) * kNumOperatorTags];
          for (int j = 0; j < kNumOperatorTags; ++j) w[j] -= step_size * r[j] * scale[i];
        }
        for (int j = 0; j < kNumOperatorTags; ++j) model.bias_[j] -= step_size * r[j];
      }
    }
    if (!std::isfinite(loss)) {
      throw PredictorError("training diverged (non-finite loss) in epoch " + std::to_string(epoch));
    }
    const double exact = exact_rate(model, valid);
    model.meta_.valid_exact_per_epoch.push_back(exact);
    model.meta_.epochs_run = epoch;
    if (exact > best_exact) {
      best_exact = exact;
      best.weights_ = model.weights_;
      best.bias_ = model.bias_;
      best.meta_.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= hyper.patience) {
      break;
    }
  }
  best.meta_.epochs_run = model.meta_.epochs_run;
  best.meta_.valid_exact_per_epoch = model.meta_.valid_exact_per_epoch;
  best.meta_.best_valid_exact = best_exact;
  return best;
}

std::string PredictorModel::serialize() const {
  json meta = {{"linearization", version_},
               {"hash_bits", kHashBits},
               {"tags", kNumOperatorTags},
               {"hyper", hyper_.to_json()},
               {"setting", meta_.setting},
               {"seed", meta_.seed},
               {"best_epoch", meta_.best_epoch},
               {"epochs_run", meta_.epochs_run},
               {"best_valid_exact", meta_.best_valid_exact},
               {"valid_exact_per_epoch", meta_.valid_exact_per_epoch}};
  std::string header = meta.dump();
  std::string out(kMagic);
  auto put = [&out](const void* p, std::size_t len) {
    out.append(static_cast<const char*>(p), len);
  };
  std::uint64_t hlen = header.size();
  put(&hlen, sizeof hlen);
  out += header;
  put(bias_.data(), sizeof(double) * kNumOperatorTags);
  // Only feature rows that received any update are stored.
  std::vector<std::uint32_t> rows;
  for (std::uint32_t f = 0; f < kDims; ++f) {
    const double* w = &weights_[static_cast<std::size_t>(f) * kNumOperatorTags];
    if (std::any_of(w, w + kNumOperatorTags, [](double v) { return v != 0.0; })) rows.push_back(f);
  }
  std::uint64_t count = rows.size();
  put(&count, sizeof count);
  for (std::uint32_t f : rows) {
    put(&f, sizeof f);
    put(&weights_[static_cast<std::size_t>(f) * kNumOperatorTags], sizeof(double) * kNumOperatorTags);
  }
  return out;
}

PredictorModel PredictorModel::deserialize(std::string_view blob) {
  std::size_t pos = 0;
  auto take = [&](void* dst, std::size_t len) {
    if (pos + len > blob.size()) throw PredictorError("truncated predictor model");
    std::memcpy(dst, blob.data() + pos, len);
    pos += len;
  };
  if (blob.substr(0, kMagic.size()) != kMagic) throw PredictorError("not a predictor model file");
  pos = kMagic.size();
  std::uint64_t hlen = 0;
  take(&hlen, sizeof hlen);
  if (pos + hlen > blob.size()) throw PredictorError("truncated predictor model");
  json meta;
  try {
    meta = json::parse(blob.substr(pos, hlen));
  } catch (const json::exception& e) {
    throw PredictorError(std::string("corrupt model header: ") + e.what());
  }
  pos += hlen;
  PredictorModel m;
  m.version_ = meta.at("linearization").get<std::string>();
  if (m.version_ != kLinearizationVersion) {
    throw PredictorError("model uses linearization '" + m.version_ + "', expected '" +
                         std::string(kLinearizationVersion) + "'");
  }
  if (meta.at("hash_bits").get<int>() != kHashBits || meta.at("tags").get<int>() != kNumOperatorTags) {
    throw PredictorError("model dimensions do not match this build");
  }
  m.hyper_ = Hyperparams::from_json(meta.at("hyper"));
  m.meta_.setting = meta.value("setting", "");
  m.meta_.seed = meta.value("seed", std::uint64_t{0});
  m.meta_.best_epoch = meta.value("best_epoch", 0);
  m.meta_.epochs_run = meta.value("epochs_run", 0);
  m.meta_.best_valid_exact = meta.value("best_valid_exact", 0.0);
  m.meta_.valid_exact_per_epoch = meta.value("valid_exact_per_epoch", std::vector<double>{});
  take(m.bias_.data(), sizeof(double) * kNumOperatorTags);
  std::uint64_t count = 0;
  take(&count, sizeof count);
  for (std::uint64_t r = 0; r < count; ++r) {
    std::uint32_t f = 0;
    take(&f, sizeof f);
    if (f >= kDims) throw PredictorError("feature row out of range");
    take(&m.weights_[static_cast<std::size_t>(f) * kNumOperatorTags],
         sizeof(double) * kNumOperatorTags);
  }
  if (pos != blob.size()) throw PredictorError("trailing bytes in predictor model");
  return m;
}

std::vector<Hyperparams> HyperGrid::expand() const {
  std::vector<Hyperparams> out;
  for (int b : batch_sizes) {
    for (double w : warmup_ratios) {
      for (double lr : learning_rates) {
        for (double tau : thresholds) {
          Hyperparams h;
          h.batch_size = b;
          h.warmup_ratio = w;
          h.learning_rate = lr;
          h.threshold = tau;
          h.epochs = epochs;
          h.patience = patience;
          out.push_back(h);
        }
      }
    }
  }
  return out;
}

json HyperGrid::to_json() const {
  return {{"batch_sizes", batch_sizes}, {"warmup_ratios", warmup_ratios},
          {"learning_rates", learning_rates}, {"thresholds", thresholds},
          {"epochs", epochs}, {"patience", patience}};
}

HyperGrid HyperGrid::from_json(const json& j) {
  HyperGrid g;
  g.batch_sizes = j.value("batch_sizes", g.batch_sizes);
  g.warmup_ratios = j.value("warmup_ratios", g.warmup_ratios);
  g.learning_rates = j.value("learning_rates", g.learning_rates);
  g.thresholds = j.value("thresholds", g.thresholds);
  g.epochs = j.value("epochs", g.epochs);
  g.patience = j.value("patience", g.patience);
  return g;
}

std::string GridResult::to_tsv() const {
  std::string out = "batch_size\twarmup_ratio\tlearning_rate\tthreshold\tseed\tvalid_exact\tvalid_partial\n";
  for (const auto& r : rows) {
    out += std::to_string(r.hyper.batch_size) + "\t" + format_fixed(r.hyper.warmup_ratio, 3) +
           "\t" + format_fixed(r.hyper.learning_rate, 6) + "\t" +
           format_fixed(r.hyper.threshold, 3) + "\t" + std::to_string(r.seed) + "\t" +
           format_fixed(r.valid_exact, 6) + "\t" + format_fixed(r.valid_partial, 6) + "\n";
  }
  return out;
}

GridResult grid_search(std::span<const PredictionInstance> train,
                       std::span<const PredictionInstance> valid,
                       const std::vector<Hyperparams>& grid,
                       const std::vector<std::uint64_t>& seeds,
                       const std::set<std::string>& forbidden_dialogues) {
  if (grid.empty()) throw std::invalid_argument("hyperparameter grid is empty");
  if (seeds.empty()) throw std::invalid_argument("grid search needs at least one seed");
  GridResult result;
  double best = -1.0;
  for (const auto& h : grid) {
    double sum = 0.0;
    for (std::uint64_t seed : seeds) {
      PredictorModel m = train_predictor(train, valid, h, seed, forbidden_dialogues, "grid");
      GridRow row{h, seed, 0.0, 0.0};
      for (const auto& inst : valid) {
        TagSet p = m.predict(inst);
        row.valid_exact += exact_match(p, inst.gold);
        row.valid_partial += partial_match(p, inst.gold);
      }
      row.valid_exact /= static_cast<double>(valid.size());
      row.valid_partial /= static_cast<double>(valid.size());
      sum += row.valid_exact;
      result.rows.push_back(row);
    }
    double mean = sum / static_cast<double>(seeds.size());
    if (mean > best) {
      best = mean;
      result.best = h;
      result.best_mean_exact = mean;
    }
  }
  return result;
}

}  // namespace daaug
