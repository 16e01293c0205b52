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

// Reference DA predictor: one-vs-rest logistic regression over hashed
// n-gram features of the linearized context plus DA-history features,
// decoded into a tag set by thresholding.

#ifndef DAAUG_PREDICTOR_H_
#define DAAUG_PREDICTOR_H_

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "daaug/instances.h"
#include "daaug/tags.h"
#include "json.hpp"

namespace daaug {

inline constexpr std::string_view kLinearizationVersion = "lin-v1";

// Oldest step first: "[OP] <operator> [DA] <tags> [CU] <customer>" per real
// step and "[PAD]" per padding step, blocks separated by one space.
std::string linearize_instance(const PredictionInstance& instance);

struct Hyperparams {
  int batch_size = 16;
  double warmup_ratio = 0.1;
  double learning_rate = 2.0;
  int epochs = 10;
  int patience = 3;
  double threshold = 0.5;  // tau, in (0, 1)

  void validate() const;
  nlohmann::json to_json() const;
  static Hyperparams from_json(const nlohmann::json& j);
  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

class PredictorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tags scoring >= threshold, or the single argmax tag when none does.
// `scores` holds one value per operator tag (index = tag index).
TagSet decode_scores(std::span<const double> scores, double threshold);

struct TrainingMeta {
  std::string setting;
  std::uint64_t seed = 0;
  int best_epoch = 0;
  int epochs_run = 0;
  double best_valid_exact = 0.0;
  std::vector<double> valid_exact_per_epoch;
};

class PredictorModel {
 public:
  static constexpr int kHashBits = 16;
  static constexpr std::size_t kDims = std::size_t{1} << kHashBits;

  PredictorModel();

  std::array<double, kNumOperatorTags> scores(const PredictionInstance& instance) const;
  TagSet predict(const PredictionInstance& instance) const;

  const Hyperparams& hyper() const { return hyper_; }
  const TrainingMeta& meta() const { return meta_; }
  const std::string& linearization_version() const { return version_; }

  // Versioned binary blob; load() rejects a different linearization version.
  std::string serialize() const;
  static PredictorModel deserialize(std::string_view blob);

 private:
  friend PredictorModel train_predictor(std::span<const PredictionInstance>,
                                        std::span<const PredictionInstance>, const Hyperparams&,
                                        std::uint64_t, const std::set<std::string>&,
                                        std::string);
  std::string version_;
  Hyperparams hyper_;
  TrainingMeta meta_;
  std::vector<double> weights_;  // kNumOperatorTags x kDims
  std::array<double, kNumOperatorTags> bias_{};
};

// Sparse binary features (hashed indices, deduplicated, sorted).
std::vector<std::uint32_t> instance_features(const PredictionInstance& instance);

// Deterministic given seed. Throws PredictorError on empty inputs, on a
// non-finite loss, or when any instance comes from a forbidden dialogue.
PredictorModel train_predictor(std::span<const PredictionInstance> train,
                               std::span<const PredictionInstance> valid,
                               const Hyperparams& hyper, std::uint64_t seed,
                               const std::set<std::string>& forbidden_dialogues = {},
                               std::string setting = "");

struct HyperGrid {
  std::vector<int> batch_sizes = {16, 32};
  std::vector<double> warmup_ratios = {0.1};
  std::vector<double> learning_rates = {2.0, 8.0};
  std::vector<double> thresholds = {0.4, 0.5};
  int epochs = 10;
  int patience = 3;

  std::vector<Hyperparams> expand() const;
  nlohmann::json to_json() const;
  static HyperGrid from_json(const nlohmann::json& j);
};

struct GridRow {
  Hyperparams hyper;
  std::uint64_t seed = 0;
  double valid_exact = 0.0;
  double valid_partial = 0.0;
};

struct GridResult {
  std::vector<GridRow> rows;
  Hyperparams best;
  double best_mean_exact = 0.0;

  std::string to_tsv() const;
};

// Exhaustive: one training per (config, seed); the best configuration has
// the highest mean validation exact match, ties going to the earlier one.
GridResult grid_search(std::span<const PredictionInstance> train,
                       std::span<const PredictionInstance> valid,
                       const std::vector<Hyperparams>& grid,
                       const std::vector<std::uint64_t>& seeds,
                       const std::set<std::string>& forbidden_dialogues = {});

}  // namespace daaug

#endif  // DAAUG_PREDICTOR_H_
