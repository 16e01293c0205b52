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

#include "daaug/evaluation.h"

#include <algorithm>
#include <atomic>
#include <set>
#include <stdexcept>
#include <thread>

#include "daaug/util.h"

namespace daaug {

using nlohmann::json;

namespace {

struct Cell {
  std::string setting;
  int split = 0;
  std::uint64_t seed = 0;
  const std::vector<PredictionInstance>* train = nullptr;
  const std::vector<PredictionInstance>* valid = nullptr;
  const std::vector<PredictionInstance>* test = nullptr;
  std::set<std::string> forbidden;
};

EvalRow run_cell(const Cell& c, const Hyperparams& hyper) {
  EvalRow row;
  row.setting = c.setting;
  row.split = c.split;
  row.seed = c.seed;
  row.hyper = hyper;
  try {
    PredictorModel m = train_predictor(*c.train, *c.valid, hyper, c.seed, c.forbidden, c.setting);
    row.scores = evaluate(m, *c.test);
    row.best_epoch = m.meta().best_epoch;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

// Cells are independent; results land in input order.
std::vector<EvalRow> run_cells(const std::vector<Cell>& cells, const Hyperparams& hyper,
                               int workers) {
  std::vector<EvalRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) rows[i] = run_cell(cells[i], hyper);
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n; ++w) pool.emplace_back(work);
  }
  return rows;
}

std::set<std::string> test_ids(const DatasetSplit& split) {
  return {split.test_dialogue_ids.begin(), split.test_dialogue_ids.end()};
}

json row_to_json(const EvalRow& r) {
  json j = {{"setting", r.setting}, {"split", r.split}, {"seed", r.seed},
            {"exact", r.scores.exact}, {"partial", r.scores.partial},
            {"hyper", r.hyper.to_json()}, {"best_epoch", r.best_epoch}};
  if (!r.ok()) j["error"] = r.error;
  return j;
}

EvalRow row_from_json(const json& j) {
  EvalRow r;
  r.setting = j.at("setting").get<std::string>();
  r.split = j.at("split").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.scores.exact = j.at("exact").get<double>();
  r.scores.partial = j.at("partial").get<double>();
  r.hyper = Hyperparams::from_json(j.value("hyper", json::object()));
  r.best_epoch = j.value("best_epoch", 0);
  r.error = j.value("error", "");
  return r;
}

}  // namespace

EvalScores evaluate(const PredictFn& predict, std::span<const PredictionInstance> instances) {
  if (instances.empty()) throw std::invalid_argument("cannot evaluate on an empty test set");
  std::size_t exact = 0;
  std::size_t partial = 0;
  for (const auto& inst : instances) {
    TagSet p = predict(inst);
    exact += exact_match(p, inst.gold);
    partial += partial_match(p, inst.gold);
  }
  const double n = static_cast<double>(instances.size());
  return {static_cast<double>(exact) / n, static_cast<double>(partial) / n};
}

EvalScores evaluate(const PredictorModel& model, std::span<const PredictionInstance> instances) {
  return evaluate([&model](const PredictionInstance& i) { return model.predict(i); }, instances);
}

std::string format_mean_std(double mean, double std) {
  return format_fixed(mean, 4) + " ± " + format_fixed(std, 4);
}

void EvalReport::recompute_aggregates() {
  aggregates.clear();
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (std::find(order.begin(), order.end(), r.setting) == order.end()) order.push_back(r.setting);
  }
  std::set<int> split_set;
  for (const auto& r : rows) split_set.insert(r.split);
  auto aggregate = [&](const std::string& setting, int split) {
    std::vector<double> ex, pa;
    for (const auto& r : rows) {
      if (r.setting != setting || !r.ok() || (split >= 0 && r.split != split)) continue;
      ex.push_back(r.scores.exact);
      pa.push_back(r.scores.partial);
    }
    EvalAggregate a;
    a.setting = setting;
    a.split = split;
    a.runs = ex.size();
    std::tie(a.mean_exact, a.std_exact) = mean_and_sample_std(ex);
    std::tie(a.mean_partial, a.std_partial) = mean_and_sample_std(pa);
    return a;
  };
  for (const auto& s : order) {
    for (int sp : split_set) aggregates.push_back(aggregate(s, sp));
  }
  if (split_set.size() > 1) {
    for (const auto& s : order) aggregates.push_back(aggregate(s, -1));
  }
}

const EvalAggregate* EvalReport::find(std::string_view setting, int split) const {
  // split -1 falls back to the single split's aggregate when nothing is pooled.
  const EvalAggregate* only = nullptr;
  for (const auto& a : aggregates) {
    if (a.setting != setting) continue;
    if (a.split == split) return &a;
    if (split == -1) only = only ? nullptr : &a;
  }
  return only;
}

json EvalReport::to_json() const {
  json rows_j = json::array();
  for (const auto& r : rows) rows_j.push_back(row_to_json(r));
  json agg = json::array();
  for (const auto& a : aggregates) {
    agg.push_back({{"setting", a.setting}, {"split", a.split}, {"runs", a.runs},
                   {"mean_exact", a.mean_exact}, {"std_exact", a.std_exact},
                   {"mean_partial", a.mean_partial}, {"std_partial", a.std_partial}});
  }
  return {{"kind", kind},
          {"config_digest", config_digest},
          {"splits", splits},
          {"std_convention", "sample (n-1)"},
          {"rows", rows_j},
          {"aggregates", agg}};
}

EvalReport EvalReport::from_json(const json& j) {
  EvalReport r;
  r.kind = j.value("kind", "");
  r.config_digest = j.value("config_digest", "");
  r.splits = j.value("splits", std::vector<int>{});
  for (const auto& row : j.at("rows")) r.rows.push_back(row_from_json(row));
  for (const auto& a : j.at("aggregates")) {
    EvalAggregate g;
    g.setting = a.at("setting").get<std::string>();
    g.split = a.at("split").get<int>();
    g.runs = a.at("runs").get<std::size_t>();
    g.mean_exact = a.at("mean_exact").get<double>();
    g.std_exact = a.at("std_exact").get<double>();
    g.mean_partial = a.at("mean_partial").get<double>();
    g.std_partial = a.at("std_partial").get<double>();
    r.aggregates.push_back(std::move(g));
  }
  return r;
}

std::string EvalReport::to_tsv() const {
  std::string out = "setting\tsplit\tseed\texact\tpartial\tbest_epoch\tstatus\n";
  for (const auto& r : rows) {
    out += r.setting + "\t" + std::to_string(r.split) + "\t" + std::to_string(r.seed) + "\t" +
           format_fixed(r.scores.exact, 6) + "\t" + format_fixed(r.scores.partial, 6) + "\t" +
           std::to_string(r.best_epoch) + "\t" + (r.ok() ? "ok" : "failed: " + r.error) + "\n";
  }
  return out;
}

std::string EvalReport::render_table() const {
  // Pooled rows when present, else the single split's rows.
  bool pooled = std::any_of(aggregates.begin(), aggregates.end(),
                            [](const EvalAggregate& a) { return a.split == -1; });
  std::size_t width = 7;
  for (const auto& a : aggregates) width = std::max(width, a.setting.size());
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  std::string out = pad("Setting", width) + "  " + pad("Exact", 15) + "  Partial\n";
  for (const auto& a : aggregates) {
    if (pooled != (a.split == -1)) continue;
    out += pad(a.setting, width) + "  " + pad(format_mean_std(a.mean_exact, a.std_exact), 15) +
           "  " + format_mean_std(a.mean_partial, a.std_partial) + "\n";
  }
  std::size_t failed = std::count_if(rows.begin(), rows.end(), [](const EvalRow& r) { return !r.ok(); });
  if (failed) out += std::to_string(failed) + " run(s) failed; see the per-seed table\n";
  return out;
}

const std::vector<std::string>& ablation_variants() {
  static const std::vector<std::string> v = {
      std::string(kAblationLowResource), std::string(kAblationNoHistoryGen),
      std::string(kAblationNoSecondFinetune), std::string(kAblationNoStyle),
      std::string(kAblationOurs)};
  return v;
}

EvalReport run_experiment(const Corpus& corpus, const ExperimentInput& input,
                          const std::vector<SplitName>& settings, const RunOptions& options) {
  if (settings.empty()) throw std::invalid_argument("no settings requested");
  if (options.seeds.empty()) throw std::invalid_argument("no seeds requested");
  options.hyper.validate();
  // Every setting shares the Low-Resource test set.
  const DatasetSplit lr = build_split(corpus, SplitName::kLowResource, input.split_config);
  const auto forbidden = test_ids(lr);

  std::vector<DatasetSplit> splits;
  splits.reserve(settings.size());
  for (SplitName s : settings) {
    if (s == SplitName::kLowResourceAug) {
      if (!input.has_augmented || input.augmented.empty()) {
        throw std::invalid_argument("LowResourceAug needs an augmented dataset");
      }
      DatasetSplit aug = lr;
      aug.name = s;
      aug.train.insert(aug.train.end(), input.augmented.begin(), input.augmented.end());
      splits.push_back(std::move(aug));
    } else {
      splits.push_back(build_split(corpus, s, input.split_config));
    }
  }
  std::vector<Cell> cells;
  for (const auto& sp : splits) {
    for (std::uint64_t seed : options.seeds) {
      cells.push_back({std::string(split_name(sp.name)), input.split_index, seed, &sp.train,
                       &sp.valid, &lr.test, forbidden});
    }
  }
  EvalReport report;
  report.kind = "experiment";
  report.config_digest = options.config_digest;
  report.splits = {input.split_index};
  report.rows = run_cells(cells, options.hyper, options.workers);
  report.recompute_aggregates();
  return report;
}

EvalReport run_ablation(const Corpus& corpus, const std::vector<AblationInput>& inputs,
                        const RunOptions& options, const std::vector<std::string>& variants) {
  if (inputs.empty()) throw std::invalid_argument("no splits given for the ablation");
  if (variants.empty()) throw std::invalid_argument("no ablation variants requested");
  if (options.seeds.empty()) throw std::invalid_argument("no seeds requested");
  options.hyper.validate();
  struct Prepared {
    DatasetSplit lr;
    std::vector<std::vector<PredictionInstance>> train;  // per variant
  };
  std::vector<Prepared> prepared;
  prepared.reserve(inputs.size());
  for (const auto& in : inputs) {
    Prepared p{build_split(corpus, SplitName::kLowResource, in.split_config), {}};
    for (const auto& v : variants) {
      std::vector<PredictionInstance> train = p.lr.train;
      if (v != kAblationLowResource) {
        auto it = in.augmented.find(v);
        if (it == in.augmented.end() || it->second.empty()) {
          throw std::invalid_argument("ablation variant '" + v + "' has no augmented data for split " +
                                      std::to_string(in.split_index));
        }
        train.insert(train.end(), it->second.begin(), it->second.end());
      }
      p.train.push_back(std::move(train));
    }
    prepared.push_back(std::move(p));
  }
  std::vector<Cell> cells;
  EvalReport report;
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const Prepared& p = prepared[s];
    report.splits.push_back(inputs[s].split_index);
    for (std::size_t v = 0; v < variants.size(); ++v) {
      for (std::uint64_t seed : options.seeds) {
        cells.push_back({variants[v], inputs[s].split_index, seed, &p.train[v], &p.lr.valid,
                         &p.lr.test, test_ids(p.lr)});
      }
    }
  }
  report.kind = "ablation";
  report.config_digest = options.config_digest;
  report.rows = run_cells(cells, options.hyper, options.workers);
  report.recompute_aggregates();
  return report;
}

std::vector<HistoryPair> sample_existing_histories(std::span<const PredictionInstance> instances,
                                                   std::size_t count, std::uint64_t seed) {
  std::vector<const PredictionInstance*> pool;
  for (const auto& inst : instances) {
    if (!inst.dialogue_history.empty()) pool.push_back(&inst);
  }
  if (pool.empty()) throw std::invalid_argument("no instance with a non-empty history to sample");
  Rng rng(mix64(seed) ^ 0x68697374ull);
  std::vector<HistoryPair> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const PredictionInstance* inst = pool[rng.index(pool.size())];
    out.push_back({inst->gold, inst->da_history, false, inst->meta.dialogue_id});
  }
  return out;
}

}  // namespace daaug
