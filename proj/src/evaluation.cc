// Copyright 2026 The crowdplan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "crowdplan/evaluation.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>

#include "crowdplan/error.h"
#include "crowdplan/parallel.h"
#include "crowdplan/rng.h"

namespace crowdplan {
namespace {

constexpr std::uint64_t kFoldTag = 0x666f6c64ULL;
constexpr std::uint64_t kExecTag = 0x65786563ULL;
constexpr std::uint64_t kPlanTag = 0x706c616eULL;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct CellScore {
  double accuracy = 0.0;
  double nll = 0.0;
  std::int64_t tasks = 0;
  std::int64_t skipped = 0;
};

struct FoldSplit {
  Dataset train;
  Dataset test;
};

std::vector<FoldSplit> make_folds(const Dataset& data, int folds,
                                  std::uint64_t seed) {
  if (folds < 1) throw InputError("folds must be at least 1");
  if (static_cast<std::size_t>(folds) > data.samples.size()) {
    throw InputError("folds (" + std::to_string(folds) +
                     ") exceed the number of tasks (" +
                     std::to_string(data.samples.size()) + ")");
  }
  // Sort first so assignment does not depend on input order.
  std::vector<std::size_t> order(data.samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.samples[a].task_id < data.samples[b].task_id;
  });
  KeyedRng rng{seed, kFoldTag};
  for (std::size_t j = order.size(); j > 1; --j) {
    std::swap(order[j - 1], order[rng.below(j)]);
  }
  std::vector<FoldSplit> out(static_cast<std::size_t>(folds));
  for (auto& f : out) {
    f.train.labels = f.test.labels = data.labels;
    f.train.label_names = f.test.label_names = data.label_names;
    f.train.num_paths = f.test.num_paths = data.num_paths;
  }
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto fold = pos % static_cast<std::size_t>(folds);
    const TaskSample& s = data.samples[order[pos]];
    if (folds == 1) {
      out[0].train.samples.push_back(s);
      out[0].test.samples.push_back(s);
      continue;
    }
    for (std::size_t f = 0; f < out.size(); ++f) {
      (f == fold ? out[f].test : out[f].train).samples.push_back(s);
    }
  }
  return out;
}

}  // namespace

double neg_log_likelihood(std::span<const Posterior> posteriors,
                          std::span<const int> truths) {
  if (posteriors.size() != truths.size()) {
    throw InputError("posterior and truth counts differ");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < truths.size(); ++t) {
    const auto& probs = posteriors[t].probs;
    const auto y = static_cast<std::size_t>(truths[t]);
    if (y >= probs.size()) throw InputError("truth label out of range");
    total -= std::log(std::max(probs[y], kProbabilityFloor));
  }
  return total;
}

double accuracy(std::span<const int> predictions, std::span<const int> truths) {
  if (predictions.size() != truths.size()) {
    throw InputError("prediction and truth counts differ");
  }
  if (truths.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t t = 0; t < truths.size(); ++t) {
    correct += predictions[t] == truths[t] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(truths.size());
}

ExecutedSample execute_plan_on_sample(const TaskSample& sample,
                                      const AccessPlan& plan,
                                      std::uint64_t seed) {
  if (plan.size() != sample.votes.size()) {
    throw InputError("plan length does not match the task's path slots");
  }
  ExecutedSample out;
  out.sample.task_id = sample.task_id;
  out.sample.truth = sample.truth;
  out.sample.votes.resize(sample.votes.size());
  const std::uint64_t task_key = hash_string(sample.task_id);
  std::size_t selected = 0;
  for (std::size_t i = 0; i < sample.votes.size(); ++i) {
    const auto& available = sample.votes[i];
    const auto want = static_cast<std::size_t>(std::max<std::int64_t>(plan.counts[i], 0));
    if (want > available.size()) out.short_filled = true;
    const std::size_t take = std::min(want, available.size());
    std::vector<std::size_t> idx(available.size());
    std::iota(idx.begin(), idx.end(), 0);
    KeyedRng rng{seed, kExecTag, task_key, i};
    for (std::size_t j = 0; j < take; ++j) {
      std::swap(idx[j], idx[j + rng.below(idx.size() - j)]);
    }
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    for (std::size_t j : idx) out.sample.votes[i].push_back(available[j]);
    selected += take;
  }
  out.skipped = selected == 0;
  return out;
}

std::vector<MetricRow> budget_sweep(const Dataset& data,
                                    const SweepConfig& cfg) {
  validate_dataset(data);
  if (cfg.models.empty() || cfg.strategies.empty() || cfg.budgets.empty()) {
    throw InputError("sweep needs at least one model, strategy and budget");
  }
  const auto splits = make_folds(data, cfg.folds, cfg.seed);
  const std::size_t nm = cfg.models.size();
  const std::size_t ns = cfg.strategies.size();
  const std::size_t nb = cfg.budgets.size();
  auto cell_index = [&](std::size_t m, std::size_t s, std::size_t b) {
    return (m * ns + s) * nb + b;
  };
  std::vector<std::vector<CellScore>> fold_scores(
      splits.size(), std::vector<CellScore>(nm * ns * nb));

  // The access path fit is always needed: every model is scored on plans
  // computed from it (or from its naive view).
  bool want_nbi = false;
  for (auto m : cfg.models) want_nbi |= m == ModelKind::kNbi;

  parallel_for(splits.size(), cfg.threads, [&](std::size_t f) {
    const FoldSplit& split = splits[f];
    EmConfig em = cfg.em;
    em.seed = mix64(cfg.em.seed ^ mix64(f));
    em.threads = 1;
    std::optional<ApmModel> apm =
        fit_em(split.train, /*share_workers=*/true, em, cfg.costs).model;
    std::optional<ApmModel> nbap_plan_model = nbap_equivalent(*apm);
    std::optional<NbiModel> nbi;
    if (want_nbi) nbi = fit_nbi(split.train, em, cfg.costs).model;

    // Plans are computed on the model's own path-level view; MV and NBI
    // have none and use the access path model's plans.
    std::map<std::tuple<bool, std::size_t, std::size_t>, AccessPlan> plans;
    auto plan_for = [&](ModelKind kind, std::size_t s, std::size_t b) {
      const bool naive = kind == ModelKind::kNbap;
      auto key = std::make_tuple(naive, s, b);
      auto it = plans.find(key);
      if (it != plans.end()) return it->second;
      IgConfig ig = cfg.ig;
      ig.threads = 1;
      ig.seed = mix64(cfg.ig.seed ^ mix64(kPlanTag ^ (f << 32) ^ (s << 16) ^ b));
      const ApmModel& planning = naive ? *nbap_plan_model : *apm;
      AccessPlan plan =
          make_plan(cfg.strategies[s], planning, cfg.budgets[b], ig).plan;
      plans.emplace(key, plan);
      return plan;
    };

    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t b = 0; b < nb; ++b) {
        const std::uint64_t exec_seed = mix64(cfg.seed ^ mix64(kExecTag ^ (f << 40) ^ (s << 20) ^ b));
        for (std::size_t m = 0; m < nm; ++m) {
          const ModelKind kind = cfg.models[m];
          const AccessPlan plan = plan_for(kind, s, b);
          std::vector<Posterior> posts;
          std::vector<int> truths;
          std::vector<int> preds;
          CellScore& cell = fold_scores[f][cell_index(m, s, b)];
          for (const auto& task : split.test.samples) {
            const auto exec = execute_plan_on_sample(task, plan, exec_seed);
            if (exec.skipped || !task.truth) {
              ++cell.skipped;
              continue;
            }
            Posterior post;
            switch (kind) {
              case ModelKind::kMv:
                post = predict(kind, AnyModel(*apm), exec.sample);
                break;
              case ModelKind::kNbi:
                post = nbi_posterior(*nbi, exec.sample, UnknownWorker::kIgnore);
                break;
              case ModelKind::kNbap:
                post = nbap_posterior(*apm, exec.sample);
                break;
              case ModelKind::kApm:
                post = apm_posterior(*apm, exec.sample);
                break;
            }
            preds.push_back(post.prediction);
            truths.push_back(*task.truth);
            posts.push_back(std::move(post));
          }
          cell.tasks = static_cast<std::int64_t>(truths.size());
          cell.accuracy = accuracy(preds, truths);
          cell.nll = neg_log_likelihood(posts, truths);
        }
      }
    }
  });

  std::vector<MetricRow> rows;
  for (std::size_t m = 0; m < nm; ++m) {
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t b = 0; b < nb; ++b) {
        MetricRow row;
        row.model = std::string(model_kind_name(cfg.models[m]));
        row.strategy = std::string(strategy_name(cfg.strategies[s]));
        row.budget = cfg.budgets[b];
        row.fold = "mean";
        std::size_t scored = 0;
        for (std::size_t f = 0; f < splits.size(); ++f) {
          const CellScore& c = fold_scores[f][cell_index(m, s, b)];
          row.tasks += c.tasks;
          row.skipped += c.skipped;
          if (c.tasks == 0) continue;
          row.accuracy += c.accuracy;
          row.neg_log_likelihood += c.nll;
          ++scored;
        }
        if (scored > 0) {
          row.accuracy /= static_cast<double>(scored);
          row.neg_log_likelihood /= static_cast<double>(scored);
        }
        rows.push_back(std::move(row));
      }
    }
  }
  if (cfg.per_fold_rows) {
    for (std::size_t f = 0; f < splits.size(); ++f) {
      for (std::size_t m = 0; m < nm; ++m) {
        for (std::size_t s = 0; s < ns; ++s) {
          for (std::size_t b = 0; b < nb; ++b) {
            const CellScore& c = fold_scores[f][cell_index(m, s, b)];
            rows.push_back({std::string(model_kind_name(cfg.models[m])),
                            std::string(strategy_name(cfg.strategies[s])),
                            cfg.budgets[b], std::to_string(f), c.accuracy,
                            c.nll, c.tasks, c.skipped});
          }
        }
      }
    }
  }
  return rows;
}

void write_metric_csv(std::ostream& out, std::span<const MetricRow> rows) {
  out << "model,strategy,budget,fold,accuracy,neg_log_likelihood,tasks,skipped\n";
  for (const auto& r : rows) {
    out << r.model << ',' << r.strategy << ',' << r.budget.to_string() << ','
        << r.fold << ',' << format_double(r.accuracy) << ','
        << format_double(r.neg_log_likelihood) << ',' << r.tasks << ','
        << r.skipped << '\n';
  }
}

}  // namespace crowdplan
