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

// Prediction-quality metrics and the cross-validated budget sweep harness.

#ifndef CROWDPLAN_EVALUATION_H_
#define CROWDPLAN_EVALUATION_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "crowdplan/inference.h"
#include "crowdplan/infogain.h"
#include "crowdplan/learning.h"
#include "crowdplan/model.h"
#include "crowdplan/planner.h"

namespace crowdplan {

inline constexpr double kProbabilityFloor = 1e-12;

// -sum_t log p(y_t | x_t), the posterior mass on the true label clamped
// below at kProbabilityFloor.
double neg_log_likelihood(std::span<const Posterior> posteriors,
                          std::span<const int> truths);

double accuracy(std::span<const int> predictions, std::span<const int> truths);

struct ExecutedSample {
  TaskSample sample;
  bool short_filled = false;  // some path had fewer votes than requested
  bool skipped = false;       // no vote was selected
};

// Selects plan.counts[i] votes per path without replacement, keeping the
// stored order of the selected votes.
ExecutedSample execute_plan_on_sample(const TaskSample& sample,
                                      const AccessPlan& plan,
                                      std::uint64_t seed);

struct MetricRow {
  std::string model;
  std::string strategy;
  Rational budget{0};
  std::string fold;  // fold index, or "mean" for the fold average
  double accuracy = 0.0;
  double neg_log_likelihood = 0.0;
  std::int64_t tasks = 0;
  std::int64_t skipped = 0;
};

struct SweepConfig {
  std::vector<ModelKind> models{ModelKind::kApm};
  std::vector<Strategy> strategies{Strategy::kGreedy};
  std::vector<Rational> budgets;
  int folds = 5;
  IgConfig ig;
  EmConfig em;
  std::vector<Rational> costs;  // per path; empty = unit costs
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool per_fold_rows = false;
};

// Per fold: fit on the training split, plan per strategy and budget, run the
// plans on the held-out tasks and score them. Returns one fold-averaged row
// per (model, strategy, budget), in that nesting order, followed by the
// per-fold rows when requested.
std::vector<MetricRow> budget_sweep(const Dataset& data,
                                    const SweepConfig& cfg);

void write_metric_csv(std::ostream& out, std::span<const MetricRow> rows);

}  // namespace crowdplan

#endif  // CROWDPLAN_EVALUATION_H_
