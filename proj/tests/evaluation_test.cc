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
#include <random>
#include <sstream>

#include "crowdplan/error.h"
#include "crowdplan/simulator.h"
#include "doctest.h"
#include "test_support.h"

using namespace crowdplan;
using namespace crowdplan::testing;

namespace {

Dataset small_data(std::int64_t tasks = 120) {
  const auto m = make_shared_model({0.5, 0.5}, {cpt2(0.85, 0.8), cpt2(0.7, 0.75)},
                                   {cpt2(0.9, 0.85), cpt2(0.8, 0.8)});
  return generate(m, AccessPlan({4, 4}), tasks, 11);
}

SweepConfig small_sweep() {
  SweepConfig cfg;
  cfg.models = {ModelKind::kApm, ModelKind::kNbap, ModelKind::kMv};
  cfg.strategies = {Strategy::kGreedy, Strategy::kEqual};
  cfg.budgets = {Rational(2), Rational(4), Rational(6)};
  cfg.folds = 3;
  cfg.ig.mode = IgMode::kExact;
  cfg.em.restarts = 1;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("negative log likelihood") {
  std::vector<Posterior> sure(3, Posterior::from_probs({0.0, 1.0}));
  std::vector<int> ones(3, 1);
  CHECK(neg_log_likelihood(sure, ones) == 0.0);
  std::vector<Posterior> flat(10, Posterior::from_probs({0.5, 0.5}));
  std::vector<int> truths(10, 0);
  CHECK(neg_log_likelihood(flat, truths) == doctest::Approx(10 * std::log(2.0)));
  std::vector<int> zero(1, 0);
  const std::vector<Posterior> wrong{Posterior::from_probs({0.0, 1.0})};
  CHECK(neg_log_likelihood(wrong, zero) == doctest::Approx(-std::log(1e-12)));
  CHECK(neg_log_likelihood(wrong, zero) == doctest::Approx(27.631).epsilon(1e-4));
  // More mass on the truth never increases the score.
  const std::vector<Posterior> better{Posterior::from_probs({0.3, 0.7})};
  CHECK(neg_log_likelihood(better, zero) < neg_log_likelihood(wrong, zero));
}

TEST_CASE("accuracy") {
  CHECK(accuracy(std::vector<int>{1, 0}, std::vector<int>{1, 0}) == 1.0);
  CHECK(accuracy(std::vector<int>{0, 1}, std::vector<int>{1, 0}) == 0.0);
  CHECK(accuracy(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 1, 0, 1}) == 0.75);
  CHECK_THROWS_AS(accuracy(std::vector<int>{1}, std::vector<int>{}), InputError);
}

TEST_CASE("executing a plan on a stored task") {
  TaskSample s = anon_sample({{0, 1, 1}, {1, 0}});
  s.task_id = "task-1";
  auto all = execute_plan_on_sample(s, AccessPlan({3, 2}), 1);
  CHECK(all.sample == s);
  CHECK_FALSE(all.short_filled);
  CHECK(execute_plan_on_sample(s, AccessPlan({0, 0}), 1).skipped);
  const auto a = execute_plan_on_sample(s, AccessPlan({2, 1}), 7);
  CHECK(a.sample == execute_plan_on_sample(s, AccessPlan({2, 1}), 7).sample);
  CHECK(a.sample.votes[0].size() == 2);
  CHECK(a.sample.votes[1].size() == 1);
  const auto short_run = execute_plan_on_sample(s, AccessPlan({5, 0}), 7);
  CHECK(short_run.short_filled);
  CHECK(short_run.sample.votes[0].size() == 3);
  CHECK_THROWS_AS(execute_plan_on_sample(s, AccessPlan({1}), 7), InputError);
}

TEST_CASE("budget sweep shape and determinism") {
  const auto data = small_data();
  auto cfg = small_sweep();
  const auto rows = budget_sweep(data, cfg);
  CHECK(rows.size() == 3 * 2 * 3);
  for (const auto& r : rows) {
    CHECK(r.fold == "mean");
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
    CHECK(r.neg_log_likelihood >= 0.0);
    CHECK(r.tasks + r.skipped == 120);
  }
  CHECK(rows.front().model == "apm");
  CHECK(rows.front().strategy == "greedy");
  CHECK(rows.front().budget == Rational(2));

  std::ostringstream a, b;
  write_metric_csv(a, rows);
  cfg.threads = 3;
  write_metric_csv(b, budget_sweep(data, cfg));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("model,strategy,budget,fold,accuracy,neg_log_likelihood,tasks,skipped\n", 0) == 0);

  // Rows do not depend on the order tasks are stored in.
  Dataset shuffled = data;
  std::mt19937_64 gen(1);
  std::shuffle(shuffled.samples.begin(), shuffled.samples.end(), gen);
  std::ostringstream c;
  write_metric_csv(c, budget_sweep(shuffled, cfg));
  CHECK(a.str() == c.str());

  cfg.per_fold_rows = true;
  CHECK(budget_sweep(data, cfg).size() == 18 * 4);
}

TEST_CASE("budget sweep edge cases") {
  const auto data = small_data(30);
  auto cfg = small_sweep();
  cfg.folds = 1;
  cfg.models = {ModelKind::kApm};
  cfg.strategies = {Strategy::kEqual};
  cfg.budgets = {Rational(0), Rational(8)};
  const auto rows = budget_sweep(data, cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].skipped == 30);
  CHECK(rows[0].tasks == 0);
  CHECK(rows[1].tasks == 30);
  cfg.folds = 31;
  CHECK_THROWS_AS(budget_sweep(data, cfg), InputError);
  cfg.folds = 2;
  cfg.budgets.clear();
  CHECK_THROWS_AS(budget_sweep(data, cfg), InputError);
}

TEST_CASE("budget sweep scores the per-worker model") {
  const auto m = make_shared_model({0.5, 0.5}, {cpt2(0.85, 0.8), cpt2(0.7, 0.75)},
                                   {cpt2(0.9, 0.85), cpt2(0.8, 0.8)});
  const auto data = generate(m, AccessPlan({3, 3}), 90, 4, GenerateOptions{5});
  auto cfg = small_sweep();
  cfg.models = {ModelKind::kNbi};
  cfg.strategies = {Strategy::kEqual};
  cfg.budgets = {Rational(4)};
  const auto rows = budget_sweep(data, cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].model == "nbi");
  CHECK(rows[0].tasks == 90);
  CHECK(rows[0].accuracy > 0.6);
}
