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

// Budget-constrained access plan selection.

#ifndef CROWDPLAN_PLANNER_H_
#define CROWDPLAN_PLANNER_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "crowdplan/infogain.h"
#include "crowdplan/model.h"

namespace crowdplan {

struct GreedyStep {
  int step = 0;
  std::size_t path = 0;
  double delta_ig = 0.0;
  double ratio = 0.0;  // delta_ig / cost
};

struct PlanResult {
  AccessPlan plan;
  Rational spent{0};
  IgEstimate ig;
  std::vector<GreedyStep> trace;  // greedy only
};

enum class Strategy { kGreedy, kOpt, kRandom, kBest, kEqual };

Strategy parse_strategy(std::string_view name);
std::string_view strategy_name(Strategy s);

// Benefit-cost greedy: repeatedly adds the single vote with the largest
// marginal IG per unit cost among affordable paths. Stops when nothing is
// affordable or no candidate has positive marginal gain.
PlanResult greedy_plan(const ApmModel& model, const Rational& budget,
                       const IgConfig& cfg);

// Exact optimum over every feasible plan; ties go to the lexicographically
// smallest plan. Throws LimitError when prod_i (floor(B/c_i)+1) > limit.
PlanResult exhaustive_opt(const ApmModel& model, const Rational& budget,
                          const IgConfig& cfg, double plan_limit = 2e5);

// RND, BEST or EQUAL.
PlanResult baseline_plan(Strategy strategy, const ApmModel& model,
                         const Rational& budget, std::uint64_t seed,
                         const IgConfig& cfg);

// Dispatches on any strategy.
PlanResult make_plan(Strategy strategy, const ApmModel& model,
                     const Rational& budget, const IgConfig& cfg);

// 1 - exp(-(1 - gamma)).
double approximation_bound_for_gamma(double gamma);

// Greedy guarantee for this model and budget, gamma = max_i c_i / B.
// Throws InputError when some c_i exceeds B.
double approximation_bound(const ApmModel& model, const Rational& budget);

}  // namespace crowdplan

#endif  // CROWDPLAN_PLANNER_H_
