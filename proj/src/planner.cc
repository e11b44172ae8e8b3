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

#include "crowdplan/planner.h"

#include <cmath>
#include <string>

#include "crowdplan/error.h"
#include "crowdplan/rng.h"

namespace crowdplan {
namespace {

constexpr double kTieTolerance = 1e-12;

void check_budget(const Rational& budget) {
  if (budget < Rational(0)) throw InputError("budget must be non-negative");
}

PlanResult finish(const ApmModel& model, AccessPlan plan,
                  const IgConfig& cfg) {
  PlanResult out;
  out.spent = plan_cost(model, plan);
  out.ig = information_gain(model, plan, cfg);
  out.plan = std::move(plan);
  return out;
}

}  // namespace

Strategy parse_strategy(std::string_view name) {
  if (name == "greedy") return Strategy::kGreedy;
  if (name == "opt") return Strategy::kOpt;
  if (name == "rnd") return Strategy::kRandom;
  if (name == "best") return Strategy::kBest;
  if (name == "equal") return Strategy::kEqual;
  throw InputError("unknown strategy '" + std::string(name) + "'");
}

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kGreedy:
      return "greedy";
    case Strategy::kOpt:
      return "opt";
    case Strategy::kRandom:
      return "rnd";
    case Strategy::kBest:
      return "best";
    case Strategy::kEqual:
      return "equal";
  }
  return "greedy";
}

PlanResult greedy_plan(const ApmModel& model, const Rational& budget,
                       const IgConfig& cfg) {
  check_budget(budget);
  const std::size_t n = model.num_paths();
  const auto costs = model.costs();
  AccessPlan plan = AccessPlan::zeros(n);
  Rational spent(0);
  std::vector<GreedyStep> trace;
  for (int step = 0;; ++step) {
    // One seed per step shared by every candidate (common random numbers).
    IgConfig step_cfg = cfg;
    step_cfg.seed = mix64(cfg.seed ^ mix64(static_cast<std::uint64_t>(step)));
    const Rational remaining = budget - spent;
    bool any_affordable = false;
    for (const auto& c : costs) any_affordable |= c <= remaining;
    if (!any_affordable) break;

    const double base = information_gain(model, plan, step_cfg).value;
    double best_ratio = 0.0;
    double best_delta = 0.0;
    std::size_t best_path = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (costs[i] > remaining) continue;
      const double delta =
          information_gain(model, plan.with_vote(i), step_cfg).value - base;
      if (delta <= 0.0) continue;
      const double ratio = delta / costs[i].to_double();
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best_delta = delta;
        best_path = i;
      }
    }
    if (best_path == n) break;
    ++plan.counts[best_path];
    spent += costs[best_path];
    trace.push_back({step, best_path, best_delta, best_ratio});
  }
  PlanResult out = finish(model, std::move(plan), cfg);
  out.trace = std::move(trace);
  return out;
}

PlanResult exhaustive_opt(const ApmModel& model, const Rational& budget,
                          const IgConfig& cfg, double plan_limit) {
  check_budget(budget);
  const std::size_t n = model.num_paths();
  const auto costs = model.costs();
  std::vector<std::int64_t> bound(n);
  double total = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    bound[i] = budget.floor_div(costs[i]);
    total *= static_cast<double>(bound[i] + 1);
  }
  if (total > plan_limit) {
    throw LimitError("exhaustive search over " + std::to_string(total) +
                     " plans exceeds the limit of " +
                     std::to_string(plan_limit));
  }
  IgConfig exact = cfg;
  exact.mode = IgMode::kExact;

  AccessPlan current = AccessPlan::zeros(n);
  AccessPlan best = AccessPlan::zeros(n);
  double best_ig = 0.0;
  // Odometer in lexicographic order; the last path varies fastest.
  auto advance = [&] {
    for (std::size_t pos = n; pos-- > 0;) {
      if (current.counts[pos] < bound[pos]) {
        ++current.counts[pos];
        return true;
      }
      current.counts[pos] = 0;
    }
    return false;
  };
  do {
    if (plan_cost(costs, current) <= budget) {
      const double ig = information_gain(model, current, exact).value;
      if (ig > best_ig + kTieTolerance) {
        best_ig = ig;
        best = current;
      }
    }
  } while (advance());
  return finish(model, std::move(best), exact);
}

PlanResult baseline_plan(Strategy strategy, const ApmModel& model,
                         const Rational& budget, std::uint64_t seed,
                         const IgConfig& cfg) {
  check_budget(budget);
  const std::size_t n = model.num_paths();
  const auto costs = model.costs();
  AccessPlan plan = AccessPlan::zeros(n);
  Rational remaining = budget;
  switch (strategy) {
    case Strategy::kRandom: {
      KeyedRng rng{seed, 0x524e44ULL};
      for (;;) {
        std::vector<std::size_t> affordable;
        for (std::size_t i = 0; i < n; ++i) {
          if (costs[i] <= remaining) affordable.push_back(i);
        }
        if (affordable.empty()) break;
        const std::size_t pick = affordable[rng.below(affordable.size())];
        ++plan.counts[pick];
        remaining -= costs[pick];
      }
      break;
    }
    case Strategy::kBest: {
      IgConfig exact = cfg;
      exact.mode = IgMode::kExact;
      std::size_t best = 0;
      double best_ig = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double ig =
            information_gain(model, AccessPlan::zeros(n).with_vote(i), exact).value;
        if (ig > best_ig + kTieTolerance) {
          best_ig = ig;
          best = i;
        }
      }
      if (n > 0) plan.counts[best] = remaining.floor_div(costs[best]);
      break;
    }
    case Strategy::kEqual: {
      for (bool progressed = true; progressed;) {
        progressed = false;
        for (std::size_t i = 0; i < n; ++i) {
          if (costs[i] <= remaining) {
            ++plan.counts[i];
            remaining -= costs[i];
            progressed = true;
          }
        }
      }
      break;
    }
    case Strategy::kGreedy:
    case Strategy::kOpt:
      throw InputError("baseline_plan handles rnd, best and equal only");
  }
  return finish(model, std::move(plan), cfg);
}

PlanResult make_plan(Strategy strategy, const ApmModel& model,
                     const Rational& budget, const IgConfig& cfg) {
  switch (strategy) {
    case Strategy::kGreedy:
      return greedy_plan(model, budget, cfg);
    case Strategy::kOpt:
      return exhaustive_opt(model, budget, cfg);
    default:
      return baseline_plan(strategy, model, budget, cfg.seed, cfg);
  }
}

double approximation_bound_for_gamma(double gamma) {
  return 1.0 - std::exp(-(1.0 - gamma));
}

double approximation_bound(const ApmModel& model, const Rational& budget) {
  if (model.paths.empty()) throw InputError("model has no access paths");
  Rational max_cost = model.paths.front().cost;
  for (const auto& p : model.paths) {
    if (p.cost > max_cost) max_cost = p.cost;
  }
  if (budget <= Rational(0) || max_cost > budget) {
    throw InputError("approximation bound needs every path cost <= budget");
  }
  const double gamma = max_cost.to_double() / budget.to_double();
  return approximation_bound_for_gamma(gamma);
}

}  // namespace crowdplan
