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

// Synthetic crowds drawn from an access path model, within-path correlation
// injection and quantile-based access path design.

#ifndef CROWDPLAN_SIMULATOR_H_
#define CROWDPLAN_SIMULATOR_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crowdplan/model.h"

namespace crowdplan {

struct GenerateOptions {
  // Shared-parameter paths: when > 0, votes carry worker ids "p<i>w<k>"
  // drawn without replacement from a pool of this size per path.
  int worker_pool = 0;
};

// Ancestral sampling y ~ p(Y), z_i ~ p(Z_i|y), x_ij ~ p(X|z_i) with
// plan.counts[i] votes per path per task. The random stream of every draw is
// keyed by (seed, task, path, vote index).
Dataset generate(const ApmModel& model, const AccessPlan& plan_per_task,
                 std::int64_t num_tasks, std::uint64_t seed,
                 const GenerateOptions& opts = {});

struct InjectionStats {
  std::int64_t eligible = 0;  // votes that are not the first of their path
  std::int64_t followed = 0;  // eligible votes that followed the majority
  std::int64_t changed = 0;   // followed votes whose label changed
};

// Per task and path, in stored order: with probability p a vote is replaced
// by the running strict majority of the already-processed votes of that
// path (the first vote, and ties, keep the original label).
Dataset inject_correlation(const Dataset& data, double p, std::uint64_t seed,
                           InjectionStats* stats = nullptr);

struct WorkerAccuracy {
  std::string worker;
  double accuracy = 0.0;
};

// Training accuracy of every worker over samples with known truth.
std::vector<WorkerAccuracy> worker_accuracies(const Dataset& data);

// Splits workers into num_paths equal-population bands of increasing
// accuracy (ties ordered by worker id). Returns worker -> path index.
std::map<std::string, int> quantile_paths(std::vector<WorkerAccuracy> workers,
                                          int num_paths);

// Regroups every vote into the path assigned to its worker. Votes from
// unassigned or anonymous workers are dropped.
Dataset assign_paths(const Dataset& data,
                     const std::map<std::string, int>& assignment,
                     int num_paths);

}  // namespace crowdplan

#endif  // CROWDPLAN_SIMULATOR_H_
