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

// Parameter estimation for the access path model (EM over the latent path
// layer, with or without observed task truths) and for the per-worker naive
// Bayes baseline (Dawid-Skene EM).

#ifndef CROWDPLAN_LEARNING_H_
#define CROWDPLAN_LEARNING_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crowdplan/model.h"

namespace crowdplan {

struct EmConfig {
  int max_iters = 500;
  double rel_tol = 1e-6;
  // Additive pseudo-count on every CPT and prior entry.
  double smoothing_alpha = 1.0;
  std::uint64_t seed = 0;
  int restarts = 3;
  // NBI only: workers with fewer votes get uniform CPTs and are flagged.
  int min_votes = 2;
  unsigned threads = 1;

  // Throws InputError when a field is out of range.
  void validate() const;
};

struct FitReport {
  double final_log_likelihood = 0.0;
  // Log-likelihood plus the smoothing log-prior, the quantity EM ascends.
  // Equal to the log-likelihood when smoothing_alpha is 0.
  double final_objective = 0.0;
  int iterations = 0;
  bool converged = false;
  int restart_index = 0;
  // Objective after initialization and after each M-step.
  std::vector<double> objective_trace;
  std::vector<double> log_likelihood_trace;
  // Paths without a single vote in the data; their CPTs are uniform.
  std::vector<std::size_t> empty_paths;
  std::vector<std::string> sparse_workers;  // NBI only
};

struct ApmFit {
  ApmModel model;
  FitReport report;
};

struct NbiFit {
  NbiModel model;
  FitReport report;
};

// sum_k log p(s_k | theta); Y is marginalized for samples without truth.
double log_likelihood(const ApmModel& model, const Dataset& data);
double log_likelihood(const NbiModel& model, const Dataset& data);

// All-zero costs span means unit costs.
ApmFit fit_em(const Dataset& data, bool share_workers, const EmConfig& cfg,
              std::span<const Rational> costs = {});

// Same as fit_em but requires every sample to carry its truth.
ApmFit fit_supervised(const Dataset& data, bool share_workers,
                      const EmConfig& cfg,
                      std::span<const Rational> costs = {});

NbiFit fit_nbi(const Dataset& data, const EmConfig& cfg,
               std::span<const Rational> costs = {});

// Permutes each path's latent states to maximize trace(p(Z_i|Y)). When
// `align_task_labels` is set, first relabels Y to maximize the summed trace
// of the per-path vote marginals (only meaningful without observed truths).
ApmModel align_latent_labels(const ApmModel& model, bool align_task_labels);

}  // namespace crowdplan

#endif  // CROWDPLAN_LEARNING_H_
