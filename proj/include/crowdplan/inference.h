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

// Posterior computation for the four aggregation models: majority vote,
// naive Bayes per worker (NBI), naive Bayes per access path (NBAP) and the
// access path model (APM). Everything is accumulated in log space.

#ifndef CROWDPLAN_INFERENCE_H_
#define CROWDPLAN_INFERENCE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "crowdplan/model.h"

namespace crowdplan {

// Hard cap on label cardinality for the stack-allocated inner loops.
inline constexpr int kMaxLabels = 64;

enum class ModelKind { kMv, kNbi, kNbap, kApm };

ModelKind parse_model_kind(std::string_view name);
std::string_view model_kind_name(ModelKind kind);

using AnyModel = std::variant<ApmModel, NbiModel>;

struct Posterior {
  std::vector<double> probs;
  int prediction = 0;  // smallest index attaining the maximum
  double confidence = 0.0;  // probs[prediction]
  // Evidence had zero probability under every label; probs is the prior.
  bool degenerate_evidence = false;

  static Posterior from_probs(std::vector<double> probs);
  static Posterior from_log_joint(std::span<const double> log_joint,
                                  std::span<const double> prior);
};

double log_sum_exp(std::span<const double> values);

// Shannon entropy in nats, 0 log 0 = 0.
double entropy(std::span<const double> probs);

Posterior mv_predict(const LabelSpace& labels, std::span<const int> votes);

struct WorkerVote {
  std::size_t worker = 0;
  int label = 0;
};

Posterior nbi_posterior(std::span<const double> prior,
                        std::span<const Cpt> worker_cpts,
                        std::span<const WorkerVote> votes);

enum class UnknownWorker {
  kError,
  kIgnore,  // vote carries no information (uniform CPT)
};

Posterior nbi_posterior(const NbiModel& model, const TaskSample& sample,
                        UnknownWorker policy = UnknownWorker::kError);

// Unnormalized log p(y, x) for every label y.
std::vector<double> nbi_log_joint(const NbiModel& model,
                                  const TaskSample& sample,
                                  UnknownWorker policy = UnknownWorker::kError);
std::vector<double> apm_log_joint(const ApmModel& model,
                                  const TaskSample& sample);

// Requires shared worker CPTs on every path. Each vote is conditioned
// directly on Y through the path's marginal p(x|y) = sum_z p(z|y) p(x|z).
Posterior nbap_posterior(const ApmModel& model, const TaskSample& sample);

Posterior apm_posterior(const ApmModel& model, const TaskSample& sample);

// NBAP expressed as an access path model: deterministic path layer and the
// per-vote marginal p(x|y) as the shared worker CPT. apm_posterior on the
// result equals nbap_posterior on the input, and its information gain is the
// naive-Bayes-per-path information gain.
ApmModel nbap_equivalent(const ApmModel& model);

Posterior predict(ModelKind kind, const AnyModel& model,
                  const TaskSample& sample);

// log p(x | z) tables for a model with shared worker CPTs, reused by the
// entropy estimators where the same model is queried millions of times.
class SharedApmTables {
 public:
  explicit SharedApmTables(const ApmModel& model);

  int cardinality() const { return k_; }
  std::size_t num_paths() const { return n_; }
  double log_prior(int y) const { return log_prior_[y]; }

  // log_joint[y] += log sum_z p(z|y) prod_x p(x|z)^counts[x], i.e. the
  // path's evidence term without the multinomial coefficient.
  void add_path_evidence(std::size_t path,
                         std::span<const std::int64_t> counts,
                         std::span<double> log_joint) const;

  // log p(y) + sum over paths of add_path_evidence.
  void log_joint(std::span<const std::int64_t> flat_counts,
                 std::span<double> out) const;

 private:
  int k_;
  std::size_t n_;
  std::vector<double> log_prior_;
  std::vector<double> log_path_;  // [path][y][z]
  std::vector<double> log_vote_;  // [path][z][x]
};

}  // namespace crowdplan

#endif  // CROWDPLAN_INFERENCE_H_
