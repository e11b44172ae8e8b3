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

// Plan quality: information gain IG(Y;S) = H(Y) - H(Y|S) for access plans
// over a shared-parameter access path model. Entropies are in nats.

#ifndef CROWDPLAN_INFOGAIN_H_
#define CROWDPLAN_INFOGAIN_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "crowdplan/model.h"

namespace crowdplan {

enum class IgMode { kExact, kSampled, kAuto };

IgMode parse_ig_mode(std::string_view name);
std::string_view ig_mode_name(IgMode mode);

struct IgConfig {
  IgMode mode = IgMode::kAuto;
  std::int64_t num_samples = 10000;  // G
  std::uint64_t seed = 0;
  // Maximum number of joint per-path count-vector configurations the exact
  // enumeration may visit.
  double exact_limit = 1e6;
  unsigned threads = 1;
};

struct IgEstimate {
  double value = 0.0;  // IG in nats
  double conditional_entropy = 0.0;
  double stderr_value = 0.0;  // 0 for exact
  IgMode mode = IgMode::kExact;  // mode actually used
};

double prior_entropy(const ApmModel& model);

// Number of joint count-vector configurations exact enumeration visits:
// prod_i C(S[i] + K - 1, K - 1).
double exact_configurations(const ApmModel& model, const AccessPlan& plan);

// Throws LimitError when exact_configurations exceeds `exact_limit`.
double exact_conditional_entropy(const ApmModel& model,
                                 const AccessPlan& plan,
                                 double exact_limit = 1e6);

struct EntropyEstimate {
  double value = 0.0;
  double stderr_value = 0.0;
};

// Mean of H(Y | x) over G vote vectors drawn ancestrally from the network.
EntropyEstimate sampled_conditional_entropy(const ApmModel& model,
                                            const AccessPlan& plan,
                                            const IgConfig& cfg);

IgEstimate information_gain(const ApmModel& model, const AccessPlan& plan,
                            const IgConfig& cfg);

struct SubmodularityViolation {
  AccessPlan smaller;
  AccessPlan larger;
  std::size_t added_path = 0;
  double margin = 0.0;
};

struct SubmodularityReport {
  int trials = 0;
  // min over trials of [IG(S+v)-IG(S)] - [IG(S'+v)-IG(S')]
  double worst_margin = 0.0;
  // min over trials of IG(S+v) - IG(S)
  double worst_monotonicity = 0.0;
  std::vector<SubmodularityViolation> violations;
  std::vector<SubmodularityViolation> monotonicity_violations;
};

struct SubmodularityOptions {
  int max_votes_per_path = 3;
  double tolerance = 1e-9;
};

// Draws random S subset-of S' and single-vote additions v and checks
// diminishing marginal gains with exact IG.
SubmodularityReport check_submodularity(const ApmModel& model, int trials,
                                        std::uint64_t seed,
                                        const SubmodularityOptions& opts = {});

}  // namespace crowdplan

#endif  // CROWDPLAN_INFOGAIN_H_
