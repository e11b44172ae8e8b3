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

#include "crowdplan/infogain.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crowdplan/error.h"
#include "crowdplan/inference.h"
#include "crowdplan/parallel.h"
#include "crowdplan/rng.h"

namespace crowdplan {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::int64_t kSamplesPerPartition = 2048;
constexpr double kClampTolerance = 1e-9;

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_plan(const ApmModel& model, const AccessPlan& plan) {
  if (plan.size() != model.num_paths()) {
    throw InputError("plan has " + std::to_string(plan.size()) +
                     " entries but the model has " +
                     std::to_string(model.num_paths()) + " access paths");
  }
  for (auto c : plan.counts) {
    if (c < 0) throw InputError("negative vote count in plan");
  }
}

double log_binomial(double n, double r) {
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

// All count vectors of length k summing to n, in lexicographic order.
void enumerate_counts(std::int64_t n, std::size_t k,
                      std::vector<std::int64_t>& current, std::size_t pos,
                      std::vector<std::vector<std::int64_t>>& out) {
  if (pos + 1 == k) {
    current[pos] = n;
    out.push_back(current);
    return;
  }
  for (std::int64_t c = 0; c <= n; ++c) {
    current[pos] = c;
    enumerate_counts(n - c, k, current, pos + 1, out);
  }
}

struct ExactEnumerator {
  std::size_t k;
  // Per path with votes: flattened [config][y] log p(counts | y) including
  // the multinomial coefficient.
  std::vector<std::vector<double>> path_terms;
  CompensatedSum total;

  void visit(std::size_t depth, std::vector<double>& acc) {
    if (depth == path_terms.size()) {
      const double log_px = log_sum_exp(acc);
      for (std::size_t y = 0; y < k; ++y) {
        if (acc[y] == kNegInf) continue;
        total.add(std::exp(acc[y]) * (log_px - acc[y]));
      }
      return;
    }
    const auto& terms = path_terms[depth];
    const std::size_t configs = terms.size() / k;
    std::vector<double> next(k);
    for (std::size_t c = 0; c < configs; ++c) {
      for (std::size_t y = 0; y < k; ++y) next[y] = acc[y] + terms[c * k + y];
      visit(depth + 1, next);
    }
  }
};

double clamp_nonnegative(double v, const char* what) {
  if (v >= 0.0) return v;
  if (v >= -kClampTolerance) return 0.0;
  throw NumericError(std::string(what) + " is negative beyond tolerance");
}

}  // namespace

IgMode parse_ig_mode(std::string_view name) {
  if (name == "exact") return IgMode::kExact;
  if (name == "sampled") return IgMode::kSampled;
  if (name == "auto") return IgMode::kAuto;
  throw InputError("unknown IG mode '" + std::string(name) + "'");
}

std::string_view ig_mode_name(IgMode mode) {
  switch (mode) {
    case IgMode::kExact:
      return "exact";
    case IgMode::kSampled:
      return "sampled";
    case IgMode::kAuto:
      return "auto";
  }
  return "auto";
}

double prior_entropy(const ApmModel& model) { return entropy(model.prior); }

double exact_configurations(const ApmModel& model, const AccessPlan& plan) {
  check_plan(model, plan);
  const double km1 = static_cast<double>(model.cardinality() - 1);
  double log_total = 0.0;
  for (auto n : plan.counts) {
    log_total += log_binomial(static_cast<double>(n) + km1, km1);
  }
  return std::round(std::exp(log_total));
}

double exact_conditional_entropy(const ApmModel& model,
                                 const AccessPlan& plan, double exact_limit) {
  check_plan(model, plan);
  const double configs = exact_configurations(model, plan);
  if (configs > exact_limit) {
    throw LimitError("exact entropy needs " + std::to_string(configs) +
                     " configurations (limit " + std::to_string(exact_limit) +
                     "); use sampled mode");
  }
  const SharedApmTables tables(model);
  const auto k = static_cast<std::size_t>(model.cardinality());
  ExactEnumerator en{k, {}, {}};
  for (std::size_t i = 0; i < model.num_paths(); ++i) {
    const std::int64_t n = plan.counts[i];
    if (n == 0) continue;
    std::vector<std::vector<std::int64_t>> vectors;
    std::vector<std::int64_t> current(k, 0);
    enumerate_counts(n, k, current, 0, vectors);
    std::vector<double> terms(vectors.size() * k);
    const double log_n_fact = std::lgamma(static_cast<double>(n) + 1.0);
    for (std::size_t c = 0; c < vectors.size(); ++c) {
      double log_coef = log_n_fact;
      for (auto x : vectors[c]) log_coef -= std::lgamma(static_cast<double>(x) + 1.0);
      std::span<double> out(terms.data() + c * k, k);
      std::fill(out.begin(), out.end(), log_coef);
      tables.add_path_evidence(i, vectors[c], out);
    }
    en.path_terms.push_back(std::move(terms));
  }
  std::vector<double> acc(k);
  for (std::size_t y = 0; y < k; ++y) acc[y] = tables.log_prior(static_cast<int>(y));
  en.visit(0, acc);
  return clamp_nonnegative(en.total.value(), "conditional entropy");
}

EntropyEstimate sampled_conditional_entropy(const ApmModel& model,
                                            const AccessPlan& plan,
                                            const IgConfig& cfg) {
  check_plan(model, plan);
  if (cfg.num_samples < 1) throw InputError("num_samples must be at least 1");
  if (plan.total_votes() == 0) return {prior_entropy(model), 0.0};

  const SharedApmTables tables(model);
  const auto k = static_cast<std::size_t>(model.cardinality());
  const std::size_t n = model.num_paths();
  std::vector<const Cpt*> vote_cpts(n);
  for (std::size_t i = 0; i < n; ++i) vote_cpts[i] = &std::get<Cpt>(model.worker_cpts[i]);

  const auto g = cfg.num_samples;
  const auto partitions = static_cast<std::size_t>(
      (g + kSamplesPerPartition - 1) / kSamplesPerPartition);
  struct Moments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
  };
  std::vector<Moments> parts(partitions);
  parallel_for(partitions, cfg.threads, [&](std::size_t p) {
    KeyedRng rng{cfg.seed, static_cast<std::uint64_t>(p), 0x4947ULL};
    const std::int64_t begin = static_cast<std::int64_t>(p) * kSamplesPerPartition;
    const std::int64_t end = std::min(g, begin + kSamplesPerPartition);
    std::vector<std::int64_t> counts(n * k);
    std::vector<double> joint(k);
    Moments m;
    for (std::int64_t s = begin; s < end; ++s) {
      std::fill(counts.begin(), counts.end(), 0);
      const std::size_t y = rng.categorical(model.prior);
      for (std::size_t i = 0; i < n; ++i) {
        if (plan.counts[i] == 0) continue;
        const std::size_t z = rng.categorical(model.path_cpts[i].row(y));
        const auto row = vote_cpts[i]->row(z);
        for (std::int64_t j = 0; j < plan.counts[i]; ++j) {
          ++counts[i * k + rng.categorical(row)];
        }
      }
      tables.log_joint(counts, joint);
      const double norm = log_sum_exp(joint);
      double h = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        if (joint[c] == kNegInf) continue;
        const double lp = joint[c] - norm;
        h -= std::exp(lp) * lp;
      }
      m.count += 1.0;
      const double delta = h - m.mean;
      m.mean += delta / m.count;
      m.m2 += delta * (h - m.mean);
    }
    parts[p] = m;
  });
  Moments all;
  for (const auto& m : parts) {
    if (m.count == 0.0) continue;
    const double total = all.count + m.count;
    const double delta = m.mean - all.mean;
    all.mean += delta * m.count / total;
    all.m2 += m.m2 + delta * delta * all.count * m.count / total;
    all.count = total;
  }
  EntropyEstimate out;
  out.value = all.mean;
  out.stderr_value =
      all.count > 1.0 ? std::sqrt(all.m2 / (all.count - 1.0) / all.count) : 0.0;
  return out;
}

IgEstimate information_gain(const ApmModel& model, const AccessPlan& plan,
                            const IgConfig& cfg) {
  const double h = prior_entropy(model);
  IgMode mode = cfg.mode;
  if (mode == IgMode::kAuto) {
    mode = exact_configurations(model, plan) <= cfg.exact_limit
               ? IgMode::kExact
               : IgMode::kSampled;
  }
  IgEstimate out;
  out.mode = mode;
  if (mode == IgMode::kExact) {
    out.conditional_entropy =
        exact_conditional_entropy(model, plan, cfg.exact_limit);
    out.value = clamp_nonnegative(h - out.conditional_entropy,
                                  "information gain");
    out.conditional_entropy = std::min(out.conditional_entropy, h);
  } else {
    const auto est = sampled_conditional_entropy(model, plan, cfg);
    out.conditional_entropy = est.value;
    out.stderr_value = est.stderr_value;
    out.value = h - est.value;
  }
  return out;
}

SubmodularityReport check_submodularity(const ApmModel& model, int trials,
                                        std::uint64_t seed,
                                        const SubmodularityOptions& opts) {
  SubmodularityReport report;
  report.trials = trials;
  report.worst_margin = std::numeric_limits<double>::infinity();
  report.worst_monotonicity = std::numeric_limits<double>::infinity();
  IgConfig exact;
  exact.mode = IgMode::kExact;
  const std::size_t n = model.num_paths();
  const auto span = static_cast<std::uint64_t>(opts.max_votes_per_path) + 1;
  for (int t = 0; t < trials; ++t) {
    KeyedRng rng{seed, static_cast<std::uint64_t>(t), 0x5355424dULL};
    AccessPlan smaller = AccessPlan::zeros(n);
    AccessPlan larger = AccessPlan::zeros(n);
    for (std::size_t i = 0; i < n; ++i) {
      smaller.counts[i] = static_cast<std::int64_t>(rng.below(span));
      larger.counts[i] =
          smaller.counts[i] + static_cast<std::int64_t>(rng.below(span));
    }
    const auto v = static_cast<std::size_t>(rng.below(n));
    const double gain_small = information_gain(model, smaller.with_vote(v), exact).value -
                              information_gain(model, smaller, exact).value;
    const double gain_large = information_gain(model, larger.with_vote(v), exact).value -
                              information_gain(model, larger, exact).value;
    const double margin = gain_small - gain_large;
    report.worst_margin = std::min(report.worst_margin, margin);
    report.worst_monotonicity =
        std::min({report.worst_monotonicity, gain_small, gain_large});
    if (margin < -opts.tolerance) {
      report.violations.push_back({smaller, larger, v, margin});
    }
    if (gain_small < -opts.tolerance || gain_large < -opts.tolerance) {
      report.monotonicity_violations.push_back(
          {smaller, larger, v, std::min(gain_small, gain_large)});
    }
  }
  if (trials <= 0) {
    report.worst_margin = 0.0;
    report.worst_monotonicity = 0.0;
  }
  return report;
}

}  // namespace crowdplan
