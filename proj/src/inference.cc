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

#include "crowdplan/inference.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crowdplan/error.h"

namespace crowdplan {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Scratch = std::array<double, kMaxLabels>;

std::size_t checked_k(int cardinality) {
  if (cardinality < 2 || cardinality > kMaxLabels) {
    throw InputError("label cardinality " + std::to_string(cardinality) +
                     " outside [2, " + std::to_string(kMaxLabels) + "]");
  }
  return static_cast<std::size_t>(cardinality);
}

void check_slots(const ApmModel& model, const TaskSample& sample) {
  if (sample.votes.size() != model.num_paths()) {
    throw InputError("task '" + sample.task_id + "' has " +
                     std::to_string(sample.votes.size()) +
                     " path slots, model has " +
                     std::to_string(model.num_paths()));
  }
}

void check_label(int label, std::size_t k) {
  if (label < 0 || static_cast<std::size_t>(label) >= k) {
    throw InputError("vote label " + std::to_string(label) +
                     " out of range");
  }
}

// n * log(p) with 0 * log(0) = 0.
double scaled_log(std::int64_t n, double p) {
  return n == 0 ? 0.0 : static_cast<double>(n) * std::log(p);
}

// log sum_z p(z|y) exp(evidence[z]) for every y, added into log_joint.
void add_latent_path(const Cpt& path_cpt, std::span<const double> evidence,
                     std::size_t k, std::span<double> log_joint) {
  Scratch terms;
  for (std::size_t y = 0; y < k; ++y) {
    for (std::size_t z = 0; z < k; ++z) {
      const double a = path_cpt(y, z);
      terms[z] = a > 0.0 ? std::log(a) + evidence[z] : kNegInf;
    }
    log_joint[y] += log_sum_exp(std::span<const double>(terms.data(), k));
  }
}

std::vector<std::int64_t> label_counts(std::span<const Vote> votes,
                                       std::size_t k) {
  std::vector<std::int64_t> counts(k, 0);
  for (const auto& v : votes) {
    check_label(v.label, k);
    ++counts[static_cast<std::size_t>(v.label)];
  }
  return counts;
}

}  // namespace

ModelKind parse_model_kind(std::string_view name) {
  if (name == "mv") return ModelKind::kMv;
  if (name == "nbi") return ModelKind::kNbi;
  if (name == "nbap") return ModelKind::kNbap;
  if (name == "apm") return ModelKind::kApm;
  throw InputError("unknown model kind '" + std::string(name) + "'");
}

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kMv:
      return "mv";
    case ModelKind::kNbi:
      return "nbi";
    case ModelKind::kNbap:
      return "nbap";
    case ModelKind::kApm:
      return "apm";
  }
  throw InputError("unknown model kind");
}

double log_sum_exp(std::span<const double> values) {
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

Posterior Posterior::from_probs(std::vector<double> probs) {
  Posterior out;
  out.probs = std::move(probs);
  out.prediction = static_cast<int>(
      std::max_element(out.probs.begin(), out.probs.end()) -
      out.probs.begin());
  out.confidence = out.probs[static_cast<std::size_t>(out.prediction)];
  return out;
}

Posterior Posterior::from_log_joint(std::span<const double> log_joint,
                                    std::span<const double> prior) {
  const double norm = log_sum_exp(log_joint);
  if (norm == kNegInf || std::isnan(norm)) {
    Posterior out = from_probs({prior.begin(), prior.end()});
    out.degenerate_evidence = true;
    return out;
  }
  std::vector<double> probs(log_joint.size());
  for (std::size_t y = 0; y < probs.size(); ++y) {
    probs[y] = std::exp(log_joint[y] - norm);
  }
  return from_probs(std::move(probs));
}

Posterior mv_predict(const LabelSpace& labels, std::span<const int> votes) {
  const std::size_t k = checked_k(labels.cardinality);
  std::vector<double> probs(k, 0.0);
  for (int v : votes) {
    check_label(v, k);
    probs[static_cast<std::size_t>(v)] += 1.0;
  }
  if (votes.empty()) {
    std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(k));
  } else {
    for (double& p : probs) p /= static_cast<double>(votes.size());
  }
  return Posterior::from_probs(std::move(probs));
}

namespace {

std::vector<double> nbi_log_joint_impl(std::span<const double> prior,
                                       std::span<const Cpt> worker_cpts,
                                       std::span<const WorkerVote> votes) {
  const std::size_t k = checked_k(static_cast<int>(prior.size()));
  std::vector<WorkerVote> sorted(votes.begin(), votes.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.worker != b.worker ? a.worker < b.worker : a.label < b.label;
  });
  std::vector<double> log_joint(k);
  for (std::size_t y = 0; y < k; ++y) {
    log_joint[y] = prior[y] > 0.0 ? std::log(prior[y]) : kNegInf;
  }
  for (const auto& v : sorted) {
    if (v.worker >= worker_cpts.size()) {
      throw InputError("no CPT for worker index " + std::to_string(v.worker));
    }
    check_label(v.label, k);
    const Cpt& cpt = worker_cpts[v.worker];
    for (std::size_t y = 0; y < k; ++y) {
      log_joint[y] += scaled_log(1, cpt(y, static_cast<std::size_t>(v.label)));
    }
  }
  return log_joint;
}

}  // namespace

Posterior nbi_posterior(std::span<const double> prior,
                        std::span<const Cpt> worker_cpts,
                        std::span<const WorkerVote> votes) {
  return Posterior::from_log_joint(
      nbi_log_joint_impl(prior, worker_cpts, votes), prior);
}

Posterior nbi_posterior(const NbiModel& model, const TaskSample& sample,
                        UnknownWorker policy) {
  return Posterior::from_log_joint(nbi_log_joint(model, sample, policy),
                                   model.prior);
}

std::vector<double> nbi_log_joint(const NbiModel& model,
                                  const TaskSample& sample,
                                  UnknownWorker policy) {
  std::vector<Cpt> cpts;
  std::vector<WorkerVote> votes;
  std::map<std::string, std::size_t> index;
  for (const auto& path : sample.votes) {
    for (const auto& v : path) {
      if (!v.worker) {
        if (policy == UnknownWorker::kIgnore) continue;
        throw InputError("task '" + sample.task_id +
                         "': NBI inference needs worker ids");
      }
      // Sparse workers carry uniform CPTs; skipping them keeps the joint
      // consistent with the likelihood EM optimizes.
      if (model.sparse.count(*v.worker)) continue;
      auto it = model.workers.find(*v.worker);
      if (it == model.workers.end()) {
        if (policy == UnknownWorker::kIgnore) continue;
        throw InputError("task '" + sample.task_id + "': no CPT for worker '" +
                         *v.worker + "'");
      }
      auto [slot, inserted] = index.emplace(*v.worker, cpts.size());
      if (inserted) cpts.push_back(it->second);
      votes.push_back({slot->second, v.label});
    }
  }
  return nbi_log_joint_impl(model.prior, cpts, votes);
}

Posterior nbap_posterior(const ApmModel& model, const TaskSample& sample) {
  check_slots(model, sample);
  const std::size_t k = checked_k(model.cardinality());
  std::vector<double> log_joint(k);
  for (std::size_t y = 0; y < k; ++y) {
    log_joint[y] = model.prior[y] > 0.0 ? std::log(model.prior[y]) : kNegInf;
  }
  for (std::size_t i = 0; i < model.num_paths(); ++i) {
    const auto* shared = std::get_if<Cpt>(&model.worker_cpts[i]);
    if (shared == nullptr) {
      throw InputError("NBAP requires shared worker CPTs (path " +
                       std::to_string(i) + " is per-worker)");
    }
    if (sample.votes[i].empty()) continue;
    const Cpt marginal = model.path_cpts[i].compose(*shared);
    const auto counts = label_counts(sample.votes[i], k);
    for (std::size_t y = 0; y < k; ++y) {
      for (std::size_t x = 0; x < k; ++x) {
        log_joint[y] += scaled_log(counts[x], marginal(y, x));
      }
    }
  }
  return Posterior::from_log_joint(log_joint, model.prior);
}

Posterior apm_posterior(const ApmModel& model, const TaskSample& sample) {
  return Posterior::from_log_joint(apm_log_joint(model, sample), model.prior);
}

std::vector<double> apm_log_joint(const ApmModel& model,
                                  const TaskSample& sample) {
  check_slots(model, sample);
  const std::size_t k = checked_k(model.cardinality());
  std::vector<double> log_joint(k);
  for (std::size_t y = 0; y < k; ++y) {
    log_joint[y] = model.prior[y] > 0.0 ? std::log(model.prior[y]) : kNegInf;
  }
  Scratch evidence;
  for (std::size_t i = 0; i < model.num_paths(); ++i) {
    const auto& votes = sample.votes[i];
    if (votes.empty()) continue;
    std::fill_n(evidence.begin(), k, 0.0);
    if (const auto* shared = std::get_if<Cpt>(&model.worker_cpts[i])) {
      const auto counts = label_counts(votes, k);
      for (std::size_t z = 0; z < k; ++z) {
        for (std::size_t x = 0; x < k; ++x) {
          evidence[z] += scaled_log(counts[x], (*shared)(z, x));
        }
      }
    } else {
      const auto& workers = std::get<WorkerMap>(model.worker_cpts[i]);
      std::vector<const Vote*> sorted;
      sorted.reserve(votes.size());
      for (const auto& v : votes) sorted.push_back(&v);
      std::sort(sorted.begin(), sorted.end(), [](const Vote* a, const Vote* b) {
        return a->worker != b->worker ? a->worker < b->worker
                                      : a->label < b->label;
      });
      for (const Vote* v : sorted) {
        check_label(v->label, k);
        if (!v->worker) {
          throw InputError("task '" + sample.task_id + "' path " +
                           std::to_string(i) +
                           ": anonymous vote on a per-worker path");
        }
        auto it = workers.find(*v->worker);
        if (it == workers.end()) {
          throw InputError("task '" + sample.task_id + "' path " +
                           std::to_string(i) + ": unknown worker '" +
                           *v->worker + "'");
        }
        for (std::size_t z = 0; z < k; ++z) {
          evidence[z] +=
              scaled_log(1, it->second(z, static_cast<std::size_t>(v->label)));
        }
      }
    }
    add_latent_path(model.path_cpts[i],
                    std::span<const double>(evidence.data(), k), k, log_joint);
  }
  return log_joint;
}

ApmModel nbap_equivalent(const ApmModel& model) {
  ApmModel out = model;
  const auto k = static_cast<std::size_t>(model.cardinality());
  for (std::size_t i = 0; i < model.num_paths(); ++i) {
    const auto* shared = std::get_if<Cpt>(&model.worker_cpts[i]);
    if (shared == nullptr) {
      throw InputError("NBAP requires shared worker CPTs (path " +
                       std::to_string(i) + " is per-worker)");
    }
    out.worker_cpts[i] = model.path_cpts[i].compose(*shared);
    out.path_cpts[i] = Cpt::identity(k);
  }
  return out;
}

Posterior predict(ModelKind kind, const AnyModel& model,
                  const TaskSample& sample) {
  switch (kind) {
    case ModelKind::kMv: {
      const LabelSpace labels = std::visit(
          [](const auto& m) { return m.labels; }, model);
      std::vector<int> flat;
      for (const auto& path : sample.votes) {
        for (const auto& v : path) flat.push_back(v.label);
      }
      return mv_predict(labels, flat);
    }
    case ModelKind::kNbi: {
      const auto* nbi = std::get_if<NbiModel>(&model);
      if (nbi == nullptr) throw InputError("NBI inference needs an NBI model");
      return nbi_posterior(*nbi, sample);
    }
    case ModelKind::kNbap:
    case ModelKind::kApm: {
      const auto* apm = std::get_if<ApmModel>(&model);
      if (apm == nullptr) {
        throw InputError("access-path inference needs an access-path model");
      }
      return kind == ModelKind::kApm ? apm_posterior(*apm, sample)
                                     : nbap_posterior(*apm, sample);
    }
  }
  throw InputError("unknown model kind");
}

SharedApmTables::SharedApmTables(const ApmModel& model)
    : k_(static_cast<int>(checked_k(model.cardinality()))),
      n_(model.num_paths()) {
  const auto k = static_cast<std::size_t>(k_);
  auto safe_log = [](double p) { return p > 0.0 ? std::log(p) : kNegInf; };
  log_prior_.resize(k);
  for (std::size_t y = 0; y < k; ++y) log_prior_[y] = safe_log(model.prior[y]);
  log_path_.resize(n_ * k * k);
  log_vote_.resize(n_ * k * k);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto* shared = std::get_if<Cpt>(&model.worker_cpts[i]);
    if (shared == nullptr) {
      throw InputError("path " + std::to_string(i) +
                       " has per-worker CPTs; plans need shared worker CPTs");
    }
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        log_path_[(i * k + a) * k + b] = safe_log(model.path_cpts[i](a, b));
        log_vote_[(i * k + a) * k + b] = safe_log((*shared)(a, b));
      }
    }
  }
}

void SharedApmTables::add_path_evidence(std::size_t path,
                                        std::span<const std::int64_t> counts,
                                        std::span<double> log_joint) const {
  const auto k = static_cast<std::size_t>(k_);
  Scratch evidence;
  bool any = false;
  for (std::size_t z = 0; z < k; ++z) {
    double e = 0.0;
    const double* row = &log_vote_[(path * k + z) * k];
    for (std::size_t x = 0; x < k; ++x) {
      if (counts[x] != 0) {
        e += static_cast<double>(counts[x]) * row[x];
        any = true;
      }
    }
    evidence[z] = e;
  }
  if (!any) return;
  Scratch terms;
  for (std::size_t y = 0; y < k; ++y) {
    const double* row = &log_path_[(path * k + y) * k];
    for (std::size_t z = 0; z < k; ++z) terms[z] = row[z] + evidence[z];
    log_joint[y] += log_sum_exp(std::span<const double>(terms.data(), k));
  }
}

void SharedApmTables::log_joint(std::span<const std::int64_t> flat_counts,
                                std::span<double> out) const {
  const auto k = static_cast<std::size_t>(k_);
  for (std::size_t y = 0; y < k; ++y) out[y] = log_prior_[y];
  for (std::size_t i = 0; i < n_; ++i) {
    add_path_evidence(i, flat_counts.subspan(i * k, k), out);
  }
}

}  // namespace crowdplan
