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

#include "crowdplan/model.h"

#include <cmath>
#include <sstream>

#include "crowdplan/error.h"

namespace crowdplan {
namespace {

constexpr double kRowTolerance = 1e-12;

void check_cpt(const Cpt& cpt, std::size_t k, const std::string& where,
               std::vector<std::string>& out) {
  if (cpt.rows() != k || cpt.cols() != k) {
    std::ostringstream msg;
    msg << where << ": shape " << cpt.rows() << "x" << cpt.cols()
        << ", expected " << k << "x" << k;
    out.push_back(msg.str());
    return;
  }
  for (std::size_t r = 0; r < cpt.rows(); ++r) {
    double sum = 0.0;
    for (double p : cpt.row(r)) {
      if (!(p >= 0.0 && p <= 1.0)) {
        std::ostringstream msg;
        msg << where << ": row " << r << " has entry " << p
            << " outside [0,1]";
        out.push_back(msg.str());
      }
      sum += p;
    }
    if (!(std::abs(sum - 1.0) <= kRowTolerance)) {
      std::ostringstream msg;
      msg << where << ": row " << r << " sums to " << sum;
      out.push_back(msg.str());
    }
  }
}

void check_prior(std::span<const double> prior, std::size_t k,
                 std::vector<std::string>& out) {
  if (prior.size() != k) {
    out.push_back("prior has " + std::to_string(prior.size()) +
                  " entries, expected " + std::to_string(k));
    return;
  }
  double sum = 0.0;
  for (double p : prior) {
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream msg;
      msg << "prior entry " << p << " outside [0,1]";
      out.push_back(msg.str());
    }
    sum += p;
  }
  if (!(std::abs(sum - 1.0) <= kRowTolerance)) {
    std::ostringstream msg;
    msg << "prior sums to " << sum;
    out.push_back(msg.str());
  }
}

void check_paths(std::span<const AccessPathSpec> paths,
                 std::vector<std::string>& out) {
  if (paths.empty()) out.push_back("model has no access paths");
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].id != static_cast<int>(i)) {
      out.push_back("path " + std::to_string(i) + ": id " +
                    std::to_string(paths[i].id) + " out of order");
    }
    if (paths[i].cost <= Rational(0)) {
      out.push_back("path " + std::to_string(i) + ": non-positive cost " +
                    paths[i].cost.to_string());
    }
  }
}

}  // namespace

Cpt::Cpt(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw InputError("CPT value count does not match its shape");
  }
}

Cpt Cpt::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw InputError("ragged CPT rows");
    values.insert(values.end(), r.begin(), r.end());
  }
  return Cpt(rows.size(), cols, std::move(values));
}

Cpt Cpt::identity(std::size_t k) { return symmetric(k, 1.0); }

Cpt Cpt::uniform(std::size_t k) {
  return Cpt(k, k, std::vector<double>(k * k, 1.0 / static_cast<double>(k)));
}

Cpt Cpt::symmetric(std::size_t k, double accuracy) {
  std::vector<double> values(k * k);
  const double off = k > 1 ? (1.0 - accuracy) / static_cast<double>(k - 1) : 0;
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      values[r * k + c] = r == c ? accuracy : off;
    }
  }
  return Cpt(k, k, std::move(values));
}

std::vector<std::vector<double>> Cpt::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    out[r].assign(row(r).begin(), row(r).end());
  }
  return out;
}

Cpt Cpt::compose(const Cpt& next) const {
  if (cols_ != next.rows_) throw InputError("CPT compose shape mismatch");
  std::vector<double> values(rows_ * next.cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(r, k);
      for (std::size_t c = 0; c < next.cols_; ++c) {
        values[r * next.cols_ + c] += a * next(k, c);
      }
    }
  }
  return Cpt(rows_, next.cols_, std::move(values));
}

Cpt Cpt::permute_cols(std::span<const std::size_t> perm) const {
  std::vector<double> values(values_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      values[r * cols_ + perm[c]] = (*this)(r, c);
    }
  }
  return Cpt(rows_, cols_, std::move(values));
}

Cpt Cpt::permute_rows(std::span<const std::size_t> perm) const {
  std::vector<double> values(values_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      values[perm[r] * cols_ + c] = (*this)(r, c);
    }
  }
  return Cpt(rows_, cols_, std::move(values));
}

double Cpt::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

bool ApmModel::all_shared() const {
  for (const auto& w : worker_cpts) {
    if (!is_shared(w)) return false;
  }
  return true;
}

std::vector<Rational> ApmModel::costs() const {
  std::vector<Rational> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(p.cost);
  return out;
}

std::int64_t AccessPlan::total_votes() const {
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  return total;
}

AccessPlan AccessPlan::with_vote(std::size_t path) const {
  AccessPlan out = *this;
  ++out.counts.at(path);
  return out;
}

AccessPlan operator+(const AccessPlan& a, const AccessPlan& b) {
  if (a.size() != b.size()) throw InputError("plan length mismatch");
  AccessPlan out = a;
  for (std::size_t i = 0; i < b.size(); ++i) out.counts[i] += b.counts[i];
  return out;
}

std::size_t TaskSample::total_votes() const {
  std::size_t total = 0;
  for (const auto& path : votes) total += path.size();
  return total;
}

Rational plan_cost(std::span<const Rational> costs, const AccessPlan& plan) {
  if (plan.size() != costs.size()) {
    throw InputError("plan has " + std::to_string(plan.size()) +
                     " entries but the model has " +
                     std::to_string(costs.size()) + " access paths");
  }
  Rational total(0);
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (plan.counts[i] < 0) throw InputError("negative vote count in plan");
    total += costs[i] * Rational(plan.counts[i]);
  }
  return total;
}

Rational plan_cost(const ApmModel& model, const AccessPlan& plan) {
  return plan_cost(model.costs(), plan);
}

std::vector<std::string> validate_model(const ApmModel& model) {
  std::vector<std::string> out;
  const int k = model.labels.cardinality;
  if (k < 2) {
    out.push_back("label cardinality " + std::to_string(k) + " is below 2");
    return out;
  }
  const auto kk = static_cast<std::size_t>(k);
  if (!model.label_names.empty() && model.label_names.size() != kk) {
    out.push_back("label name count does not match cardinality");
  }
  check_prior(model.prior, kk, out);
  check_paths(model.paths, out);
  const std::size_t n = model.paths.size();
  if (model.path_cpts.size() != n || model.worker_cpts.size() != n) {
    out.push_back("CPT lists do not match the number of paths");
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::string where = "path " + std::to_string(i);
    check_cpt(model.path_cpts[i], kk, where + " path_cpt", out);
    if (const auto* shared = std::get_if<Cpt>(&model.worker_cpts[i])) {
      check_cpt(*shared, kk, where + " shared_cpt", out);
    } else {
      const auto& workers = std::get<WorkerMap>(model.worker_cpts[i]);
      if (workers.empty()) out.push_back(where + ": empty worker map");
      for (const auto& [id, cpt] : workers) {
        check_cpt(cpt, kk, where + " worker '" + id + "'", out);
      }
    }
  }
  return out;
}

std::vector<std::string> validate_model(const NbiModel& model) {
  std::vector<std::string> out;
  const int k = model.labels.cardinality;
  if (k < 2) {
    out.push_back("label cardinality " + std::to_string(k) + " is below 2");
    return out;
  }
  const auto kk = static_cast<std::size_t>(k);
  check_prior(model.prior, kk, out);
  check_paths(model.paths, out);
  for (const auto& [id, cpt] : model.workers) {
    check_cpt(cpt, kk, "worker '" + id + "'", out);
  }
  return out;
}

void require_valid(const ApmModel& model) {
  const auto problems = validate_model(model);
  if (problems.empty()) return;
  std::string msg = "invalid model:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw InputError(msg);
}

void validate_dataset(const Dataset& data) {
  const int k = data.labels.cardinality;
  if (k < 2) throw InputError("dataset label cardinality below 2");
  for (const auto& s : data.samples) {
    if (s.votes.size() != data.num_paths) {
      throw InputError("task '" + s.task_id + "' has " +
                       std::to_string(s.votes.size()) +
                       " path slots, expected " +
                       std::to_string(data.num_paths));
    }
    if (s.truth && (*s.truth < 0 || *s.truth >= k)) {
      throw InputError("task '" + s.task_id + "' truth out of range");
    }
    for (const auto& path : s.votes) {
      for (const auto& v : path) {
        if (v.label < 0 || v.label >= k) {
          throw InputError("task '" + s.task_id + "' vote label " +
                           std::to_string(v.label) + " out of range");
        }
      }
    }
  }
}

}  // namespace crowdplan
