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

// Domain types shared by every module: label spaces, conditional
// probability tables, the access-path model parameters, access plans and
// vote datasets.

#ifndef CROWDPLAN_MODEL_H_
#define CROWDPLAN_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "crowdplan/rational.h"

namespace crowdplan {

// Task outcomes are the dense labels 0..cardinality-1. Latent access-path
// variables range over the same labels.
struct LabelSpace {
  int cardinality = 2;

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;
};

// Row-major conditional probability table: one row per conditioning value,
// one column per outcome.
class Cpt {
 public:
  Cpt() = default;
  Cpt(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Cpt from_rows(const std::vector<std::vector<double>>& rows);
  static Cpt identity(std::size_t k);
  static Cpt uniform(std::size_t k);
  // Diagonal `accuracy`, remaining mass spread evenly off the diagonal.
  static Cpt symmetric(std::size_t k, double accuracy);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols_ + c];
  }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  const std::vector<double>& values() const { return values_; }
  std::vector<std::vector<double>> to_rows() const;

  // Matrix product: (this * next)[r][c] = sum_k this[r][k] * next[k][c].
  Cpt compose(const Cpt& next) const;
  // out[r][perm[c]] = this[r][c].
  Cpt permute_cols(std::span<const std::size_t> perm) const;
  // out[perm[r]][c] = this[r][c].
  Cpt permute_rows(std::span<const std::size_t> perm) const;
  double trace() const;

  friend bool operator==(const Cpt&, const Cpt&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

struct AccessPathSpec {
  int id = 0;
  Rational cost{1};
  std::string name;

  friend bool operator==(const AccessPathSpec&,
                         const AccessPathSpec&) = default;
};

using WorkerMap = std::map<std::string, Cpt>;
// Either one CPT shared by all workers of a path, or one CPT per worker id.
using WorkerCpts = std::variant<Cpt, WorkerMap>;

inline bool is_shared(const WorkerCpts& w) {
  return std::holds_alternative<Cpt>(w);
}

// Three-layer tree network Y -> Z_i -> X_ij.
struct ApmModel {
  LabelSpace labels;
  // External label strings, index = dense label. May be empty.
  std::vector<std::string> label_names;
  std::vector<double> prior;
  std::vector<AccessPathSpec> paths;
  std::vector<Cpt> path_cpts;  // p(Z_i | Y), K x K
  std::vector<WorkerCpts> worker_cpts;  // p(X_ij | Z_i), K x K each

  std::size_t num_paths() const { return paths.size(); }
  int cardinality() const { return labels.cardinality; }
  bool all_shared() const;
  std::vector<Rational> costs() const;

  friend bool operator==(const ApmModel&, const ApmModel&) = default;
};

// Naive Bayes per individual worker (Y -> X_w).
struct NbiModel {
  LabelSpace labels;
  std::vector<std::string> label_names;
  std::vector<double> prior;
  std::vector<AccessPathSpec> paths;
  WorkerMap workers;  // p(X_w | Y)
  // Workers with too few observations; their CPTs are uniform.
  std::set<std::string> sparse;

  friend bool operator==(const NbiModel&, const NbiModel&) = default;
};

struct AccessPlan {
  std::vector<std::int64_t> counts;

  AccessPlan() = default;
  AccessPlan(std::initializer_list<std::int64_t> c) : counts(c) {}
  explicit AccessPlan(std::vector<std::int64_t> c) : counts(std::move(c)) {}
  static AccessPlan zeros(std::size_t num_paths) {
    return AccessPlan(std::vector<std::int64_t>(num_paths, 0));
  }

  std::size_t size() const { return counts.size(); }
  std::int64_t total_votes() const;
  AccessPlan with_vote(std::size_t path) const;

  friend AccessPlan operator+(const AccessPlan& a, const AccessPlan& b);
  friend bool operator==(const AccessPlan&, const AccessPlan&) = default;
  friend auto operator<=>(const AccessPlan&, const AccessPlan&) = default;
};

struct Vote {
  std::optional<std::string> worker;
  int label = 0;

  friend bool operator==(const Vote&, const Vote&) = default;
};

struct TaskSample {
  std::string task_id;
  std::optional<int> truth;
  std::vector<std::vector<Vote>> votes;  // indexed by path

  std::size_t total_votes() const;
  friend bool operator==(const TaskSample&, const TaskSample&) = default;
};

struct Dataset {
  LabelSpace labels;
  std::vector<std::string> label_names;
  std::size_t num_paths = 0;
  std::vector<TaskSample> samples;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Sum of c_i * S[i]. Throws InputError on a length mismatch.
Rational plan_cost(const ApmModel& model, const AccessPlan& plan);
Rational plan_cost(std::span<const Rational> costs, const AccessPlan& plan);

// Every invariant violation found, as human-readable messages; empty when
// the model is well formed.
std::vector<std::string> validate_model(const ApmModel& model);
std::vector<std::string> validate_model(const NbiModel& model);
// Throws InputError listing all violations, if any.
void require_valid(const ApmModel& model);

// Label and path ranges of every vote; throws InputError on violation.
void validate_dataset(const Dataset& data);

}  // namespace crowdplan

#endif  // CROWDPLAN_MODEL_H_
