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

#include "crowdplan/error.h"
#include "doctest.h"
#include "test_support.h"

using namespace crowdplan;
using crowdplan::testing::cpt2;
using crowdplan::testing::make_shared_model;

namespace {

ApmModel three_paths(std::vector<Rational> costs) {
  return make_shared_model({0.5, 0.5}, {cpt2(0.8, 0.8), cpt2(0.7, 0.7), cpt2(0.9, 0.9)},
                           {cpt2(0.9, 0.9), cpt2(0.9, 0.9), cpt2(0.9, 0.9)},
                           std::move(costs));
}

bool mentions(const std::vector<std::string>& msgs, const std::string& what) {
  for (const auto& m : msgs) {
    if (m.find(what) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("plan cost is the exact weighted vote count") {
  const auto m = three_paths({Rational(20), Rational(15), Rational(10)});
  CHECK(plan_cost(m, AccessPlan({1, 2, 3})) == Rational(80));
  const auto m2 = three_paths({Rational(2), Rational(3), Rational(4)});
  CHECK(plan_cost(m2, AccessPlan({2, 4, 6})) == Rational(40));
  CHECK(plan_cost(m2, AccessPlan({0, 0, 0})) == Rational(0));
  const auto m3 = three_paths({Rational(1, 3), Rational(1, 3), Rational(1, 3)});
  CHECK(plan_cost(m3, AccessPlan({1, 1, 1})) == Rational(1));
}

TEST_CASE("plan cost rejects mismatched or negative plans") {
  const auto m = three_paths({Rational(1), Rational(1), Rational(1)});
  CHECK_THROWS_AS(plan_cost(m, AccessPlan({1, 2})), InputError);
  CHECK_THROWS_AS(plan_cost(m, AccessPlan({1, -1, 0})), InputError);
}

TEST_CASE("validation reports every offending row") {
  auto m = three_paths({Rational(1), Rational(1), Rational(1)});
  CHECK(validate_model(m).empty());
  m.path_cpts[0] = Cpt::from_rows({{0.6, 0.3}, {0.5, 0.5}});
  m.worker_cpts[2] = Cpt::from_rows({{0.5, 0.5}, {0.2, 0.7}});
  const auto msgs = validate_model(m);
  CHECK(msgs.size() >= 2);
  CHECK(mentions(msgs, "path 0 path_cpt: row 0 sums to 0.9"));
  CHECK(mentions(msgs, "path 2"));
  CHECK_THROWS_AS(require_valid(m), InputError);
}

TEST_CASE("validation rejects non-positive costs, bad priors and shapes") {
  auto m = three_paths({Rational(1), Rational(0), Rational(-2)});
  auto msgs = validate_model(m);
  CHECK(mentions(msgs, "path 1"));
  CHECK(mentions(msgs, "path 2"));
  m = three_paths({Rational(1), Rational(1), Rational(1)});
  m.prior = {0.7, 0.7};
  CHECK_FALSE(validate_model(m).empty());
  m = three_paths({Rational(1), Rational(1), Rational(1)});
  m.path_cpts[1] = Cpt::identity(3);
  CHECK_FALSE(validate_model(m).empty());
  m = three_paths({Rational(1), Rational(1), Rational(1)});
  m.labels.cardinality = 1;
  m.prior = {1.0};
  CHECK_FALSE(validate_model(m).empty());
}

TEST_CASE("cpt helpers") {
  const Cpt a = cpt2(0.8, 0.8);
  const Cpt b = cpt2(0.9, 0.9);
  const Cpt ab = a.compose(b);
  CHECK(ab(1, 1) == doctest::Approx(0.74).epsilon(1e-12));
  CHECK(ab(0, 1) == doctest::Approx(0.26).epsilon(1e-12));
  CHECK(Cpt::identity(3).trace() == 3.0);
  CHECK(Cpt::uniform(4)(2, 3) == 0.25);
  const Cpt s = Cpt::symmetric(3, 0.7);
  CHECK(s(0, 0) == doctest::Approx(0.7));
  CHECK(s(0, 2) == doctest::Approx(0.15));
  const std::vector<std::size_t> swap{1, 0};
  const Cpt p = Cpt::from_rows({{0.1, 0.9}, {0.8, 0.2}}).permute_cols(swap);
  CHECK(p(0, 0) == 0.9);
  CHECK(p(1, 1) == 0.8);
  CHECK_THROWS_AS(Cpt::from_rows({{0.5, 0.5}, {1.0}}), InputError);
}

TEST_CASE("dataset validation") {
  Dataset d;
  d.labels.cardinality = 2;
  d.num_paths = 1;
  TaskSample s;
  s.task_id = "a";
  s.votes = {{Vote{{}, 1}}};
  d.samples.push_back(s);
  CHECK_NOTHROW(validate_dataset(d));
  d.samples[0].votes[0][0].label = 2;
  CHECK_THROWS_AS(validate_dataset(d), InputError);
  d.samples[0].votes[0][0].label = 0;
  d.samples[0].truth = 5;
  CHECK_THROWS_AS(validate_dataset(d), InputError);
}

TEST_CASE("access plan helpers") {
  const AccessPlan p({1, 0, 2});
  CHECK(p.total_votes() == 3);
  CHECK(p.with_vote(1) == AccessPlan({1, 1, 2}));
  CHECK(p + AccessPlan({1, 1, 1}) == AccessPlan({2, 1, 3}));
}
