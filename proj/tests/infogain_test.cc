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
#include <limits>
#include <random>

#include "crowdplan/error.h"
#include "doctest.h"
#include "test_support.h"

using namespace crowdplan;
using namespace crowdplan::testing;

namespace {

IgConfig exact_cfg() {
  IgConfig c;
  c.mode = IgMode::kExact;
  return c;
}

ApmModel binary_070() {
  return make_shared_model({0.5, 0.5}, {cpt2(0.8, 0.8)}, {cpt2(0.9, 0.9)});
}

}  // namespace

TEST_CASE("prior entropy") {
  auto m = binary_070();
  CHECK(prior_entropy(m) == doctest::Approx(std::log(2.0)));
  m.prior = {1.0, 0.0};
  CHECK(prior_entropy(m) == 0.0);
  m.prior = {0.9, 0.1};
  const double want = -(0.9 * std::log(0.9) + 0.1 * std::log(0.1));
  CHECK(prior_entropy(m) == doctest::Approx(want).epsilon(1e-14));
  CHECK(prior_entropy(m) == doctest::Approx(0.3251).epsilon(1e-4));
}

TEST_CASE("exact conditional entropy base cases") {
  const auto m = binary_070();
  CHECK(exact_conditional_entropy(m, AccessPlan({0})) == doctest::Approx(std::log(2.0)));
  CHECK(information_gain(m, AccessPlan({0}), exact_cfg()).value == 0.0);

  const auto det = make_shared_model({0.5, 0.5}, {Cpt::identity(2)}, {Cpt::identity(2)});
  CHECK(exact_conditional_entropy(det, AccessPlan({1})) == doctest::Approx(0.0));
  CHECK(information_gain(det, AccessPlan({1}), exact_cfg()).value ==
        doctest::Approx(std::log(2.0)));

  const double h = exact_conditional_entropy(m, AccessPlan({1}));
  CHECK(h == doctest::Approx(oracle_conditional_entropy(m, AccessPlan({1}))).epsilon(1e-13));
  // The single vote is 1 with probability 0.74 given y = 1, so the
  // posterior is (0.26, 0.74) or (0.74, 0.26): H(Y|S) = H_b(0.74).
  const double hb = -(0.74 * std::log(0.74) + 0.26 * std::log(0.26));
  CHECK(h == doctest::Approx(hb).epsilon(1e-13));
  CHECK(h == doctest::Approx(0.57306).epsilon(1e-5));
  CHECK(information_gain(m, AccessPlan({1}), exact_cfg()).value ==
        doctest::Approx(std::log(2.0) - hb).epsilon(1e-12));
}

TEST_CASE("count-vector enumeration equals raw assignment enumeration") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = trial % 3 == 0 ? 3 : 2;
    const int n = 1 + static_cast<int>(gen() % 3);
    const auto m = random_model(gen, n, k);
    auto plan = AccessPlan::zeros(static_cast<std::size_t>(n));
    const int budget = static_cast<int>(gen() % (k == 3 ? 5 : 7));
    for (int v = 0; v < budget; ++v) ++plan.counts[gen() % static_cast<unsigned>(n)];
    const double got = exact_conditional_entropy(m, plan);
    const double want = oracle_conditional_entropy(m, plan);
    CHECK(std::abs(got - want) <= 1e-10);
  }
}

TEST_CASE("exact information gain is bounded and order invariant") {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 40; ++trial) {
    const auto m = random_model(gen, 3, 2);
    const AccessPlan plan({static_cast<std::int64_t>(gen() % 4), static_cast<std::int64_t>(gen() % 4),
                           static_cast<std::int64_t>(gen() % 4)});
    const auto ig = information_gain(m, plan, exact_cfg());
    CHECK(ig.value >= 0.0);
    CHECK(ig.value <= prior_entropy(m) + 1e-9);
    // Reverse the path order of both model and plan.
    ApmModel r = m;
    std::reverse(r.paths.begin(), r.paths.end());
    std::reverse(r.path_cpts.begin(), r.path_cpts.end());
    std::reverse(r.worker_cpts.begin(), r.worker_cpts.end());
    AccessPlan rp = plan;
    std::reverse(rp.counts.begin(), rp.counts.end());
    CHECK(information_gain(r, rp, exact_cfg()).value == doctest::Approx(ig.value).epsilon(1e-12));
  }
}

TEST_CASE("marginal gain of one more vote on a symmetric path shrinks") {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> acc(0.5, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double a = acc(gen), b = acc(gen);
    const auto m = make_shared_model(random_simplex(gen, 2, 0.1), {cpt2(a, a)}, {cpt2(b, b)});
    double last = std::numeric_limits<double>::infinity();
    double prev_ig = 0.0;
    for (std::int64_t votes = 1; votes <= 10; ++votes) {
      const double ig = information_gain(m, AccessPlan({votes}), exact_cfg()).value;
      const double gain = ig - prev_ig;
      CHECK(gain <= last + 1e-12);
      CHECK(gain >= -1e-12);
      last = gain;
      prev_ig = ig;
    }
  }
}

TEST_CASE("exact enumeration limit") {
  const auto m = make_shared_model({0.5, 0.5}, {cpt2(0.8, 0.8), cpt2(0.7, 0.7)},
                                   {cpt2(0.9, 0.9), cpt2(0.9, 0.9)});
  // (10+1) * (10+1) = 121 count-vector configurations.
  CHECK(exact_configurations(m, AccessPlan({10, 10})) == 121.0);
  CHECK_THROWS_AS(exact_conditional_entropy(m, AccessPlan({10, 10}), 100.0), LimitError);
  IgConfig cfg;
  cfg.exact_limit = 100.0;
  cfg.num_samples = 2000;
  CHECK(information_gain(m, AccessPlan({10, 10}), cfg).mode == IgMode::kSampled);
  CHECK(information_gain(m, AccessPlan({5, 5}), cfg).mode == IgMode::kExact);
  cfg.mode = IgMode::kExact;
  CHECK_THROWS_AS(information_gain(m, AccessPlan({10, 10}), cfg), LimitError);
  CHECK_THROWS_AS(parse_ig_mode("approx"), InputError);
}

TEST_CASE("sampled conditional entropy") {
  const auto m = binary_070();
  IgConfig cfg;
  cfg.mode = IgMode::kSampled;
  cfg.num_samples = 20000;
  cfg.seed = 42;
  const auto empty = sampled_conditional_entropy(m, AccessPlan({0}), cfg);
  CHECK(empty.value == doctest::Approx(std::log(2.0)));
  CHECK(empty.stderr_value == 0.0);

  const auto a = sampled_conditional_entropy(m, AccessPlan({3}), cfg);
  const auto b = sampled_conditional_entropy(m, AccessPlan({3}), cfg);
  CHECK(a.value == b.value);
  CHECK(a.stderr_value > 0.0);
  cfg.threads = 4;
  const auto c = sampled_conditional_entropy(m, AccessPlan({3}), cfg);
  CHECK(c.value == a.value);
  CHECK(c.stderr_value == a.stderr_value);
  cfg.seed = 43;
  CHECK(sampled_conditional_entropy(m, AccessPlan({3}), cfg).value != a.value);
  CHECK(std::abs(a.value - exact_conditional_entropy(m, AccessPlan({3}))) < 5 * a.stderr_value + 1e-3);
  cfg.num_samples = 0;
  CHECK_THROWS_AS(sampled_conditional_entropy(m, AccessPlan({3}), cfg), InputError);
}

TEST_CASE("sampled estimate of the single-vote case is within 0.02 nats") {
  const auto m = binary_070();
  const double exact = exact_conditional_entropy(m, AccessPlan({1}));
  IgConfig cfg;
  cfg.mode = IgMode::kSampled;
  cfg.num_samples = 50000;
  int within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    cfg.seed = seed;
    within += std::abs(sampled_conditional_entropy(m, AccessPlan({1}), cfg).value - exact) <= 0.02;
  }
  CHECK(within >= 95);
}

TEST_CASE("marginal gain can grow when a path's worker table is asymmetric") {
  // One sharp and one noisy worker row: a single vote barely identifies the
  // latent path state, two votes do.
  const auto m = make_shared_model({0.0998, 0.9002}, {cpt2(0.5407, 0.9376)},
                                   {cpt2(0.9709, 0.6309)});
  const double ig1 = oracle_entropy(m.prior) - oracle_conditional_entropy(m, AccessPlan({1}));
  const double ig2 = oracle_entropy(m.prior) - oracle_conditional_entropy(m, AccessPlan({2}));
  CHECK(ig2 - ig1 > ig1);
  CHECK(information_gain(m, AccessPlan({1}), exact_cfg()).value == doctest::Approx(ig1).epsilon(1e-12));
  CHECK(information_gain(m, AccessPlan({2}), exact_cfg()).value == doctest::Approx(ig2).epsilon(1e-12));
  const auto padded = make_shared_model({0.0998, 0.9002}, {cpt2(0.5407, 0.9376), cpt2(0.8, 0.8)},
                                        {cpt2(0.9709, 0.6309), cpt2(0.9, 0.9)});
  SubmodularityOptions opts;
  opts.max_votes_per_path = 2;
  const auto report = check_submodularity(padded, 200, 1, opts);
  CHECK_FALSE(report.violations.empty());
  CHECK(report.worst_margin < 0.0);
}

TEST_CASE("submodularity checker on symmetric tables") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> acc(0.5, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Cpt> pc, wc;
    for (int i = 0; i < 3; ++i) {
      const double a = acc(gen), b = acc(gen);
      pc.push_back(cpt2(a, a));
      wc.push_back(cpt2(b, b));
    }
    const auto m = make_shared_model(random_simplex(gen, 2, 0.1), pc, wc);
    const auto report = check_submodularity(m, 40, static_cast<std::uint64_t>(trial));
    CHECK(report.trials == 40);
    CHECK(report.violations.empty());
    CHECK(report.monotonicity_violations.empty());
    CHECK(report.worst_margin >= -1e-9);
  }
  // S = S' gives identical gains, a zero margin.
  const auto m = binary_070();
  const double g1 = information_gain(m, AccessPlan({3}), exact_cfg()).value -
                    information_gain(m, AccessPlan({2}), exact_cfg()).value;
  const double g2 = information_gain(m, AccessPlan({3}), exact_cfg()).value -
                    information_gain(m, AccessPlan({2}), exact_cfg()).value;
  CHECK(g1 - g2 == 0.0);
}
