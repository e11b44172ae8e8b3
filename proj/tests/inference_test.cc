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
#include <random>

#include "crowdplan/error.h"
#include "doctest.h"
#include "test_support.h"

using namespace crowdplan;
using namespace crowdplan::testing;

TEST_CASE("majority vote") {
  const LabelSpace k2{2};
  std::vector<int> votes{1, 1, 0};
  auto p = mv_predict(k2, votes);
  CHECK(p.prediction == 1);
  CHECK(p.confidence == doctest::Approx(2.0 / 3.0));
  p = mv_predict(k2, std::vector<int>{});
  CHECK(p.prediction == 0);
  CHECK(p.probs[0] == 0.5);
  p = mv_predict(k2, std::vector<int>{0, 1});
  CHECK(p.prediction == 0);
  CHECK_THROWS_AS(mv_predict(k2, std::vector<int>{2}), InputError);
}

TEST_CASE("naive Bayes over individual workers") {
  const std::vector<double> prior{0.5, 0.5};
  const std::vector<Cpt> cpts{Cpt::symmetric(2, 0.9), Cpt::symmetric(2, 0.9)};
  const std::vector<WorkerVote> votes{{0, 1}, {1, 1}};
  const auto p = nbi_posterior(prior, cpts, votes);
  // Full joint over (Y, X1, X2): 0.5*0.9*0.9 vs 0.5*0.1*0.1.
  const double j1 = 0.5 * 0.9 * 0.9, j0 = 0.5 * 0.1 * 0.1;
  CHECK(p.probs[1] == doctest::Approx(j1 / (j0 + j1)).epsilon(1e-12));
  CHECK(p.probs[1] == doctest::Approx(0.98780).epsilon(1e-5));

  const std::vector<double> skew{0.3, 0.7};
  const auto none = nbi_posterior(skew, cpts, std::vector<WorkerVote>{});
  CHECK(none.probs[0] == doctest::Approx(0.3));
  const std::vector<Cpt> ident{Cpt::identity(2)};
  const auto sure = nbi_posterior(prior, ident, std::vector<WorkerVote>{{0, 0}});
  CHECK(sure.probs[0] == 1.0);
  CHECK_THROWS_AS(nbi_posterior(prior, ident, std::vector<WorkerVote>{{1, 0}}),
                  InputError);
}

TEST_CASE("NBI model posterior reports unknown workers") {
  NbiModel m;
  m.labels.cardinality = 2;
  m.prior = {0.5, 0.5};
  m.paths = {AccessPathSpec{0, Rational(1), ""}};
  m.workers["a"] = Cpt::symmetric(2, 0.8);
  TaskSample s;
  s.votes = {{Vote{"a", 1}, Vote{"b", 1}}};
  CHECK_THROWS_AS(nbi_posterior(m, s, UnknownWorker::kError), InputError);
  const auto p = nbi_posterior(m, s, UnknownWorker::kIgnore);
  CHECK(p.probs[1] == doctest::Approx(0.8));
}

TEST_CASE("single path access path posterior") {
  const auto m = make_shared_model({0.5, 0.5}, {cpt2(0.8, 0.8)}, {cpt2(0.9, 0.9)});
  const auto p = apm_posterior(m, anon_sample({{1}}));
  // p(x=1|y=1) = 0.8*0.9 + 0.2*0.1.
  CHECK(p.probs[1] == doctest::Approx(0.74).epsilon(1e-12));
  CHECK(p.probs[1] == doctest::Approx(oracle_posterior(m, anon_sample({{1}}))[1]).epsilon(1e-13));
  const auto prior_only = apm_posterior(m, anon_sample({{}}));
  CHECK(prior_only.probs[0] == 0.5);
  CHECK_FALSE(prior_only.degenerate_evidence);
}

TEST_CASE("naive access path posterior uses the marginal vote table") {
  const auto m = make_shared_model({0.5, 0.5}, {Cpt::identity(2)}, {cpt2(0.9, 0.9)});
  const auto s = anon_sample({{1, 1}});
  const auto naive = nbap_posterior(m, s);
  CHECK(naive.probs[1] == doctest::Approx(0.81 / 0.82).epsilon(1e-12));
  // With a deterministic path layer the two structures coincide.
  CHECK(apm_posterior(m, s).probs[1] == doctest::Approx(naive.probs[1]).epsilon(1e-12));
  // Any uncertainty in the path layer makes the access path model less
  // confident on agreeing votes.
  const auto noisy = make_shared_model({0.5, 0.5}, {cpt2(0.95, 0.95)}, {cpt2(0.9, 0.9)});
  const auto pn = nbap_posterior(noisy, s);
  const auto pa = apm_posterior(noisy, s);
  CHECK(pa.confidence < pn.confidence);
  CHECK(nbap_posterior(m, anon_sample({{}})).probs[1] == 0.5);
}

TEST_CASE("impossible evidence falls back to the prior") {
  const auto m = make_shared_model({0.4, 0.6}, {Cpt::identity(2), Cpt::identity(2)},
                                   {Cpt::identity(2), Cpt::identity(2)});
  const auto p = apm_posterior(m, anon_sample({{0}, {1}}));
  CHECK(p.degenerate_evidence);
  CHECK(p.probs[0] == 0.4);
  CHECK(p.prediction == 1);
}

TEST_CASE("access path posterior matches full joint enumeration") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 3);
    const auto m = random_model(gen, n, 2);
    TaskSample s;
    s.votes.resize(static_cast<std::size_t>(n));
    const int votes = static_cast<int>(gen() % 5);
    for (int v = 0; v < votes; ++v) {
      s.votes[gen() % static_cast<unsigned>(n)].push_back(Vote{{}, static_cast<int>(gen() % 2)});
    }
    const auto got = apm_posterior(m, s);
    const auto want = oracle_posterior(m, s);
    for (int y = 0; y < 2; ++y) CHECK(std::abs(got.probs[y] - want[y]) <= 1e-10);
  }
}

TEST_CASE("posterior with three labels and worker tables matches enumeration") {
  std::mt19937_64 gen(11);
  auto m = random_model(gen, 2, 3);
  WorkerMap workers{{"u", random_cpt(gen, 3)}, {"v", random_cpt(gen, 3)}};
  m.worker_cpts[1] = workers;
  TaskSample s;
  s.votes = {{Vote{{}, 2}, Vote{{}, 0}}, {Vote{"u", 1}, Vote{"v", 2}, Vote{"u", 1}}};
  const auto got = apm_posterior(m, s);
  const auto want = oracle_posterior(m, s);
  for (int y = 0; y < 3; ++y) CHECK(got.probs[y] == doctest::Approx(want[y]).epsilon(1e-12));
  s.votes[1].push_back(Vote{"w", 0});
  CHECK_THROWS_AS(apm_posterior(m, s), InputError);
}

TEST_CASE("vote order within a path does not change the posterior bitwise") {
  std::mt19937_64 gen(3);
  auto m = random_model(gen, 2, 3);
  WorkerMap workers;
  for (const char* id : {"a", "b", "c", "d"}) workers[id] = random_cpt(gen, 3);
  m.worker_cpts[0] = workers;
  TaskSample s;
  s.votes = {{Vote{"a", 0}, Vote{"b", 2}, Vote{"c", 1}, Vote{"d", 2}},
             {Vote{{}, 1}, Vote{{}, 0}, Vote{{}, 1}}};
  const auto base = apm_posterior(m, s);
  for (int t = 0; t < 20; ++t) {
    TaskSample shuffled = s;
    for (auto& path : shuffled.votes) std::shuffle(path.begin(), path.end(), gen);
    const auto p = apm_posterior(m, shuffled);
    CHECK(p.probs == base.probs);
  }
}

TEST_CASE("latent path variable damps confidence growth") {
  const auto m = make_shared_model({0.5, 0.5}, {cpt2(0.85, 0.8)}, {cpt2(0.9, 0.75)});
  double last_gap = 0.0;
  for (int votes = 2; votes <= 12; ++votes) {
    const auto s = anon_sample({std::vector<int>(static_cast<std::size_t>(votes), 1)});
    const double gap = nbap_posterior(m, s).confidence - apm_posterior(m, s).confidence;
    CHECK(gap > 0.0);
    CHECK(gap >= last_gap - 1e-15);
    last_gap = gap;
  }
}

TEST_CASE("agreeing votes never lower the predicted label's mass") {
  const auto m = make_shared_model({0.35, 0.65}, {cpt2(0.8, 0.8)}, {cpt2(0.7, 0.7)});
  std::vector<int> votes{0, 1, 0};
  for (int step = 0; step < 8; ++step) {
    const auto before = apm_posterior(m, anon_sample({votes}));
    votes.push_back(before.prediction);
    const auto after = apm_posterior(m, anon_sample({votes}));
    CHECK(after.probs[before.prediction] >= before.probs[before.prediction] - 1e-15);
  }
}

TEST_CASE("prediction dispatch") {
  const auto m = make_shared_model({0.5, 0.5}, {cpt2(0.8, 0.8)}, {cpt2(0.9, 0.9)});
  const auto s = anon_sample({{1, 0, 1}});
  const AnyModel any = m;
  CHECK(predict(ModelKind::kMv, any, s).confidence == doctest::Approx(2.0 / 3.0));
  CHECK(predict(ModelKind::kApm, any, s).probs == apm_posterior(m, s).probs);
  CHECK(predict(ModelKind::kNbap, any, s).probs == nbap_posterior(m, s).probs);
  CHECK_THROWS_AS(parse_model_kind("bayes"), InputError);
  CHECK(parse_model_kind("nbap") == ModelKind::kNbap);
}

TEST_CASE("ties resolve to the lowest label") {
  const auto p = Posterior::from_probs({0.25, 0.375, 0.375});
  CHECK(p.prediction == 1);
  CHECK(entropy(std::vector<double>{0.5, 0.5}) == doctest::Approx(std::log(2.0)));
  CHECK(log_sum_exp(std::vector<double>{std::log(0.25), std::log(0.75)}) ==
        doctest::Approx(0.0).epsilon(1e-15));
}
