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

#include "crowdplan/learning.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>

#include "crowdplan/error.h"
#include "crowdplan/inference.h"
#include "crowdplan/parallel.h"
#include "crowdplan/rng.h"

namespace crowdplan {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Samples per E-step chunk. Fixed so the reduction order never depends on
// the thread count.
constexpr std::size_t kChunk = 256;

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// Parameters are stored as a flat sequence of probability rows of length K.
// EM state (parameters, expected counts, log-parameters) share one layout.
struct RowLayout {
  std::size_t k = 0;
  std::size_t num_rows = 0;
  std::vector<bool> fixed;  // rows held at their initial value

  std::size_t size() const { return k * num_rows; }
};

void normalize_rows(const RowLayout& layout, std::span<const double> counts,
                    double alpha, std::span<double> params) {
  const std::size_t k = layout.k;
  for (std::size_t r = 0; r < layout.num_rows; ++r) {
    if (layout.fixed[r]) continue;
    const auto row = counts.subspan(r * k, k);
    double total = 0.0;
    for (double c : row) total += c;
    const double denom = total + alpha * static_cast<double>(k);
    for (std::size_t c = 0; c < k; ++c) {
      params[r * k + c] = denom > 0.0 ? (row[c] + alpha) / denom
                                      : 1.0 / static_cast<double>(k);
    }
  }
}

double log_penalty(const RowLayout& layout, std::span<const double> params,
                   double alpha) {
  if (alpha == 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < layout.num_rows; ++r) {
    if (layout.fixed[r]) continue;
    for (std::size_t c = 0; c < layout.k; ++c) {
      total += safe_log(params[r * layout.k + c]);
    }
  }
  return alpha * total;
}

// 0.7 * identity + 0.3 * uniform, jittered by U(-0.02, 0.02), renormalized.
void init_blended_row(std::span<double> row, std::size_t diag,
                      KeyedRng& rng) {
  const double k = static_cast<double>(row.size());
  double total = 0.0;
  for (std::size_t c = 0; c < row.size(); ++c) {
    double v = (c == diag ? 0.7 : 0.0) + 0.3 / k;
    v += (rng.uniform() * 2.0 - 1.0) * 0.02;
    row[c] = std::max(v, 1e-3);
    total += row[c];
  }
  for (double& v : row) v /= total;
}

void init_uniform_row(std::span<double> row, KeyedRng& rng) {
  const double k = static_cast<double>(row.size());
  double total = 0.0;
  for (double& v : row) {
    v = 1.0 / k + (rng.uniform() * 2.0 - 1.0) * 0.02 / k;
    total += v;
  }
  for (double& v : row) v /= total;
}

// Highest-scoring assignment perm maximizing sum_a score[a][perm[a]]. Ties
// keep the lexicographically first permutation (identity when tied).
std::vector<std::size_t> best_permutation(
    const std::vector<std::vector<double>>& score) {
  const std::size_t k = score.size();
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  auto total = [&](const std::vector<std::size_t>& p) {
    double t = 0.0;
    for (std::size_t a = 0; a < k; ++a) t += score[a][p[a]];
    return t;
  };
  if (k <= 8) {
    std::vector<std::size_t> best = perm;
    double best_score = total(perm);
    while (std::next_permutation(perm.begin(), perm.end())) {
      const double s = total(perm);
      if (s > best_score + 1e-15) {
        best_score = s;
        best = perm;
      }
    }
    return best;
  }
  // Greedy matching on the largest remaining score.
  std::vector<bool> used_a(k, false), used_b(k, false);
  for (std::size_t step = 0; step < k; ++step) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < k; ++a) {
      if (used_a[a]) continue;
      for (std::size_t b = 0; b < k; ++b) {
        if (!used_b[b] && score[a][b] > best) {
          best = score[a][b];
          ba = a;
          bb = b;
        }
      }
    }
    used_a[ba] = used_b[bb] = true;
    perm[ba] = bb;
  }
  return perm;
}

std::vector<Rational> resolve_costs(std::span<const Rational> costs,
                                    std::size_t n) {
  if (costs.empty()) return std::vector<Rational>(n, Rational(1));
  if (costs.size() != n) {
    throw InputError("got " + std::to_string(costs.size()) +
                     " costs for " + std::to_string(n) + " access paths");
  }
  for (const auto& c : costs) {
    if (c <= Rational(0)) throw InputError("non-positive access path cost");
  }
  return {costs.begin(), costs.end()};
}

std::vector<AccessPathSpec> make_paths(std::span<const Rational> costs) {
  std::vector<AccessPathSpec> paths(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    paths[i].id = static_cast<int>(i);
    paths[i].cost = costs[i];
  }
  return paths;
}

// One (worker slot, label) group of identical votes.
struct VoteGroup {
  std::uint32_t slot;
  std::uint32_t label;
  double count;
};

struct EmResult {
  std::vector<double> params;
  FitReport report;
};

// Generic EM loop over a problem exposing init / estep / layout.
template <class Problem>
EmResult run_em(const Problem& problem, const EmConfig& cfg, int restart) {
  const RowLayout& layout = problem.layout();
  std::vector<double> params(layout.size());
  problem.init(restart, cfg.seed, params);
  std::vector<double> counts(layout.size());

  EmResult out;
  out.report.restart_index = restart;
  double ll = problem.estep(params, counts, cfg.threads);
  double objective = ll + log_penalty(layout, params, cfg.smoothing_alpha);
  out.report.objective_trace.push_back(objective);
  out.report.log_likelihood_trace.push_back(ll);
  for (int it = 1; it <= cfg.max_iters; ++it) {
    normalize_rows(layout, counts, cfg.smoothing_alpha, params);
    const double prev = objective;
    ll = problem.estep(params, counts, cfg.threads);
    objective = ll + log_penalty(layout, params, cfg.smoothing_alpha);
    out.report.objective_trace.push_back(objective);
    out.report.log_likelihood_trace.push_back(ll);
    out.report.iterations = it;
    if (std::isfinite(prev) &&
        std::abs(objective - prev) <=
            cfg.rel_tol * std::max(std::abs(prev), 1e-300)) {
      out.report.converged = true;
      break;
    }
  }
  out.report.final_log_likelihood = ll;
  out.report.final_objective = objective;
  out.params = std::move(params);
  return out;
}

template <class Problem>
EmResult best_of_restarts(const Problem& problem, const EmConfig& cfg) {
  std::optional<EmResult> best;
  for (int r = 0; r < cfg.restarts; ++r) {
    EmResult res = run_em(problem, cfg, r);
    if (!best || res.report.final_objective > best->report.final_objective) {
      best = std::move(res);
    }
  }
  return std::move(*best);
}

// Reduces per-chunk (log-likelihood, counts) in chunk order.
template <class ChunkFn>
double chunked_estep(std::size_t num_samples, std::size_t counts_size,
                     unsigned threads, std::span<double> counts,
                     ChunkFn&& fn) {
  const std::size_t chunks = (num_samples + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> chunk_counts(chunks);
  std::vector<double> chunk_ll(chunks, 0.0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    chunk_counts[c].assign(counts_size, 0.0);
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(num_samples, begin + kChunk);
    chunk_ll[c] = fn(begin, end, std::span<double>(chunk_counts[c]));
  });
  std::fill(counts.begin(), counts.end(), 0.0);
  double ll = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    ll += chunk_ll[c];
    for (std::size_t j = 0; j < counts_size; ++j) counts[j] += chunk_counts[c][j];
  }
  return ll;
}

// ---------------------------------------------------------------------------
// Access path model.

class ApmProblem {
 public:
  ApmProblem(const Dataset& data, bool share_workers) {
    validate_dataset(data);
    k_ = static_cast<std::size_t>(data.labels.cardinality);
    if (k_ > static_cast<std::size_t>(kMaxLabels)) {
      throw InputError("too many labels");
    }
    n_ = data.num_paths;
    if (n_ == 0) throw InputError("dataset has no access paths");
    share_ = share_workers;
    worker_ids_.resize(n_);
    path_has_votes_.assign(n_, false);
    if (!share_) {
      std::vector<std::set<std::string>> ids(n_);
      for (const auto& s : data.samples) {
        for (std::size_t i = 0; i < n_; ++i) {
          for (const auto& v : s.votes[i]) {
            if (!v.worker) {
              throw InputError("task '" + s.task_id +
                               "': per-worker learning needs worker ids");
            }
            ids[i].insert(*v.worker);
          }
        }
      }
      for (std::size_t i = 0; i < n_; ++i) {
        worker_ids_[i].assign(ids[i].begin(), ids[i].end());
      }
    }
    // Layout: prior row, then K rows of p(Z_i|Y) per path, then K rows per
    // worker slot of p(X|Z_i).
    std::size_t rows = 1 + n_ * k_;
    b_offset_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      b_offset_[i] = rows * k_;
      rows += k_ * slots(i);
    }
    layout_.k = k_;
    layout_.num_rows = rows;
    layout_.fixed.assign(rows, false);

    samples_.reserve(data.samples.size());
    for (const auto& s : data.samples) {
      Compiled c;
      c.truth = s.truth;
      for (std::size_t i = 0; i < n_; ++i) {
        if (s.votes[i].empty()) continue;
        path_has_votes_[i] = true;
        std::map<std::pair<std::uint32_t, std::uint32_t>, double> groups;
        for (const auto& v : s.votes[i]) {
          groups[{slot_of(i, v.worker), static_cast<std::uint32_t>(v.label)}] +=
              1.0;
        }
        c.path_begin.push_back(c.groups.size());
        c.paths.push_back(i);
        for (const auto& [key, count] : groups) {
          c.groups.push_back({key.first, key.second, count});
        }
      }
      c.path_begin.push_back(c.groups.size());
      samples_.push_back(std::move(c));
    }
    for (const auto& s : data.samples) {
      if (s.truth) any_truth_ = true;
    }
  }

  const RowLayout& layout() const { return layout_; }
  bool any_truth() const { return any_truth_; }

  std::vector<std::size_t> empty_paths() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!path_has_votes_[i]) out.push_back(i);
    }
    return out;
  }

  void init(int restart, std::uint64_t seed, std::span<double> params) const {
    KeyedRng rng{seed, static_cast<std::uint64_t>(restart), 0x41504dULL};
    init_uniform_row(params.subspan(0, k_), rng);
    for (std::size_t r = 1; r < layout_.num_rows; ++r) {
      const std::size_t diag = (r - 1) % k_;
      init_blended_row(params.subspan(r * k_, k_), diag, rng);
    }
  }

  double estep(std::span<const double> params, std::span<double> counts,
               unsigned threads) const {
    std::vector<double> logp(params.size());
    for (std::size_t j = 0; j < params.size(); ++j) logp[j] = safe_log(params[j]);
    return chunked_estep(
        samples_.size(), params.size(), threads, counts,
        [&](std::size_t begin, std::size_t end, std::span<double> acc) {
          double ll = 0.0;
          for (std::size_t s = begin; s < end; ++s) {
            ll += estep_sample(samples_[s], logp, acc);
          }
          return ll;
        });
  }

  ApmModel to_model(std::span<const double> params,
                    std::span<const Rational> costs,
                    const std::vector<std::string>& label_names) const {
    ApmModel m;
    m.labels.cardinality = static_cast<int>(k_);
    m.label_names = label_names;
    m.prior.assign(params.begin(), params.begin() + static_cast<long>(k_));
    m.paths = make_paths(costs);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t a_off = a_offset(i);
      m.path_cpts.emplace_back(
          k_, k_,
          std::vector<double>(params.begin() + static_cast<long>(a_off),
                              params.begin() + static_cast<long>(a_off + k_ * k_)));
      auto block = [&](std::size_t slot) {
        const std::size_t off = b_offset_[i] + slot * k_ * k_;
        return Cpt(k_, k_,
                   std::vector<double>(
                       params.begin() + static_cast<long>(off),
                       params.begin() + static_cast<long>(off + k_ * k_)));
      };
      if (share_) {
        m.worker_cpts.emplace_back(block(0));
      } else {
        WorkerMap workers;
        for (std::size_t w = 0; w < worker_ids_[i].size(); ++w) {
          workers.emplace(worker_ids_[i][w], block(w));
        }
        // A path nobody voted on still needs a well-formed entry.
        if (workers.empty()) {
          m.worker_cpts.emplace_back(Cpt::uniform(k_));
        } else {
          m.worker_cpts.emplace_back(std::move(workers));
        }
      }
    }
    return m;
  }

 private:
  struct Compiled {
    std::optional<int> truth;
    std::vector<std::size_t> paths;       // paths with at least one vote
    std::vector<std::size_t> path_begin;  // group ranges, size paths+1
    std::vector<VoteGroup> groups;
  };

  std::size_t slots(std::size_t path) const {
    return share_ ? 1 : worker_ids_[path].size();
  }

  std::uint32_t slot_of(std::size_t path,
                        const std::optional<std::string>& worker) const {
    if (share_) return 0;
    const auto& ids = worker_ids_[path];
    auto it = std::lower_bound(ids.begin(), ids.end(), *worker);
    return static_cast<std::uint32_t>(it - ids.begin());
  }

  std::size_t a_offset(std::size_t path) const { return k_ + path * k_ * k_; }

  double estep_sample(const Compiled& s, std::span<const double> logp,
                      std::span<double> acc) const {
    const std::size_t k = k_;
    const std::size_t np = s.paths.size();
    // t[p][y][z] = log p(z|y) + log p(votes|z); l[p][y] = lse_z t.
    std::vector<double> t(np * k * k);
    std::vector<double> l(np * k);
    std::array<double, kMaxLabels> evidence{};
    std::array<double, kMaxLabels> joint{};
    for (std::size_t y = 0; y < k; ++y) joint[y] = logp[y];
    for (std::size_t p = 0; p < np; ++p) {
      const std::size_t i = s.paths[p];
      std::fill_n(evidence.begin(), k, 0.0);
      for (std::size_t g = s.path_begin[p]; g < s.path_begin[p + 1]; ++g) {
        const VoteGroup& vg = s.groups[g];
        const std::size_t off = b_offset_[i] + vg.slot * k * k;
        for (std::size_t z = 0; z < k; ++z) {
          evidence[z] += vg.count * logp[off + z * k + vg.label];
        }
      }
      for (std::size_t y = 0; y < k; ++y) {
        double* row = &t[(p * k + y) * k];
        for (std::size_t z = 0; z < k; ++z) {
          row[z] = logp[a_offset(i) + y * k + z] + evidence[z];
        }
        l[p * k + y] = log_sum_exp(std::span<const double>(row, k));
        joint[y] += l[p * k + y];
      }
    }
    std::array<double, kMaxLabels> q{};
    double ll;
    if (s.truth) {
      ll = joint[static_cast<std::size_t>(*s.truth)];
      q[static_cast<std::size_t>(*s.truth)] = 1.0;
    } else {
      ll = log_sum_exp(std::span<const double>(joint.data(), k));
      if (std::isfinite(ll)) {
        for (std::size_t y = 0; y < k; ++y) q[y] = std::exp(joint[y] - ll);
      }
    }
    if (!std::isfinite(ll)) return ll;

    for (std::size_t y = 0; y < k; ++y) acc[y] += q[y];
    std::array<double, kMaxLabels> zmarg{};
    for (std::size_t p = 0; p < np; ++p) {
      const std::size_t i = s.paths[p];
      std::fill_n(zmarg.begin(), k, 0.0);
      for (std::size_t y = 0; y < k; ++y) {
        if (q[y] == 0.0 || !std::isfinite(l[p * k + y])) continue;
        const double* row = &t[(p * k + y) * k];
        for (std::size_t z = 0; z < k; ++z) {
          const double w = q[y] * std::exp(row[z] - l[p * k + y]);
          acc[a_offset(i) + y * k + z] += w;
          zmarg[z] += w;
        }
      }
      for (std::size_t g = s.path_begin[p]; g < s.path_begin[p + 1]; ++g) {
        const VoteGroup& vg = s.groups[g];
        const std::size_t off = b_offset_[i] + vg.slot * k * k;
        for (std::size_t z = 0; z < k; ++z) {
          acc[off + z * k + vg.label] += vg.count * zmarg[z];
        }
      }
    }
    return ll;
  }

  std::size_t k_ = 0;
  std::size_t n_ = 0;
  bool share_ = true;
  bool any_truth_ = false;
  RowLayout layout_;
  std::vector<std::size_t> b_offset_;
  std::vector<std::vector<std::string>> worker_ids_;
  std::vector<bool> path_has_votes_;
  std::vector<Compiled> samples_;
};

// ---------------------------------------------------------------------------
// Per-worker naive Bayes (Dawid-Skene).

class NbiProblem {
 public:
  NbiProblem(const Dataset& data, int min_votes) {
    validate_dataset(data);
    k_ = static_cast<std::size_t>(data.labels.cardinality);
    std::map<std::string, std::size_t> vote_totals;
    for (const auto& s : data.samples) {
      for (const auto& path : s.votes) {
        for (const auto& v : path) {
          if (!v.worker) {
            throw InputError("task '" + s.task_id +
                             "': NBI learning needs worker ids");
          }
          ++vote_totals[*v.worker];
        }
      }
    }
    if (vote_totals.empty()) throw InputError("dataset contains no votes");
    for (const auto& [id, total] : vote_totals) {
      workers_.push_back(id);
      sparse_.push_back(total < static_cast<std::size_t>(std::max(min_votes, 0)));
    }
    layout_.k = k_;
    layout_.num_rows = 1 + workers_.size() * k_;
    layout_.fixed.assign(layout_.num_rows, false);
    for (std::size_t w = 0; w < workers_.size(); ++w) {
      if (!sparse_[w]) continue;
      for (std::size_t y = 0; y < k_; ++y) layout_.fixed[1 + w * k_ + y] = true;
    }
    for (const auto& s : data.samples) {
      Compiled c;
      c.truth = s.truth;
      if (s.truth) any_truth_ = true;
      std::map<std::pair<std::uint32_t, std::uint32_t>, double> groups;
      for (const auto& path : s.votes) {
        for (const auto& v : path) {
          auto it = std::lower_bound(workers_.begin(), workers_.end(), *v.worker);
          const auto w = static_cast<std::uint32_t>(it - workers_.begin());
          if (sparse_[w]) continue;
          groups[{w, static_cast<std::uint32_t>(v.label)}] += 1.0;
        }
      }
      for (const auto& [key, count] : groups) {
        c.groups.push_back({key.first, key.second, count});
      }
      c.mv.assign(k_, 0.0);
      for (const auto& path : s.votes) {
        for (const auto& v : path) c.mv[static_cast<std::size_t>(v.label)] += 1.0;
      }
      samples_.push_back(std::move(c));
    }
  }

  const RowLayout& layout() const { return layout_; }
  bool any_truth() const { return any_truth_; }

  std::vector<std::string> sparse_workers() const {
    std::vector<std::string> out;
    for (std::size_t w = 0; w < workers_.size(); ++w) {
      if (sparse_[w]) out.push_back(workers_[w]);
    }
    return out;
  }

  // Restart 0 starts from majority-vote soft labels; later restarts from
  // jittered identity-biased CPTs.
  void init(int restart, std::uint64_t seed, std::span<double> params) const {
    const std::size_t k = k_;
    for (std::size_t r = 0; r < layout_.num_rows; ++r) {
      if (layout_.fixed[r]) {
        std::fill_n(params.begin() + static_cast<long>(r * k), k,
                    1.0 / static_cast<double>(k));
      }
    }
    if (restart == 0) {
      std::vector<double> counts(layout_.size(), 0.0);
      for (const auto& s : samples_) {
        std::array<double, kMaxLabels> q{};
        if (s.truth) {
          q[static_cast<std::size_t>(*s.truth)] = 1.0;
        } else {
          double total = 0.0;
          for (double c : s.mv) total += c;
          for (std::size_t y = 0; y < k; ++y) {
            q[y] = total > 0.0 ? s.mv[y] / total : 1.0 / static_cast<double>(k);
          }
        }
        accumulate(s, q, counts);
      }
      normalize_rows(layout_, counts, 1.0, params);
      return;
    }
    KeyedRng rng{seed, static_cast<std::uint64_t>(restart), 0x4e4249ULL};
    init_uniform_row(params.subspan(0, k), rng);
    for (std::size_t r = 1; r < layout_.num_rows; ++r) {
      if (layout_.fixed[r]) continue;
      init_blended_row(params.subspan(r * k, k), (r - 1) % k, rng);
    }
  }

  double estep(std::span<const double> params, std::span<double> counts,
               unsigned threads) const {
    std::vector<double> logp(params.size());
    for (std::size_t j = 0; j < params.size(); ++j) logp[j] = safe_log(params[j]);
    const std::size_t k = k_;
    return chunked_estep(
        samples_.size(), params.size(), threads, counts,
        [&](std::size_t begin, std::size_t end, std::span<double> acc) {
          double ll = 0.0;
          for (std::size_t si = begin; si < end; ++si) {
            const Compiled& s = samples_[si];
            std::array<double, kMaxLabels> joint{};
            for (std::size_t y = 0; y < k; ++y) joint[y] = logp[y];
            for (const auto& g : s.groups) {
              const std::size_t off = (1 + g.slot * k) * k;
              for (std::size_t y = 0; y < k; ++y) {
                joint[y] += g.count * logp[off + y * k + g.label];
              }
            }
            std::array<double, kMaxLabels> q{};
            double sll;
            if (s.truth) {
              sll = joint[static_cast<std::size_t>(*s.truth)];
              q[static_cast<std::size_t>(*s.truth)] = 1.0;
            } else {
              sll = log_sum_exp(std::span<const double>(joint.data(), k));
              if (std::isfinite(sll)) {
                for (std::size_t y = 0; y < k; ++y) q[y] = std::exp(joint[y] - sll);
              }
            }
            ll += sll;
            if (std::isfinite(sll)) accumulate(s, q, acc);
          }
          return ll;
        });
  }

  NbiModel to_model(std::span<const double> params,
                    std::span<const Rational> costs,
                    const std::vector<std::string>& label_names) const {
    NbiModel m;
    m.labels.cardinality = static_cast<int>(k_);
    m.label_names = label_names;
    m.prior.assign(params.begin(), params.begin() + static_cast<long>(k_));
    m.paths = make_paths(costs);
    for (std::size_t w = 0; w < workers_.size(); ++w) {
      const std::size_t off = (1 + w * k_) * k_;
      m.workers.emplace(
          workers_[w],
          Cpt(k_, k_,
              std::vector<double>(
                  params.begin() + static_cast<long>(off),
                  params.begin() + static_cast<long>(off + k_ * k_))));
      if (sparse_[w]) m.sparse.insert(workers_[w]);
    }
    return m;
  }

 private:
  struct Compiled {
    std::optional<int> truth;
    std::vector<VoteGroup> groups;  // non-sparse workers only
    std::vector<double> mv;         // label counts over all votes
  };

  void accumulate(const Compiled& s, const std::array<double, kMaxLabels>& q,
                  std::span<double> acc) const {
    const std::size_t k = k_;
    for (std::size_t y = 0; y < k; ++y) acc[y] += q[y];
    for (const auto& g : s.groups) {
      const std::size_t off = (1 + g.slot * k) * k;
      for (std::size_t y = 0; y < k; ++y) acc[off + y * k + g.label] += q[y] * g.count;
    }
  }

  std::size_t k_ = 0;
  bool any_truth_ = false;
  RowLayout layout_;
  std::vector<std::string> workers_;
  std::vector<bool> sparse_;
  std::vector<Compiled> samples_;
};

NbiModel align_nbi_labels(const NbiModel& model) {
  const auto k = static_cast<std::size_t>(model.labels.cardinality);
  std::vector<std::vector<double>> score(k, std::vector<double>(k, 0.0));
  for (const auto& [id, cpt] : model.workers) {
    if (model.sparse.count(id)) continue;
    for (std::size_t y = 0; y < k; ++y) {
      for (std::size_t p = 0; p < k; ++p) score[y][p] += cpt(y, p);
    }
  }
  const auto perm = best_permutation(score);
  NbiModel out = model;
  for (std::size_t y = 0; y < k; ++y) out.prior[perm[y]] = model.prior[y];
  for (auto& [id, cpt] : out.workers) cpt = cpt.permute_rows(perm);
  return out;
}

}  // namespace

void EmConfig::validate() const {
  if (max_iters < 1) throw InputError("max_iters must be at least 1");
  if (!(rel_tol > 0.0)) throw InputError("rel_tol must be positive");
  if (!(smoothing_alpha >= 0.0)) {
    throw InputError("smoothing_alpha must be non-negative");
  }
  if (restarts < 1) throw InputError("restarts must be at least 1");
}

namespace {

template <typename Model>
void check_shapes(const Model& model, const Dataset& data) {
  validate_dataset(data);
  if (data.labels.cardinality != model.labels.cardinality ||
      data.num_paths != model.paths.size()) {
    throw InputError("dataset has " + std::to_string(data.num_paths) +
                     " paths and " + std::to_string(data.labels.cardinality) +
                     " labels; model has " + std::to_string(model.paths.size()) +
                     " and " + std::to_string(model.labels.cardinality));
  }
}

}  // namespace

double log_likelihood(const ApmModel& model, const Dataset& data) {
  check_shapes(model, data);
  double total = 0.0;
  for (const auto& s : data.samples) {
    const auto joint = apm_log_joint(model, s);
    total += s.truth ? joint[static_cast<std::size_t>(*s.truth)]
                     : log_sum_exp(joint);
  }
  return total;
}

double log_likelihood(const NbiModel& model, const Dataset& data) {
  check_shapes(model, data);
  double total = 0.0;
  for (const auto& s : data.samples) {
    const auto joint = nbi_log_joint(model, s, UnknownWorker::kIgnore);
    total += s.truth ? joint[static_cast<std::size_t>(*s.truth)]
                     : log_sum_exp(joint);
  }
  return total;
}

ApmModel align_latent_labels(const ApmModel& model, bool align_task_labels) {
  const auto k = static_cast<std::size_t>(model.cardinality());
  ApmModel out = model;
  if (align_task_labels) {
    std::vector<std::vector<double>> score(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < model.num_paths(); ++i) {
      Cpt mean_vote;
      if (const auto* shared = std::get_if<Cpt>(&model.worker_cpts[i])) {
        mean_vote = *shared;
      } else {
        const auto& workers = std::get<WorkerMap>(model.worker_cpts[i]);
        std::vector<double> acc(k * k, 0.0);
        for (const auto& [id, cpt] : workers) {
          for (std::size_t j = 0; j < k * k; ++j) acc[j] += cpt.values()[j];
        }
        for (double& v : acc) v /= static_cast<double>(workers.size());
        mean_vote = Cpt(k, k, std::move(acc));
      }
      const Cpt marginal = model.path_cpts[i].compose(mean_vote);
      for (std::size_t y = 0; y < k; ++y) {
        for (std::size_t p = 0; p < k; ++p) score[y][p] += marginal(y, p);
      }
    }
    const auto perm = best_permutation(score);
    for (std::size_t y = 0; y < k; ++y) out.prior[perm[y]] = model.prior[y];
    for (auto& a : out.path_cpts) a = a.permute_rows(perm);
  }
  for (std::size_t i = 0; i < out.num_paths(); ++i) {
    const Cpt& a = out.path_cpts[i];
    std::vector<std::vector<double>> score(k, std::vector<double>(k, 0.0));
    for (std::size_t z = 0; z < k; ++z) {
      for (std::size_t p = 0; p < k; ++p) score[z][p] = a(p, z);
    }
    const auto perm = best_permutation(score);
    out.path_cpts[i] = a.permute_cols(perm);
    if (auto* shared = std::get_if<Cpt>(&out.worker_cpts[i])) {
      *shared = shared->permute_rows(perm);
    } else {
      for (auto& [id, cpt] : std::get<WorkerMap>(out.worker_cpts[i])) {
        cpt = cpt.permute_rows(perm);
      }
    }
  }
  return out;
}

ApmFit fit_em(const Dataset& data, bool share_workers, const EmConfig& cfg,
              std::span<const Rational> costs) {
  cfg.validate();
  const auto resolved = resolve_costs(costs, data.num_paths);
  const ApmProblem problem(data, share_workers);
  EmResult res = best_of_restarts(problem, cfg);
  ApmFit fit;
  fit.model = align_latent_labels(
      problem.to_model(res.params, resolved, data.label_names),
      !problem.any_truth());
  fit.report = std::move(res.report);
  fit.report.empty_paths = problem.empty_paths();
  return fit;
}

ApmFit fit_supervised(const Dataset& data, bool share_workers,
                      const EmConfig& cfg, std::span<const Rational> costs) {
  for (const auto& s : data.samples) {
    if (!s.truth) {
      throw InputError("supervised fit: task '" + s.task_id +
                       "' has no truth");
    }
  }
  return fit_em(data, share_workers, cfg, costs);
}

NbiFit fit_nbi(const Dataset& data, const EmConfig& cfg,
               std::span<const Rational> costs) {
  cfg.validate();
  const auto resolved = resolve_costs(costs, data.num_paths);
  const NbiProblem problem(data, cfg.min_votes);
  EmResult res = best_of_restarts(problem, cfg);
  NbiFit fit;
  fit.model = problem.to_model(res.params, resolved, data.label_names);
  if (!problem.any_truth()) fit.model = align_nbi_labels(fit.model);
  fit.report = std::move(res.report);
  fit.report.sparse_workers = problem.sparse_workers();
  return fit;
}

}  // namespace crowdplan
