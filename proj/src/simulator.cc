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

#include "crowdplan/simulator.h"

#include <algorithm>
#include <numeric>

#include "crowdplan/error.h"
#include "crowdplan/rng.h"

namespace crowdplan {
namespace {

constexpr std::uint64_t kTaskTag = 0x7461736bULL;
constexpr std::uint64_t kPathTag = 0x70617468ULL;
constexpr std::uint64_t kVoteTag = 0x766f7465ULL;
constexpr std::uint64_t kWorkerTag = 0x776f726bULL;
constexpr std::uint64_t kInjectTag = 0x696e6aULL;

std::string task_name(std::int64_t index, std::int64_t total) {
  const std::string digits = std::to_string(index);
  const std::size_t width =
      std::max<std::size_t>(6, std::to_string(std::max<std::int64_t>(total - 1, 0)).size());
  return "t" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

// First `count` entries of a keyed Fisher-Yates shuffle of [0, pool).
std::vector<std::size_t> draw_distinct(std::size_t pool, std::size_t count,
                                       KeyedRng& rng) {
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t pick = j + static_cast<std::size_t>(rng.below(pool - j));
    std::swap(idx[j], idx[pick]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace

Dataset generate(const ApmModel& model, const AccessPlan& plan_per_task,
                 std::int64_t num_tasks, std::uint64_t seed,
                 const GenerateOptions& opts) {
  require_valid(model);
  if (plan_per_task.size() != model.num_paths()) {
    throw InputError("plan length does not match the number of paths");
  }
  if (num_tasks < 0) throw InputError("num_tasks must be non-negative");
  const std::size_t n = model.num_paths();
  for (std::size_t i = 0; i < n; ++i) {
    if (plan_per_task.counts[i] < 0) throw InputError("negative vote count");
    if (const auto* workers = std::get_if<WorkerMap>(&model.worker_cpts[i])) {
      if (workers->size() < static_cast<std::size_t>(plan_per_task.counts[i])) {
        throw InputError("path " + std::to_string(i) + " has only " +
                         std::to_string(workers->size()) +
                         " workers for " +
                         std::to_string(plan_per_task.counts[i]) +
                         " votes per task");
      }
    }
  }

  Dataset out;
  out.labels = model.labels;
  out.label_names = model.label_names;
  out.num_paths = n;
  out.samples.resize(static_cast<std::size_t>(num_tasks));
  for (std::int64_t t = 0; t < num_tasks; ++t) {
    const auto task = static_cast<std::uint64_t>(t);
    TaskSample& s = out.samples[static_cast<std::size_t>(t)];
    s.task_id = task_name(t, num_tasks);
    KeyedRng task_rng{seed, kTaskTag, task};
    const int y = static_cast<int>(task_rng.categorical(model.prior));
    s.truth = y;
    s.votes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto votes = static_cast<std::size_t>(plan_per_task.counts[i]);
      if (votes == 0) continue;
      KeyedRng path_rng{seed, kPathTag, task, i};
      const std::size_t z =
          path_rng.categorical(model.path_cpts[i].row(static_cast<std::size_t>(y)));
      KeyedRng worker_rng{seed, kWorkerTag, task, i};
      const WorkerMap* workers = std::get_if<WorkerMap>(&model.worker_cpts[i]);
      std::vector<const std::pair<const std::string, Cpt>*> chosen;
      std::vector<std::string> pool_ids;
      if (workers != nullptr) {
        std::vector<const std::pair<const std::string, Cpt>*> all;
        for (const auto& entry : *workers) all.push_back(&entry);
        for (std::size_t idx : draw_distinct(all.size(), votes, worker_rng)) {
          chosen.push_back(all[idx]);
        }
      } else if (opts.worker_pool > 0) {
        const auto pool = static_cast<std::size_t>(opts.worker_pool);
        std::vector<std::size_t> ids;
        if (pool >= votes) {
          ids = draw_distinct(pool, votes, worker_rng);
        } else {
          for (std::size_t j = 0; j < votes; ++j) ids.push_back(worker_rng.below(pool));
        }
        for (std::size_t w : ids) {
          pool_ids.push_back("p" + std::to_string(i) + "w" + std::to_string(w));
        }
      }
      s.votes[i].resize(votes);
      for (std::size_t j = 0; j < votes; ++j) {
        KeyedRng vote_rng{seed, kVoteTag, task, i, j};
        Vote& v = s.votes[i][j];
        const Cpt& cpt = workers != nullptr ? chosen[j]->second
                                            : std::get<Cpt>(model.worker_cpts[i]);
        v.label = static_cast<int>(vote_rng.categorical(cpt.row(z)));
        if (workers != nullptr) {
          v.worker = chosen[j]->first;
        } else if (!pool_ids.empty()) {
          v.worker = pool_ids[j];
        }
      }
    }
  }
  return out;
}

Dataset inject_correlation(const Dataset& data, double p, std::uint64_t seed,
                           InjectionStats* stats) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InputError("injection probability must lie in [0, 1]");
  }
  const auto k = static_cast<std::size_t>(data.labels.cardinality);
  Dataset out = data;
  InjectionStats local;
  for (auto& s : out.samples) {
    const std::uint64_t task_key = hash_string(s.task_id);
    for (std::size_t i = 0; i < s.votes.size(); ++i) {
      std::vector<std::int64_t> tally(k, 0);
      for (std::size_t j = 0; j < s.votes[i].size(); ++j) {
        Vote& v = s.votes[i][j];
        if (j > 0) {
          ++local.eligible;
          KeyedRng rng{seed, kInjectTag, task_key, i, j};
          if (rng.uniform() < p) {
            ++local.followed;
            const auto top = std::max_element(tally.begin(), tally.end());
            const bool strict =
                std::count(tally.begin(), tally.end(), *top) == 1;
            const int majority = static_cast<int>(top - tally.begin());
            if (strict && majority != v.label) {
              v.label = majority;
              ++local.changed;
            }
          }
        }
        ++tally[static_cast<std::size_t>(v.label)];
      }
    }
  }
  if (stats != nullptr) *stats = local;
  return out;
}

std::vector<WorkerAccuracy> worker_accuracies(const Dataset& data) {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> tally;
  for (const auto& s : data.samples) {
    if (!s.truth) continue;
    for (const auto& path : s.votes) {
      for (const auto& v : path) {
        if (!v.worker) continue;
        auto& [correct, total] = tally[*v.worker];
        correct += v.label == *s.truth ? 1 : 0;
        ++total;
      }
    }
  }
  std::vector<WorkerAccuracy> out;
  out.reserve(tally.size());
  for (const auto& [id, ct] : tally) {
    out.push_back({id, static_cast<double>(ct.first) /
                           static_cast<double>(ct.second)});
  }
  return out;
}

std::map<std::string, int> quantile_paths(std::vector<WorkerAccuracy> workers,
                                          int num_paths) {
  if (num_paths < 1) throw InputError("num_paths must be at least 1");
  if (workers.size() < static_cast<std::size_t>(num_paths)) {
    throw InputError("fewer workers (" + std::to_string(workers.size()) +
                     ") than paths (" + std::to_string(num_paths) + ")");
  }
  std::sort(workers.begin(), workers.end(),
            [](const WorkerAccuracy& a, const WorkerAccuracy& b) {
              return a.accuracy != b.accuracy ? a.accuracy < b.accuracy
                                              : a.worker < b.worker;
            });
  std::map<std::string, int> out;
  const auto total = workers.size();
  for (std::size_t rank = 0; rank < total; ++rank) {
    out[workers[rank].worker] = static_cast<int>(
        rank * static_cast<std::size_t>(num_paths) / total);
  }
  return out;
}

Dataset assign_paths(const Dataset& data,
                     const std::map<std::string, int>& assignment,
                     int num_paths) {
  Dataset out;
  out.labels = data.labels;
  out.label_names = data.label_names;
  out.num_paths = static_cast<std::size_t>(num_paths);
  for (const auto& s : data.samples) {
    TaskSample t;
    t.task_id = s.task_id;
    t.truth = s.truth;
    t.votes.resize(out.num_paths);
    for (const auto& path : s.votes) {
      for (const auto& v : path) {
        if (!v.worker) continue;
        auto it = assignment.find(*v.worker);
        if (it == assignment.end()) continue;
        t.votes.at(static_cast<std::size_t>(it->second)).push_back(v);
      }
    }
    out.samples.push_back(std::move(t));
  }
  return out;
}

}  // namespace crowdplan
