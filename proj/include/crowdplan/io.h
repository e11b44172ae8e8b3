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

// Model JSON and votes CSV file formats.
//
// Model file:
//   {"kind": "apm" | "nbap" | "nbi",
//    "labels": ["no", "yes"] | 2,
//    "prior": [...],
//    "paths": [{"id": 0, "name": "", "cost": "2/1",
//               "path_cpt": [[...]],
//               "shared_cpt": [[...]] | "worker_cpts": {"id": [[...]]}}],
//    "workers": {...}, "sparse": [...]}          // nbi only
//
// Votes CSV header: task_id,path_id,worker_id,vote,truth. worker_id and
// truth may be empty; a row with empty path_id and vote declares a task
// without votes.

#ifndef CROWDPLAN_IO_H_
#define CROWDPLAN_IO_H_

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "crowdplan/inference.h"
#include "crowdplan/model.h"

namespace crowdplan {

struct ModelFile {
  ModelKind kind = ModelKind::kApm;
  AnyModel model;
};

std::string model_to_json(const ModelFile& file);
ModelFile model_from_json(std::string_view text);

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

inline constexpr std::string_view kVotesHeader =
    "task_id,path_id,worker_id,vote,truth";

struct VotesReadOptions {
  // Fixed label strings (dense id = index). When empty, labels are mapped in
  // first-seen order.
  std::vector<std::string> labels;
  // Path count to enforce; otherwise max path_id + 1.
  std::optional<std::size_t> num_paths;
  std::string source = "votes";
};

Dataset read_votes_csv(std::istream& in, const VotesReadOptions& opts = {});
Dataset read_votes_file(const std::filesystem::path& path,
                        VotesReadOptions opts = {});

void write_votes_csv(std::ostream& out, const Dataset& data);

// Label strings of a model or dataset ("0".."K-1" when unnamed).
std::vector<std::string> label_strings(const std::vector<std::string>& names,
                                       int cardinality);

}  // namespace crowdplan

#endif  // CROWDPLAN_IO_H_
