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

#include "crowdplan/io.h"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "crowdplan/error.h"
#include "json.hpp"

namespace crowdplan {
namespace {

using nlohmann::json;

json cpt_json(const Cpt& cpt) { return cpt.to_rows(); }

Cpt cpt_from(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": CPT must be an array of rows");
  try {
    return Cpt::from_rows(j.get<std::vector<std::vector<double>>>());
  } catch (const json::exception& e) {
    throw InputError(where + ": " + e.what());
  }
}

std::string cost_string(const Rational& r) {
  return std::to_string(r.num()) + "/" + std::to_string(r.den());
}

json labels_json(const std::vector<std::string>& names, int k) {
  if (names.empty()) return k;
  return names;
}

void read_labels(const json& j, LabelSpace& labels,
                 std::vector<std::string>& names) {
  if (j.is_number_integer()) {
    labels.cardinality = j.get<int>();
    names.clear();
  } else if (j.is_array()) {
    names = j.get<std::vector<std::string>>();
    labels.cardinality = static_cast<int>(names.size());
  } else {
    throw InputError("model 'labels' must be an integer or string array");
  }
}

std::vector<AccessPathSpec> read_path_specs(const json& paths) {
  std::vector<AccessPathSpec> out;
  for (const auto& p : paths) {
    AccessPathSpec path_spec;
    path_spec.id = p.at("id").get<int>();
    path_spec.name = p.value("name", std::string());
    const auto& cost = p.at("cost");
    path_spec.cost = cost.is_string() ? Rational::parse(cost.get<std::string>())
                                 : Rational(cost.get<std::int64_t>());
    out.push_back(std::move(path_spec));
  }
  return out;
}

// RFC 4180 style split of one line.
std::vector<std::string> split_csv(std::string_view line, bool& ok) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  ok = true;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) ok = false;
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::vector<std::string> label_strings(const std::vector<std::string>& names,
                                       int cardinality) {
  if (!names.empty()) return names;
  std::vector<std::string> out;
  for (int k = 0; k < cardinality; ++k) out.push_back(std::to_string(k));
  return out;
}

std::string model_to_json(const ModelFile& file) {
  json j;
  j["kind"] = std::string(model_kind_name(file.kind));
  if (const auto* apm = std::get_if<ApmModel>(&file.model)) {
    if (file.kind != ModelKind::kApm && file.kind != ModelKind::kNbap) {
      throw InputError("access path model saved with kind '" +
                       std::string(model_kind_name(file.kind)) + "'");
    }
    j["labels"] = labels_json(apm->label_names, apm->cardinality());
    j["prior"] = apm->prior;
    json paths = json::array();
    for (std::size_t i = 0; i < apm->num_paths(); ++i) {
      json p;
      p["id"] = apm->paths[i].id;
      p["name"] = apm->paths[i].name;
      p["cost"] = cost_string(apm->paths[i].cost);
      p["path_cpt"] = cpt_json(apm->path_cpts[i]);
      if (const auto* shared = std::get_if<Cpt>(&apm->worker_cpts[i])) {
        p["shared_cpt"] = cpt_json(*shared);
      } else {
        json workers = json::object();
        for (const auto& [id, cpt] : std::get<WorkerMap>(apm->worker_cpts[i])) {
          workers[id] = cpt_json(cpt);
        }
        p["worker_cpts"] = std::move(workers);
      }
      paths.push_back(std::move(p));
    }
    j["paths"] = std::move(paths);
  } else {
    const auto& nbi = std::get<NbiModel>(file.model);
    if (file.kind != ModelKind::kNbi) {
      throw InputError("NBI model saved with a non-nbi kind");
    }
    j["labels"] = labels_json(nbi.label_names, nbi.labels.cardinality);
    j["prior"] = nbi.prior;
    json paths = json::array();
    for (const auto& path_spec : nbi.paths) {
      paths.push_back({{"id", path_spec.id}, {"name", path_spec.name},
                       {"cost", cost_string(path_spec.cost)}});
    }
    j["paths"] = std::move(paths);
    json workers = json::object();
    for (const auto& [id, cpt] : nbi.workers) workers[id] = cpt_json(cpt);
    j["workers"] = std::move(workers);
    j["sparse"] = std::vector<std::string>(nbi.sparse.begin(), nbi.sparse.end());
  }
  return j.dump(2) + "\n";
}

ModelFile model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("model JSON: ") + e.what());
  }
  try {
    ModelFile file;
    file.kind = parse_model_kind(j.value("kind", std::string("apm")));
    if (file.kind == ModelKind::kMv) {
      throw InputError("model JSON: MV has no parameters");
    }
    if (file.kind == ModelKind::kNbi) {
      NbiModel m;
      read_labels(j.at("labels"), m.labels, m.label_names);
      m.prior = j.at("prior").get<std::vector<double>>();
      m.paths = read_path_specs(j.at("paths"));
      for (const auto& [id, cpt] : j.at("workers").items()) {
        m.workers.emplace(id, cpt_from(cpt, "worker '" + id + "'"));
      }
      for (const auto& id : j.value("sparse", std::vector<std::string>())) {
        m.sparse.insert(id);
      }
      file.model = std::move(m);
    } else {
      ApmModel m;
      read_labels(j.at("labels"), m.labels, m.label_names);
      m.prior = j.at("prior").get<std::vector<double>>();
      const auto& paths = j.at("paths");
      m.paths = read_path_specs(paths);
      for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto& p = paths[i];
        const std::string where = "path " + std::to_string(i);
        m.path_cpts.push_back(cpt_from(p.at("path_cpt"), where + " path_cpt"));
        const bool has_shared = p.contains("shared_cpt");
        const bool has_workers = p.contains("worker_cpts");
        if (has_shared == has_workers) {
          throw InputError(where +
                           ": exactly one of shared_cpt and worker_cpts required");
        }
        if (has_shared) {
          m.worker_cpts.emplace_back(cpt_from(p.at("shared_cpt"), where));
        } else {
          WorkerMap workers;
          for (const auto& [id, cpt] : p.at("worker_cpts").items()) {
            workers.emplace(id, cpt_from(cpt, where + " worker '" + id + "'"));
          }
          m.worker_cpts.emplace_back(std::move(workers));
        }
      }
      file.model = std::move(m);
    }
    const auto problems = std::visit(
        [](const auto& m) { return validate_model(m); }, file.model);
    if (!problems.empty()) {
      std::string msg = "invalid model:";
      for (const auto& p : problems) msg += "\n  " + p;
      throw InputError(msg);
    }
    return file;
  } catch (const json::exception& e) {
    throw InputError(std::string("model JSON: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << model_to_json(file);
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

Dataset read_votes_csv(std::istream& in, const VotesReadOptions& opts) {
  std::map<std::string, int> label_ids;
  std::vector<std::string> names = opts.labels;
  for (std::size_t k = 0; k < names.size(); ++k) {
    label_ids.emplace(names[k], static_cast<int>(k));
  }
  const bool fixed = !names.empty();

  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) -> void {
    throw InputError(opts.source + ":" + std::to_string(line_no) + ": " + what);
  };
  auto label_of = [&](const std::string& text) {
    auto it = label_ids.find(text);
    if (it != label_ids.end()) return it->second;
    if (fixed) fail("unknown label '" + text + "'");
    const int id = static_cast<int>(names.size());
    names.push_back(text);
    label_ids.emplace(text, id);
    return id;
  };

  if (!std::getline(in, line)) {
    line_no = 1;
    fail("missing header");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kVotesHeader) fail("expected header '" + std::string(kVotesHeader) + "'");

  struct PendingVote {
    std::size_t path;
    Vote vote;
  };
  std::vector<std::string> order;
  std::map<std::string, std::size_t> task_index;
  std::vector<std::vector<PendingVote>> task_votes;
  std::vector<std::optional<int>> truths;
  std::size_t max_path = 0;
  bool any_path = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    bool ok = true;
    const auto f = split_csv(line, ok);
    if (!ok) fail("unterminated quote");
    if (f.size() != 5) fail("expected 5 fields, got " + std::to_string(f.size()));
    if (f[0].empty()) fail("empty task_id");
    auto [it, inserted] = task_index.emplace(f[0], order.size());
    if (inserted) {
      order.push_back(f[0]);
      task_votes.emplace_back();
      truths.emplace_back();
    }
    const std::size_t t = it->second;
    if (f[1].empty() != f[3].empty()) fail("path_id and vote must both be set or both empty");
    if (!f[1].empty()) {
      std::size_t path = 0;
      auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), path);
      if (ec != std::errc() || ptr != f[1].data() + f[1].size()) {
        fail("invalid path_id '" + f[1] + "'");
      }
      if (opts.num_paths && path >= *opts.num_paths) {
        fail("path_id " + f[1] + " out of range");
      }
      any_path = true;
      max_path = std::max(max_path, path);
      PendingVote pv;
      pv.path = path;
      if (!f[2].empty()) pv.vote.worker = f[2];
      pv.vote.label = label_of(f[3]);
      task_votes[t].push_back(std::move(pv));
    }
    if (!f[4].empty()) {
      const int y = label_of(f[4]);
      if (truths[t] && *truths[t] != y) fail("conflicting truth for task '" + f[0] + "'");
      truths[t] = y;
    }
  }

  Dataset out;
  out.num_paths = opts.num_paths ? *opts.num_paths : (any_path ? max_path + 1 : 0);
  if (names.size() < 2) {
    throw InputError(opts.source + ": need at least two distinct labels");
  }
  out.labels.cardinality = static_cast<int>(names.size());
  out.label_names = names;
  for (std::size_t t = 0; t < order.size(); ++t) {
    TaskSample s;
    s.task_id = order[t];
    s.truth = truths[t];
    s.votes.resize(out.num_paths);
    for (auto& pv : task_votes[t]) s.votes[pv.path].push_back(std::move(pv.vote));
    out.samples.push_back(std::move(s));
  }
  return out;
}

Dataset read_votes_file(const std::filesystem::path& path,
                        VotesReadOptions opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  if (opts.source == "votes") opts.source = path.string();
  return read_votes_csv(in, opts);
}

void write_votes_csv(std::ostream& out, const Dataset& data) {
  const auto names = label_strings(data.label_names, data.labels.cardinality);
  out << kVotesHeader << '\n';
  for (const auto& s : data.samples) {
    const std::string truth =
        s.truth ? csv_field(names.at(static_cast<std::size_t>(*s.truth))) : "";
    if (s.total_votes() == 0) {
      out << csv_field(s.task_id) << ",,,," << truth << '\n';
      continue;
    }
    for (std::size_t i = 0; i < s.votes.size(); ++i) {
      for (const auto& v : s.votes[i]) {
        out << csv_field(s.task_id) << ',' << i << ','
            << (v.worker ? csv_field(*v.worker) : "") << ','
            << csv_field(names.at(static_cast<std::size_t>(v.label))) << ','
            << truth << '\n';
      }
    }
  }
}

}  // namespace crowdplan
