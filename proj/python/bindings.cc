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

// Python bindings. Models travel as their JSON text, so the Python side needs
// no mirror of the C++ types.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "crowdplan/cli.h"
#include "crowdplan/error.h"
#include "crowdplan/inference.h"
#include "crowdplan/infogain.h"
#include "crowdplan/io.h"
#include "crowdplan/planner.h"
#include "crowdplan/simulator.h"

namespace py = pybind11;
using namespace crowdplan;

namespace {

const ApmModel& require_apm(const ModelFile& file) {
  const auto* apm = std::get_if<ApmModel>(&file.model);
  if (apm == nullptr) throw InputError("operation needs an APM model");
  return *apm;
}

AccessPlan to_plan(const std::vector<std::int64_t>& counts) { return AccessPlan(counts); }

IgConfig ig_config(const std::string& mode, std::int64_t samples, std::uint64_t seed,
                   double exact_limit, unsigned threads) {
  IgConfig cfg;
  cfg.mode = parse_ig_mode(mode);
  cfg.num_samples = samples;
  cfg.seed = seed;
  cfg.exact_limit = exact_limit;
  cfg.threads = threads;
  return cfg;
}

py::dict ig_dict(const IgEstimate& ig) {
  py::dict d;
  d["value"] = ig.value;
  d["conditional_entropy"] = ig.conditional_entropy;
  d["stderr"] = ig.stderr_value;
  d["mode"] = std::string(ig_mode_name(ig.mode));
  return d;
}

// votes[i] holds the labels observed on path i; workers, when given, has
// the same shape.
TaskSample make_sample(const std::vector<std::vector<int>>& votes,
                       const std::optional<std::vector<std::vector<std::string>>>& workers) {
  TaskSample s;
  s.task_id = "t";
  s.votes.resize(votes.size());
  if (workers && workers->size() != votes.size()) {
    throw InputError("workers must have one list per path");
  }
  for (std::size_t i = 0; i < votes.size(); ++i) {
    if (workers && (*workers)[i].size() != votes[i].size()) {
      throw InputError("workers must match votes on every path");
    }
    for (std::size_t j = 0; j < votes[i].size(); ++j) {
      Vote v;
      v.label = votes[i][j];
      if (workers) v.worker = (*workers)[i][j];
      s.votes[i].push_back(std::move(v));
    }
  }
  return s;
}

}  // namespace

PYBIND11_MODULE(_crowdplan, m) {
  m.doc() = "Budgeted crowd access planning with access path models.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<LimitError>(m, "LimitError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::class_<ModelFile>(m, "Model")
      .def_static("from_json", &model_from_json, py::arg("text"))
      .def_static("load", [](const std::string& path) { return load_model(path); },
                  py::arg("path"))
      .def("to_json", &model_to_json)
      .def("save", [](const ModelFile& f, const std::string& path) { save_model(path, f); },
           py::arg("path"))
      .def_property_readonly("kind", [](const ModelFile& f) {
        return std::string(model_kind_name(f.kind));
      })
      .def_property_readonly("num_paths", [](const ModelFile& f) {
        return std::visit([](const auto& x) { return x.paths.size(); }, f.model);
      })
      .def_property_readonly("cardinality", [](const ModelFile& f) {
        return std::visit([](const auto& x) { return x.labels.cardinality; }, f.model);
      })
      .def_property_readonly("costs", [](const ModelFile& f) {
        std::vector<std::string> out;
        std::visit([&](const auto& x) {
          for (const auto& p : x.paths) out.push_back(p.cost.to_string());
        }, f.model);
        return out;
      })
      .def("__repr__", [](const ModelFile& f) {
        return "<crowdplan.Model kind=" + std::string(model_kind_name(f.kind)) + ">";
      });

  m.def(
      "posterior",
      [](const ModelFile& f, const std::vector<std::vector<int>>& votes,
         const std::optional<std::string>& kind,
         const std::optional<std::vector<std::vector<std::string>>>& workers) {
        const ModelKind k = kind ? parse_model_kind(*kind) : f.kind;
        const auto p = predict(k, f.model, make_sample(votes, workers));
        py::dict d;
        d["probs"] = p.probs;
        d["prediction"] = p.prediction;
        d["confidence"] = p.confidence;
        d["degenerate"] = p.degenerate_evidence;
        return d;
      },
      py::arg("model"), py::arg("votes"), py::arg("kind") = py::none(),
      py::arg("workers") = py::none(),
      "Posterior over labels given votes grouped by access path.");

  m.def(
      "information_gain",
      [](const ModelFile& f, const std::vector<std::int64_t>& counts, const std::string& mode,
         std::int64_t samples, std::uint64_t seed, double exact_limit, unsigned threads) {
        py::gil_scoped_release release;
        const auto ig = information_gain(require_apm(f), to_plan(counts),
                                         ig_config(mode, samples, seed, exact_limit, threads));
        py::gil_scoped_acquire acquire;
        return ig_dict(ig);
      },
      py::arg("model"), py::arg("counts"), py::arg("mode") = "auto",
      py::arg("samples") = 10000, py::arg("seed") = 0, py::arg("exact_limit") = 1e6,
      py::arg("threads") = 1, "Information gain in nats of an access plan.");

  m.def(
      "plan",
      [](const ModelFile& f, const std::string& budget, const std::string& strategy,
         const std::string& mode, std::int64_t samples, std::uint64_t seed,
         double exact_limit, unsigned threads) {
        const auto& apm = require_apm(f);
        const auto b = Rational::parse(budget);
        const auto s = parse_strategy(strategy);
        PlanResult r;
        {
          py::gil_scoped_release release;
          r = make_plan(s, apm, b, ig_config(mode, samples, seed, exact_limit, threads));
        }
        py::dict d;
        d["counts"] = r.plan.counts;
        d["cost"] = r.spent.to_string();
        d["ig"] = ig_dict(r.ig);
        py::list trace;
        for (const auto& st : r.trace) {
          py::dict t;
          t["step"] = st.step;
          t["path"] = st.path;
          t["delta_ig"] = st.delta_ig;
          t["ratio"] = st.ratio;
          trace.append(t);
        }
        d["trace"] = trace;
        return d;
      },
      py::arg("model"), py::arg("budget"), py::arg("strategy") = "greedy",
      py::arg("mode") = "auto", py::arg("samples") = 10000, py::arg("seed") = 0,
      py::arg("exact_limit") = 1e6, py::arg("threads") = 1,
      "Access plan within a budget given as an integer, decimal or fraction string.");

  m.def("approximation_bound", &approximation_bound_for_gamma, py::arg("gamma"));

  m.def(
      "simulate",
      [](const ModelFile& f, const std::vector<std::int64_t>& counts, std::int64_t tasks,
         std::uint64_t seed, double inject_p, int worker_pool) {
        GenerateOptions opts;
        opts.worker_pool = worker_pool;
        auto data = generate(require_apm(f), to_plan(counts), tasks, seed, opts);
        if (inject_p > 0.0) data = inject_correlation(data, inject_p, seed);
        std::ostringstream out;
        write_votes_csv(out, data);
        return out.str();
      },
      py::arg("model"), py::arg("counts"), py::arg("tasks"), py::arg("seed") = 0,
      py::arg("inject_p") = 0.0, py::arg("worker_pool") = 0,
      "Synthetic votes as CSV text.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line tool; returns (exit_code, stdout, stderr).");
}
