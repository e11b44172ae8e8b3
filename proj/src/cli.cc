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

#include "crowdplan/cli.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "crowdplan/error.h"
#include "crowdplan/evaluation.h"
#include "crowdplan/infogain.h"
#include "crowdplan/io.h"
#include "crowdplan/learning.h"
#include "crowdplan/parallel.h"
#include "crowdplan/planner.h"
#include "crowdplan/simulator.h"
#include "json.hpp"

namespace crowdplan {
namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur.erase(0, cur.find_first_not_of(" \t"));
    cur.erase(cur.find_last_not_of(" \t") + 1);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::vector<Rational> parse_costs(const std::string& s) {
  std::vector<Rational> out;
  for (const auto& c : split(s, ',')) out.push_back(Rational::parse(c));
  return out;
}

AccessPlan parse_plan(const std::string& s) {
  AccessPlan plan;
  for (const auto& part : split(s, ',')) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || v < 0) {
      throw InputError("invalid plan entry '" + part + "'");
    }
    plan.counts.push_back(v);
  }
  if (plan.counts.empty()) throw InputError("empty plan");
  return plan;
}

// "3..30" (step 1), "3..30:3" or a comma list of rationals.
std::vector<Rational> parse_budgets(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) return parse_costs(s);
  std::string hi = s.substr(dots + 2);
  Rational step(1);
  if (const auto colon = hi.find(':'); colon != std::string::npos) {
    step = Rational::parse(hi.substr(colon + 1));
    hi = hi.substr(0, colon);
  }
  const Rational lo = Rational::parse(s.substr(0, dots));
  const Rational top = Rational::parse(hi);
  if (step <= Rational(0)) throw InputError("budget step must be positive");
  std::vector<Rational> out;
  for (Rational b = lo; b <= top; b += step) out.push_back(b);
  if (out.empty()) throw InputError("empty budget range '" + s + "'");
  return out;
}

void write_output(const std::string& path, const std::string& text,
                  std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

const ApmModel& planning_model(const ModelFile& file, ApmModel& storage) {
  const auto* apm = std::get_if<ApmModel>(&file.model);
  if (apm == nullptr) throw InputError("planning requires an access path model");
  if (file.kind == ModelKind::kNbap) {
    storage = nbap_equivalent(*apm);
    return storage;
  }
  return *apm;
}

std::vector<std::string> model_labels(const ModelFile& file) {
  return std::visit(
      [](const auto& m) {
        return label_strings(m.label_names, m.labels.cardinality);
      },
      file.model);
}

struct EmOptions {
  int max_iters = 500;
  double tol = 1e-6;
  double alpha = 1.0;
  int restarts = 3;
  int min_votes = 2;

  void add(CLI::App* app) {
    app->add_option("--max-iters", max_iters, "EM iteration cap");
    app->add_option("--tol", tol, "relative log-likelihood tolerance");
    app->add_option("--alpha", alpha, "additive smoothing pseudo-count");
    app->add_option("--restarts", restarts, "EM random restarts");
    app->add_option("--min-votes", min_votes, "NBI sparse worker threshold");
  }
  EmConfig config(std::uint64_t seed, unsigned threads) const {
    EmConfig cfg;
    cfg.max_iters = max_iters;
    cfg.rel_tol = tol;
    cfg.smoothing_alpha = alpha;
    cfg.restarts = restarts;
    cfg.min_votes = min_votes;
    cfg.seed = seed;
    cfg.threads = threads;
    cfg.validate();
    return cfg;
  }
};

json report_json(ModelKind kind, const FitReport& r) {
  return {{"kind", std::string(model_kind_name(kind))},
          {"final_log_likelihood", r.final_log_likelihood},
          {"final_objective", r.final_objective},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"restart_index", r.restart_index},
          {"empty_paths", r.empty_paths},
          {"sparse_workers", r.sparse_workers},
          {"objective_trace", r.objective_trace}};
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Budgeted crowdsourcing with access paths"};
  app.require_subcommand(1);
  unsigned threads = default_threads();
  std::uint64_t seed = 0;

  // learn
  auto* learn = app.add_subcommand("learn", "fit model parameters with EM");
  std::string votes_path, out_path, kind_name = "apm", costs_text, labels_text;
  bool share_workers = false;
  EmOptions em;
  learn->add_option("--votes", votes_path, "votes CSV")->required();
  learn->add_option("--model-kind", kind_name, "apm | nbap | nbi");
  learn->add_flag("--share-workers", share_workers,
                  "one CPT per path instead of one per worker");
  learn->add_option("--out", out_path, "model JSON output")->required();
  learn->add_option("--costs", costs_text, "per-path costs, e.g. 2,3,4");
  learn->add_option("--labels", labels_text, "fixed label set, e.g. no,yes");
  em.add(learn);

  // plan
  auto* plan = app.add_subcommand("plan", "choose votes per access path");
  std::string model_path, budget_text, strategy_name_text = "greedy",
      ig_text = "auto";
  std::int64_t samples = 10000;
  double exact_limit = 1e6, plan_limit = 2e5;
  plan->add_option("--model", model_path, "model JSON")->required();
  plan->add_option("--budget", budget_text, "budget, e.g. 10 or 21/2")->required();
  plan->add_option("--strategy", strategy_name_text,
                   "greedy | opt | rnd | best | equal");
  plan->add_option("--plan-limit", plan_limit, "opt enumeration cap");

  // infer
  auto* infer = app.add_subcommand("infer", "posterior over labels per task");
  infer->add_option("--model", model_path, "model JSON");
  infer->add_option("--votes", votes_path, "votes CSV")->required();
  infer->add_option("--model-kind", kind_name,
                    "override the model kind (mv needs no model)");
  infer->add_option("--out", out_path, "posterior CSV (default stdout)");
  bool ignore_unknown = false;
  infer->add_flag("--ignore-unknown-workers", ignore_unknown,
                  "NBI: drop votes of workers absent from the model");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "sample votes from a model");
  std::string plan_text;
  std::int64_t tasks = 100;
  double inject_p = 0.0;
  int worker_pool = 0;
  simulate->add_option("--model", model_path, "model JSON")->required();
  simulate->add_option("--plan", plan_text, "votes per path, e.g. 1,2,3")->required();
  simulate->add_option("--tasks", tasks, "number of tasks");
  simulate->add_option("--inject-p", inject_p, "majority-following probability");
  simulate->add_option("--out", out_path, "votes CSV (default stdout)");
  simulate->add_option("--worker-pool", worker_pool,
                       "workers drawn per path (0 = model's workers)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "cross-validated budget sweep");
  std::string strategies_text = "greedy", models_text = "apm";
  int folds = 5;
  bool per_fold = false;
  sweep->add_option("--votes", votes_path, "votes CSV")->required();
  sweep->add_option("--budgets", budget_text, "3..30 or 3,6,9")->required();
  sweep->add_option("--strategies", strategies_text, "comma list");
  sweep->add_option("--models", models_text, "comma list of mv,nbi,nbap,apm");
  sweep->add_option("--folds", folds, "cross-validation folds");
  sweep->add_option("--out", out_path, "metrics CSV (default stdout)");
  sweep->add_option("--costs", costs_text, "per-path costs");
  sweep->add_option("--labels", labels_text, "fixed label set");
  sweep->add_flag("--per-fold", per_fold, "also emit per-fold rows");
  em.add(sweep);

  for (auto* sub : {learn, plan, infer, simulate, sweep}) {
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--threads", threads, "worker threads")
        ->check(CLI::PositiveNumber);
  }
  for (auto* sub : {plan, sweep}) {
    sub->add_option("--ig", ig_text, "exact | sampled | auto");
    sub->add_option("--samples", samples, "Monte Carlo samples");
    sub->add_option("--exact-limit", exact_limit,
                    "max configurations for exact entropy");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return static_cast<int>(ErrorCode::kInput);
  }

  try {
    IgConfig ig;
    ig.mode = parse_ig_mode(ig_text);
    ig.num_samples = samples;
    ig.seed = seed;
    ig.exact_limit = exact_limit;
    ig.threads = threads;
    if (samples < 1) throw InputError("--samples must be positive");

    if (*learn) {
      const ModelKind kind = parse_model_kind(kind_name);
      if (kind == ModelKind::kMv) throw InputError("MV has no parameters");
      VotesReadOptions ro;
      ro.labels = split(labels_text, ',');
      const Dataset data = read_votes_file(votes_path, ro);
      const auto costs = parse_costs(costs_text);
      const EmConfig cfg = em.config(seed, threads);
      ModelFile file;
      file.kind = kind;
      FitReport report;
      if (kind == ModelKind::kNbi) {
        auto fit = fit_nbi(data, cfg, costs);
        file.model = std::move(fit.model);
        report = std::move(fit.report);
      } else {
        auto fit = fit_em(data, share_workers || kind == ModelKind::kNbap, cfg,
                          costs);
        file.model = std::move(fit.model);
        report = std::move(fit.report);
      }
      save_model(out_path, file);
      out << report_json(kind, report).dump(2) << '\n';
      return 0;
    }

    if (*plan) {
      const ModelFile file = load_model(model_path);
      ApmModel storage;
      const ApmModel& model = planning_model(file, storage);
      const Rational budget = Rational::parse(budget_text);
      const Strategy strategy = parse_strategy(strategy_name_text);
      PlanResult result = strategy == Strategy::kOpt
                              ? exhaustive_opt(model, budget, ig, plan_limit)
                              : make_plan(strategy, model, budget, ig);
      json j;
      j["strategy"] = std::string(strategy_name(strategy));
      j["counts"] = result.plan.counts;
      j["cost"] = result.spent.to_string();
      j["ig"] = result.ig.value;
      j["stderr"] = result.ig.stderr_value;
      j["ig_mode"] = std::string(ig_mode_name(result.ig.mode));
      bool bounded = budget > Rational(0);
      for (const auto& p : model.paths) bounded = bounded && p.cost <= budget;
      j["bound"] = bounded && strategy == Strategy::kGreedy
                       ? json(approximation_bound(model, budget))
                       : json(nullptr);
      json trace = json::array();
      for (const auto& s : result.trace) {
        trace.push_back({{"step", s.step}, {"path", s.path},
                         {"delta_ig", s.delta_ig}, {"ratio", s.ratio}});
      }
      j["trace"] = std::move(trace);
      out << j.dump(2) << '\n';
      return 0;
    }

    if (*infer) {
      std::optional<ModelFile> file;
      ModelKind kind;
      if (!model_path.empty()) {
        file = load_model(model_path);
        kind = infer->count("--model-kind") ? parse_model_kind(kind_name)
                                            : file->kind;
      } else {
        kind = parse_model_kind(kind_name);
        if (kind != ModelKind::kMv || !infer->count("--model-kind")) {
          throw InputError("--model is required unless --model-kind mv");
        }
      }
      VotesReadOptions ro;
      if (file) {
        ro.labels = model_labels(*file);
        ro.num_paths = std::visit(
            [](const auto& m) { return m.paths.size(); }, file->model);
      }
      Dataset data = read_votes_file(votes_path, ro);
      std::sort(data.samples.begin(), data.samples.end(),
                [](const TaskSample& a, const TaskSample& b) {
                  return a.task_id < b.task_id;
                });
      const auto names = label_strings(data.label_names, data.labels.cardinality);
      std::ostringstream csv;
      csv << "task_id,prediction,confidence";
      for (const auto& n : names) csv << ",p_" << n;
      csv << ",degenerate\n";
      for (const auto& s : data.samples) {
        Posterior post;
        if (kind == ModelKind::kMv) {
          std::vector<int> votes;
          for (const auto& path : s.votes) {
            for (const auto& v : path) votes.push_back(v.label);
          }
          post = mv_predict(data.labels, votes);
        } else {
          if (!file) throw InputError("model required");
          if (kind == ModelKind::kNbi) {
            const auto* nbi = std::get_if<NbiModel>(&file->model);
            if (nbi == nullptr) throw InputError("model file is not an NBI model");
            post = nbi_posterior(*nbi, s, ignore_unknown ? UnknownWorker::kIgnore
                                                         : UnknownWorker::kError);
          } else {
            post = predict(kind, file->model, s);
          }
        }
        csv << s.task_id << ',' << names.at(static_cast<std::size_t>(post.prediction))
            << ',' << format_double(post.confidence);
        for (double p : post.probs) csv << ',' << format_double(p);
        csv << ',' << (post.degenerate_evidence ? 1 : 0) << '\n';
      }
      write_output(out_path, csv.str(), out);
      return 0;
    }

    if (*simulate) {
      const ModelFile file = load_model(model_path);
      const auto* model = std::get_if<ApmModel>(&file.model);
      if (model == nullptr) throw InputError("simulation requires an access path model");
      const AccessPlan per_task = parse_plan(plan_text);
      if (tasks < 0) throw InputError("--tasks must be non-negative");
      if (inject_p < 0.0 || inject_p > 1.0) throw InputError("--inject-p must be in [0, 1]");
      GenerateOptions gen;
      gen.worker_pool = worker_pool;
      Dataset data = generate(*model, per_task, tasks, seed, gen);
      if (inject_p > 0.0) data = inject_correlation(data, inject_p, seed);
      std::ostringstream csv;
      write_votes_csv(csv, data);
      write_output(out_path, csv.str(), out);
      return 0;
    }

    if (*sweep) {
      VotesReadOptions ro;
      ro.labels = split(labels_text, ',');
      const Dataset data = read_votes_file(votes_path, ro);
      SweepConfig cfg;
      cfg.models.clear();
      for (const auto& m : split(models_text, ',')) cfg.models.push_back(parse_model_kind(m));
      cfg.strategies.clear();
      for (const auto& s : split(strategies_text, ',')) cfg.strategies.push_back(parse_strategy(s));
      if (cfg.models.empty() || cfg.strategies.empty()) {
        throw InputError("--models and --strategies must be non-empty");
      }
      cfg.budgets = parse_budgets(budget_text);
      cfg.folds = folds;
      cfg.ig = ig;
      cfg.em = em.config(seed, 1);
      cfg.costs = parse_costs(costs_text);
      cfg.seed = seed;
      cfg.threads = threads;
      cfg.per_fold_rows = per_fold;
      const auto rows = budget_sweep(data, cfg);
      std::ostringstream csv;
      write_metric_csv(csv, rows);
      write_output(out_path, csv.str(), out);
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace crowdplan
