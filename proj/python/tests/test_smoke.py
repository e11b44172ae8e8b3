# Copyright 2026 The crowdplan Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math
import os
import pathlib

import pytest

import crowdplan

ROOT = pathlib.Path(os.environ.get("CROWDPLAN_SOURCE_DIR", pathlib.Path(__file__).parents[2]))


def one_path_model(path_acc, vote_acc):
    return crowdplan.Model.from_json(json.dumps({
        "kind": "apm",
        "labels": ["no", "yes"],
        "prior": [0.5, 0.5],
        "paths": [{
            "id": 0,
            "cost": "1",
            "path_cpt": [[path_acc, 1 - path_acc], [1 - path_acc, path_acc]],
            "shared_cpt": [[vote_acc, 1 - vote_acc], [1 - vote_acc, vote_acc]],
        }],
    }))


@pytest.fixture
def example():
    return crowdplan.Model.load(str(ROOT / "data" / "example_model.json"))


def test_load_example(example):
    assert example.kind == "apm"
    assert example.num_paths == 3
    assert example.cardinality == 2
    assert example.costs == ["2", "3", "4"]
    again = crowdplan.Model.from_json(example.to_json())
    assert again.to_json() == example.to_json()


def test_single_vote_posterior():
    m = one_path_model(0.8, 0.9)
    p = crowdplan.posterior(m, [[1]])
    assert p["probs"][1] == pytest.approx(0.8 * 0.9 + 0.2 * 0.1)
    assert p["prediction"] == 1
    assert not p["degenerate"]


def test_naive_bayes_is_more_confident():
    m = one_path_model(0.95, 0.9)
    apm = crowdplan.posterior(m, [[1, 1]])["confidence"]
    nbap = crowdplan.posterior(m, [[1, 1]], kind="nbap")["confidence"]
    assert nbap > apm


def test_information_gain_single_vote():
    m = one_path_model(0.8, 0.9)
    q = 0.74
    hb = -q * math.log(q) - (1 - q) * math.log(1 - q)
    ig = crowdplan.information_gain(m, [1], mode="exact")
    assert ig["value"] == pytest.approx(math.log(2) - hb, abs=1e-12)
    assert ig["mode"] == "exact"


def test_greedy_plan_within_budget(example):
    r = crowdplan.plan(example, "9", strategy="greedy", mode="exact")
    costs = [2, 3, 4]
    assert sum(c * n for c, n in zip(costs, r["counts"])) <= 9
    assert r["ig"]["value"] > 0
    assert len(r["trace"]) == sum(r["counts"])


def test_bad_input_raises():
    with pytest.raises(crowdplan.InputError):
        crowdplan.Model.from_json("{}")


def test_simulate_is_deterministic(example):
    a = crowdplan.simulate(example, [1, 2, 1], 20, seed=3, inject_p=0.4)
    b = crowdplan.simulate(example, [1, 2, 1], 20, seed=3, inject_p=0.4)
    assert a == b
    assert a.splitlines()[0] == "task_id,path_id,worker_id,vote,truth"


def test_run_cli_reports_exit_codes(example):
    code, out, _ = crowdplan.run_cli(
        ["plan", "--model", str(ROOT / "data" / "example_model.json"), "--budget", "6"])
    assert code == 0
    assert json.loads(out)["strategy"] == "greedy"
    code, _, err = crowdplan.run_cli(["plan", "--model", "/nonexistent.json", "--budget", "6"])
    assert code == 2
    assert err
