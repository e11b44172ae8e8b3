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

"""Budgeted crowd access planning with access path models."""

from crowdplan._crowdplan import (
    Error,
    InputError,
    LimitError,
    Model,
    NumericError,
    approximation_bound,
    information_gain,
    plan,
    posterior,
    run_cli,
    simulate,
)

__all__ = [
    "Error",
    "InputError",
    "LimitError",
    "Model",
    "NumericError",
    "approximation_bound",
    "information_gain",
    "plan",
    "posterior",
    "run_cli",
    "simulate",
]
