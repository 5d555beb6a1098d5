# Copyright 2026 The AIA Lab Authors
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

"""Python bindings for the attention interaction alignment lab."""

from ._core import (
    AialabError,
    aggregate_profiles,
    aia_loss,
    alignment_gap,
    huber_penalty,
    layer_intensity,
    profile,
    profile_std_scalar,
    run_cli,
    sample,
    schedule_json,
    targets,
    train,
)

__all__ = [
    "AialabError",
    "aggregate_profiles",
    "aia_loss",
    "alignment_gap",
    "huber_penalty",
    "layer_intensity",
    "profile",
    "profile_std_scalar",
    "run_cli",
    "sample",
    "schedule_json",
    "targets",
    "train",
]
