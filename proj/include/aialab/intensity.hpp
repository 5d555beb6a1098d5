// Copyright 2026 The AIA Lab Authors
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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aialab/autodiff.hpp"
#include "aialab/model.hpp"

namespace aialab {

/// Which rows are averaged (queries) and which columns are summed (keys).
struct ModalityRoles {
  std::vector<bool> query_mask;
  std::vector<bool> key_mask;
  Task task = Task::kGeneration;

  std::size_t query_count() const;
  std::size_t key_count() const;
};

/// Generation: image queries over text keys. Understanding: text positions
/// after the last image position query the image keys. SPECIAL and PAD
/// positions never take a role.
ModalityRoles modality_roles(std::span<const Modality> modality, Task task);
ModalityRoles modality_roles(const TokenSequence& seq);

/// Generation if the first TEXT position precedes the first IMAGE position.
Task infer_task(std::span<const Modality> modality);

/// Per-layer intensity; one value per layer in [0, 1].
struct IntensityProfile {
  Task task = Task::kGeneration;
  std::vector<double> values;
  std::size_t samples = 1;

  std::size_t depth() const { return values.size(); }
};

/// For each layer, the mean over heads and query rows of the attention mass
/// that falls on key columns.
IntensityProfile layer_intensity(const AttentionRecord& attention, const ModalityRoles& roles);

/// Graph version of layer_intensity; requires attention.attached().
std::vector<Var> layer_intensity_graph(const AttentionRecord& attention, const ModalityRoles& roles);

struct ProfileSummary {
  IntensityProfile mean;
  std::vector<double> std;  // population standard deviation per layer
};

ProfileSummary aggregate_profiles(std::span<const IntensityProfile> profiles);

/// Population std of each sample's layer-mean intensity.
double profile_std_scalar(std::span<const IntensityProfile> profiles);

}  // namespace aialab
