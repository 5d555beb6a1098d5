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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aialab/autodiff.hpp"
#include "aialab/intensity.hpp"
#include "aialab/model.hpp"

namespace aialab {

enum class Provenance : std::uint8_t { kEmu3, kJanusPro, kCustom };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view name);  // ScheduleError on unknown names

/// Layers [lo, hi) in reference-depth units share one (target, delta). A
/// missing hi marks the open-ended tail stage ("l > x" rows).
struct TargetStage {
  std::size_t lo = 0;
  std::optional<std::size_t> hi;
  double target = 0.0;
  double delta = 0.0;

  bool contains(std::size_t layer) const { return layer >= lo && (!hi || layer < *hi); }
  bool operator==(const TargetStage&) const = default;
};

struct TargetSchedule {
  Task task = Task::kGeneration;
  std::size_t reference_depth = 0;
  std::vector<TargetStage> stages;
  Provenance provenance = Provenance::kCustom;

  /// Stages must start at 0, be contiguous and cover [0, reference_depth).
  void validate() const;
  const TargetStage& lookup(std::size_t reference_layer) const;

  bool operator==(const TargetSchedule&) const = default;
};

/// Built-in stage tables: Emu3 (reference depth 32) and Janus-Pro (30).
TargetSchedule builtin_schedule(Provenance provenance, Task task);

struct LayerTarget {
  std::size_t reference_layer = 0;
  double target = 0.0;
  double delta = 0.0;
};

/// Layer l maps to reference layer floor(l * reference_depth / model_depth).
std::vector<LayerTarget> rescale_schedule(const TargetSchedule& schedule, std::size_t model_depth);

enum class PenaltyVariant : std::uint8_t {
  kCenter,  // Huber around the target
  kBand,    // zero inside [T - delta, T + delta], Huber on the excess outside
};

std::string_view to_string(PenaltyVariant v);
PenaltyVariant parse_penalty_variant(std::string_view name);

/// 0.5 r^2 for |r| <= delta, delta |r| - 0.5 delta^2 beyond, r = I - T.
double huber_penalty(double intensity, double target, double delta);
double huber_slope(double intensity, double target, double delta);
Var huber_penalty(Var intensity, double target, double delta);

double penalty(double intensity, const LayerTarget& t, PenaltyVariant variant = PenaltyVariant::kCenter);
double penalty_slope(double intensity, const LayerTarget& t, PenaltyVariant variant = PenaltyVariant::kCenter);

/// Mean penalty over layers.
double aia_loss(const IntensityProfile& profile, std::span<const LayerTarget> targets,
                PenaltyVariant variant = PenaltyVariant::kCenter);
Var aia_loss(std::span<const Var> intensities, std::span<const LayerTarget> targets,
             PenaltyVariant variant = PenaltyVariant::kCenter);

/// ntp + lambda * aia
double total_loss(double ntp, double aia, double lambda);

std::string schedule_to_json(const TargetSchedule& schedule);
TargetSchedule schedule_from_json(std::string_view text);

}  // namespace aialab
