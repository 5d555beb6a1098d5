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

#include "aialab/intensity.hpp"

#include <algorithm>
#include <cmath>

#include "aialab/errors.hpp"
#include "aialab/parallel.hpp"

namespace aialab {

std::size_t ModalityRoles::query_count() const {
  return static_cast<std::size_t>(std::count(query_mask.begin(), query_mask.end(), true));
}

std::size_t ModalityRoles::key_count() const {
  return static_cast<std::size_t>(std::count(key_mask.begin(), key_mask.end(), true));
}

Task infer_task(std::span<const Modality> modality) {
  const auto first_text = std::find(modality.begin(), modality.end(), Modality::kText);
  const auto first_image = std::find(modality.begin(), modality.end(), Modality::kImage);
  if (first_text == modality.end() || first_image == modality.end()) {
    throw RoleError("sequence lacks a TEXT or IMAGE position");
  }
  return first_text < first_image ? Task::kGeneration : Task::kUnderstanding;
}

ModalityRoles modality_roles(std::span<const Modality> modality, Task task) {
  const std::size_t n = modality.size();
  ModalityRoles roles;
  roles.task = task;
  roles.query_mask.assign(n, false);
  roles.key_mask.assign(n, false);
  std::size_t last_image = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (modality[i] == Modality::kImage) last_image = i;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (task == Task::kGeneration) {
      roles.query_mask[i] = modality[i] == Modality::kImage;
      roles.key_mask[i] = modality[i] == Modality::kText;
    } else {
      roles.query_mask[i] = modality[i] == Modality::kText && last_image != n && i > last_image;
      roles.key_mask[i] = modality[i] == Modality::kImage;
    }
  }
  if (roles.query_count() == 0 || roles.key_count() == 0) {
    throw RoleError(std::string("no ") + (roles.query_count() == 0 ? "query" : "key") + " positions for " +
                    std::string(to_string(task)) + " roles");
  }
  return roles;
}

ModalityRoles modality_roles(const TokenSequence& seq) { return modality_roles(seq.modality, seq.task); }

namespace {

void check_roles(const AttentionRecord& attention, const ModalityRoles& roles) {
  if (roles.query_mask.size() != attention.length || roles.key_mask.size() != attention.length) {
    throw RoleError("role masks do not match attention length " + std::to_string(attention.length));
  }
  if (roles.query_count() == 0 || roles.key_count() == 0) throw RoleError("empty query or key mask");
  if (attention.probs.size() != attention.layers * attention.heads) throw ShapeError("attention record is incomplete");
}

}  // namespace

IntensityProfile layer_intensity(const AttentionRecord& attention, const ModalityRoles& roles) {
  check_roles(attention, roles);
  const std::size_t n = attention.length;
  const double norm = static_cast<double>(attention.heads * roles.query_count());
  IntensityProfile profile;
  profile.task = roles.task;
  profile.values.resize(attention.layers);
  for (std::size_t l = 0; l < attention.layers; ++l) {
    double total = 0.0;
    for (std::size_t h = 0; h < attention.heads; ++h) {
      const Tensor& p = attention.at(l, h);
      for (std::size_t q = 0; q < n; ++q) {
        if (!roles.query_mask[q]) continue;
        for (std::size_t k = 0; k < n; ++k) {
          if (roles.key_mask[k]) total += p[q * n + k];
        }
      }
    }
    profile.values[l] = std::clamp(total / norm, 0.0, 1.0);
  }
  return profile;
}

std::vector<Var> layer_intensity_graph(const AttentionRecord& attention, const ModalityRoles& roles) {
  check_roles(attention, roles);
  if (!attention.attached()) throw Error("layer_intensity_graph needs a graph-attached attention record");
  const double norm = static_cast<double>(attention.heads * roles.query_count());
  std::vector<Var> out;
  out.reserve(attention.layers);
  for (std::size_t l = 0; l < attention.layers; ++l) {
    std::vector<Var> per_head;
    per_head.reserve(attention.heads);
    for (std::size_t h = 0; h < attention.heads; ++h) {
      per_head.push_back(ad::block_sum(attention.node(l, h), roles.query_mask, roles.key_mask));
    }
    out.push_back(ad::scale(ad::add_n(per_head), 1.0 / norm));
  }
  return out;
}

namespace {

void check_compatible(std::span<const IntensityProfile> profiles) {
  if (profiles.empty()) throw AggregationError("no profiles to aggregate");
  for (const auto& p : profiles) {
    if (p.depth() != profiles.front().depth()) {
      throw ShapeError("profiles have mixed depths " + std::to_string(profiles.front().depth()) + " and " +
                       std::to_string(p.depth()));
    }
    if (p.task != profiles.front().task) throw AggregationError("profiles mix generation and understanding");
  }
}

// Shifted by the first value so identical inputs give that value back exactly
// and their spread is exactly zero.
double mean_of(std::span<const double> xs) {
  std::vector<double> shifted(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) shifted[i] = xs[i] - xs[0];
  return xs[0] + deterministic_sum(shifted) / static_cast<double>(xs.size());
}

double population_std(std::span<const double> xs, double mean) {
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
  return std::sqrt(deterministic_sum(sq) / static_cast<double>(xs.size()));
}

}  // namespace

ProfileSummary aggregate_profiles(std::span<const IntensityProfile> profiles) {
  check_compatible(profiles);
  const std::size_t depth = profiles.front().depth(), n = profiles.size();
  ProfileSummary s;
  s.mean.task = profiles.front().task;
  s.mean.samples = n;
  s.mean.values.resize(depth);
  s.std.resize(depth);
  std::vector<double> column(n);
  for (std::size_t l = 0; l < depth; ++l) {
    for (std::size_t i = 0; i < n; ++i) column[i] = profiles[i].values[l];
    const double mean = mean_of(column);
    s.mean.values[l] = mean;
    s.std[l] = population_std(column, mean);
  }
  return s;
}

double profile_std_scalar(std::span<const IntensityProfile> profiles) {
  if (profiles.size() < 2) throw AggregationError("profile_std_scalar needs at least 2 profiles");
  check_compatible(profiles);
  std::vector<double> layer_means;
  layer_means.reserve(profiles.size());
  for (const auto& p : profiles) layer_means.push_back(deterministic_sum(p.values) / static_cast<double>(p.depth()));
  const double mean = mean_of(layer_means);
  return population_std(layer_means, mean);
}

}  // namespace aialab
