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

// Independent reference computations used to check the library. These are
// deliberately written as plain loops over raw arrays and share no code with
// the implementation beyond the data types.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

/// probs is [L][H][Q][K] flattened; query/key flags select the roles.
/// Returns one value per layer: the attention mass the selected queries put on
/// the selected keys, averaged over heads and selected queries.
inline std::vector<double> intensity(const std::vector<double>& probs, std::size_t layers, std::size_t heads,
                                     std::size_t n, const std::vector<bool>& query, const std::vector<bool>& key) {
  std::vector<double> out(layers, 0.0);
  std::size_t q_count = 0;
  for (std::size_t i = 0; i < n; ++i) q_count += query[i] ? 1 : 0;
  for (std::size_t l = 0; l < layers; ++l) {
    double total = 0.0;
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!query[i]) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (key[j]) total += probs[((l * heads + h) * n + i) * n + j];
        }
      }
    }
    out[l] = total / static_cast<double>(heads * q_count);
  }
  return out;
}

inline double huber(double x, double t, double d) {
  const double r = std::fabs(x - t);
  if (r <= d) return 0.5 * r * r;
  return d * r - 0.5 * d * d;
}

inline double population_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

/// Parameter count of the decoder: embeddings, per-layer attention and MLP
/// blocks with two norms, final norm, and the output head with bias.
inline std::size_t parameter_count(std::size_t vocab, std::size_t max_len, std::size_t depth, std::size_t dim) {
  const std::size_t per_layer = 4 * (dim * dim + dim)     // q, k, v, o
                                + (dim * 4 * dim + 4 * dim)  // mlp up
                                + (4 * dim * dim + dim)      // mlp down
                                + 2 * 2 * dim;               // two layer norms
  return vocab * dim + max_len * dim + depth * per_layer + 2 * dim + dim * vocab + vocab;
}

}  // namespace oracle
