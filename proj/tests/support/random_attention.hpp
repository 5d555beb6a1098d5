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
#include <vector>

#include "aialab/model.hpp"
#include "aialab/rng.hpp"

namespace testing_support {

struct RandomAttention {
  aialab::AttentionRecord record;
  std::vector<double> flat;  // [L][H][n][n]
};

// Row-stochastic attention with random sparsity; rows need not be causal.
inline RandomAttention random_attention(aialab::Rng& rng, std::size_t layers, std::size_t heads, std::size_t n) {
  RandomAttention r;
  r.record.layers = layers;
  r.record.heads = heads;
  r.record.length = n;
  for (std::size_t lh = 0; lh < layers * heads; ++lh) {
    aialab::Tensor p({n, n});
    for (std::size_t q = 0; q < n; ++q) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double u = aialab::uniform_unit(rng);
        p.at(q, k) = u < 0.3 ? 0.0 : u;
        s += p.at(q, k);
      }
      if (s == 0.0) {
        p.at(q, q) = 1.0;
        s = 1.0;
      }
      for (std::size_t k = 0; k < n; ++k) p.at(q, k) /= s;
    }
    r.flat.insert(r.flat.end(), p.values().begin(), p.values().end());
    r.record.probs.push_back(std::move(p));
  }
  return r;
}

// Random labels with both roles guaranteed to be non-empty for the task.
inline std::vector<aialab::Modality> random_modalities(aialab::Rng& rng, std::size_t n,
                                                   aialab::Task task = aialab::Task::kGeneration) {
  std::vector<aialab::Modality> m(n);
  for (auto& x : m) x = static_cast<aialab::Modality>(aialab::uniform_index(rng, 3));
  const bool gen = task == aialab::Task::kGeneration;
  m[0] = gen ? aialab::Modality::kText : aialab::Modality::kImage;
  m[n - 1] = gen ? aialab::Modality::kImage : aialab::Modality::kText;
  return m;
}

}  // namespace testing_support
