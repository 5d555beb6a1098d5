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

#include <cstdint>
#include <random>

namespace aialab {

// mt19937_64 output is fixed by the standard, unlike the std distributions,
// so everything that must be bit-stable draws through these helpers.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform integer in [0, n) by rejection sampling.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Uniform double in [0, 1) with 53 random bits.
double uniform_unit(Rng& rng);

/// Standard normal via Box-Muller (one value per call).
double standard_normal(Rng& rng);

}  // namespace aialab
