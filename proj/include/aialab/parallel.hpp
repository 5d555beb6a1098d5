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
#include <functional>
#include <span>

namespace aialab {

/// Sums in ascending index order. The result never depends on scheduling.
double deterministic_sum(std::span<const double> values);

/// Worker count from AIA_THREADS. Unset means hardware concurrency; "0" is
/// the strict single-threaded mode and yields 1.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n). Work is split across worker_count() threads;
/// callers write into per-index slots and reduce afterwards in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace aialab
