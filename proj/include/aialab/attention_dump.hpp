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
#include <string>
#include <vector>

#include "aialab/model.hpp"

namespace aialab {

// "ATTD" attention dump, little-endian:
//   magic "ATTD" | u32 version | u32 sample count
//   per sample: u32 L, H, Q, K | Q modality bytes (0 text, 1 image,
//   2 special, 3 pad) | L*H*Q*K probabilities, layer-major then head, row, col
// Version 1 stores f32 probabilities, version 2 stores f64.

enum class DumpPrecision : std::uint32_t { kF32 = 1, kF64 = 2 };

/// Row sums must lie within this distance of 1 on load.
inline constexpr double kDumpRowTolerance = 1e-4;

std::string encode_attention_dump(const std::vector<AttentionRecord>& records, DumpPrecision precision);

/// Validates every record; throws FormatError naming the offending sample.
std::vector<AttentionRecord> decode_attention_dump(const std::string& bytes);

void write_attention_dump(const std::string& path, const std::vector<AttentionRecord>& records,
                          DumpPrecision precision);
std::vector<AttentionRecord> read_attention_dump(const std::string& path);

}  // namespace aialab
