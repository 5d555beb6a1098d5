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

#include "aialab/attention_dump.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include "aialab/errors.hpp"
#include "binary_io.hpp"

namespace aialab {

std::string encode_attention_dump(const std::vector<AttentionRecord>& records, DumpPrecision precision) {
  std::string out = "ATTD";
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(precision));
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    if (r.probs.size() != r.layers * r.heads || r.modality.size() != r.length) {
      throw ShapeError("attention record is incomplete");
    }
    for (std::size_t e : {r.layers, r.heads, r.length, r.length}) binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(e));
    for (Modality m : r.modality) out.push_back(static_cast<char>(m));
    for (const Tensor& p : r.probs) {
      for (double v : p.values()) {
        if (precision == DumpPrecision::kF32) {
          binary::put<float>(out, static_cast<float>(v));
        } else {
          binary::put<double>(out, v);
        }
      }
    }
  }
  return out;
}

std::vector<AttentionRecord> decode_attention_dump(const std::string& bytes) {
  binary::Reader<FormatError> in(bytes);
  if (bytes.size() < 4 || in.take(4) != "ATTD") throw FormatError("not an attention dump");
  const auto version = in.get<std::uint32_t>();
  if (version != 1 && version != 2) throw FormatError("unsupported attention dump version " + std::to_string(version));
  const bool f32 = version == 1;
  const auto count = in.get<std::uint32_t>();
  std::vector<AttentionRecord> records;
  for (std::uint32_t s = 0; s < count; ++s) {
    const std::string where = "sample " + std::to_string(s);
    AttentionRecord r;
    r.layers = in.get<std::uint32_t>();
    r.heads = in.get<std::uint32_t>();
    r.length = in.get<std::uint32_t>();
    const auto keys = in.get<std::uint32_t>();
    if (r.layers == 0 || r.heads == 0 || r.length == 0) throw FormatError(where + ": zero dimension");
    if (keys != r.length) throw FormatError(where + ": query and key counts differ");
    for (std::size_t i = 0; i < r.length; ++i) {
      const auto m = static_cast<unsigned char>(in.take(1)[0]);
      if (m > 3) throw FormatError(where + ": modality label " + std::to_string(m) + " out of range");
      r.modality.push_back(static_cast<Modality>(m));
    }
    const std::size_t n = r.length;
    const std::size_t needed = r.layers * r.heads * n * n * (f32 ? 4 : 8);
    if (in.remaining() < needed) throw FormatError(where + ": file is truncated");
    for (std::size_t lh = 0; lh < r.layers * r.heads; ++lh) {
      Tensor p({n, n});
      for (double& v : p.values()) v = f32 ? static_cast<double>(in.get<float>()) : in.get<double>();
      for (std::size_t q = 0; q < n; ++q) {
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double v = p[q * n + k];
          if (!std::isfinite(v) || v < -kDumpRowTolerance) {
            throw FormatError(where + ": invalid probability at layer " + std::to_string(lh / r.heads) + " head " +
                              std::to_string(lh % r.heads));
          }
          total += v;
        }
        if (std::abs(total - 1.0) > kDumpRowTolerance) {
          throw FormatError(where + ": row " + std::to_string(q) + " of layer " + std::to_string(lh / r.heads) +
                            " head " + std::to_string(lh % r.heads) + " sums to " + std::to_string(total));
        }
      }
      r.probs.push_back(std::move(p));
    }
    records.push_back(std::move(r));
  }
  if (!in.done()) throw FormatError("trailing bytes after attention dump payload");
  return records;
}

void write_attention_dump(const std::string& path, const std::vector<AttentionRecord>& records,
                          DumpPrecision precision) {
  const std::string bytes = encode_attention_dump(records, precision);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing " + path);
}

std::vector<AttentionRecord> read_attention_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_attention_dump(bytes);
}

}  // namespace aialab
