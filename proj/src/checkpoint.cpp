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

#include "aialab/checkpoint.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "aialab/errors.hpp"
#include "binary_io.hpp"
#include "json_convert.hpp"

namespace aialab {

std::string model_config_to_json(const ModelConfig& config) { return nlohmann::json(config).dump(); }

ModelConfig model_config_from_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text, nullptr, true, true).get<ModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
}

std::string encode_checkpoint(const Checkpoint& checkpoint) {
  std::string out = "AIAC";
  binary::put<std::uint32_t>(out, kCheckpointVersion);
  binary::put_string(out, model_config_to_json(checkpoint.config));
  binary::put<std::uint64_t>(out, checkpoint.step);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(checkpoint.weights.size()));
  for (const auto& [name, tensor] : checkpoint.weights) {
    binary::put_string(out, name);
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t e : tensor.shape()) binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(e));
    for (double v : tensor.values()) binary::put<double>(out, v);
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  binary::Reader<CheckpointError> in(bytes);
  if (bytes.size() < 4 || in.take(4) != "AIAC") throw CheckpointError("not an AIAC checkpoint");
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.config = model_config_from_json(in.get_string());
  ckpt.config.validate();
  ckpt.step = in.get<std::uint64_t>();
  const auto count = in.get<std::uint32_t>();
  const Checkpoint layout = build_model(ckpt.config);
  if (count != layout.weights.size()) throw CheckpointError("checkpoint tensor count does not match its config");
  for (std::uint32_t t = 0; t < count; ++t) {
    std::string name = in.get_string();
    const auto rank = in.get<std::uint32_t>();
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(in.get<std::uint32_t>());
    const auto& expected = layout.weights[t];
    if (name != expected.name || shape != expected.value.shape()) {
      throw CheckpointError("tensor " + std::to_string(t) + " is " + name + shape_string(shape) + ", expected " +
                            expected.name + shape_string(expected.value.shape()));
    }
    std::vector<double> values(shape_size(shape));
    for (double& v : values) v = in.get<double>();
    ckpt.weights.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
  }
  if (!in.done()) throw CheckpointError("trailing bytes after checkpoint payload");
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  const std::string bytes = encode_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace aialab
