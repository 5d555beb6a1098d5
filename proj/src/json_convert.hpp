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

// JSON mappings for config structs. Private to the library sources.

#include "aialab/model.hpp"
#include "aialab/tasks.hpp"
#include "json.hpp"

namespace aialab {

inline void to_json(nlohmann::json& j, const SpecialTokens& s) {
  j = {{"pad", s.pad}, {"bos", s.bos}, {"eos", s.eos}, {"img_start", s.img_start}, {"img_end", s.img_end}, {"ans", s.ans}};
}

inline void from_json(const nlohmann::json& j, SpecialTokens& s) {
  s.pad = j.value("pad", s.pad);
  s.bos = j.value("bos", s.bos);
  s.eos = j.value("eos", s.eos);
  s.img_start = j.value("img_start", s.img_start);
  s.img_end = j.value("img_end", s.img_end);
  s.ans = j.value("ans", s.ans);
}

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"depth", c.depth},           {"heads", c.heads},     {"dim", c.dim},   {"text_vocab", c.text_vocab},
       {"image_vocab", c.image_vocab}, {"max_len", c.max_len}, {"seed", c.seed}, {"special", c.special}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.depth = j.value("depth", c.depth);
  c.heads = j.value("heads", c.heads);
  c.dim = j.value("dim", c.dim);
  c.text_vocab = j.value("text_vocab", c.text_vocab);
  c.image_vocab = j.value("image_vocab", c.image_vocab);
  c.max_len = j.value("max_len", c.max_len);
  c.seed = j.value("seed", c.seed);
  if (j.contains("special")) c.special = j["special"].get<SpecialTokens>();
}

inline void to_json(nlohmann::json& j, const MixerConfig& m) {
  j = {{"gen_weight", m.gen_weight}, {"und_weight", m.und_weight}, {"seed", m.seed}};
}

inline void from_json(const nlohmann::json& j, MixerConfig& m) {
  m.gen_weight = j.value("gen_weight", m.gen_weight);
  m.und_weight = j.value("und_weight", m.und_weight);
  m.seed = j.value("seed", m.seed);
}

}  // namespace aialab
