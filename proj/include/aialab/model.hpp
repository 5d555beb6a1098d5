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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aialab/autodiff.hpp"
#include "aialab/tensor.hpp"

namespace aialab {

enum class Modality : std::uint8_t { kText = 0, kImage = 1, kSpecial = 2, kPad = 3 };
enum class Task : std::uint8_t { kGeneration = 0, kUnderstanding = 1 };

std::string_view to_string(Task task);
Task parse_task(std::string_view name);  // "generation"/"gen", "understanding"/"und"

/// Reserved ids at the bottom of the joint vocabulary.
struct SpecialTokens {
  int pad = 0;
  int bos = 1;
  int eos = 2;
  int img_start = 3;
  int img_end = 4;
  int ans = 5;

  bool operator==(const SpecialTokens&) const = default;
};

inline constexpr std::size_t kSpecialCount = 6;
inline constexpr std::size_t kMlpRatio = 4;

/// Joint id space: [0, 6) specials, then text ids, then image ids.
struct ModelConfig {
  std::size_t depth = 4;
  std::size_t heads = 4;
  std::size_t dim = 64;
  std::size_t text_vocab = 16;
  std::size_t image_vocab = 8;
  std::size_t max_len = 32;
  std::uint64_t seed = 0;
  SpecialTokens special;

  std::size_t joint_vocab() const { return kSpecialCount + text_vocab + image_vocab; }
  std::size_t head_dim() const { return dim / heads; }
  int text_id(std::size_t i) const { return static_cast<int>(kSpecialCount + i); }
  int image_id(std::size_t i) const { return static_cast<int>(kSpecialCount + text_vocab + i); }

  /// Throws ConfigError on any inconsistency (e.g. dim not divisible by heads).
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

struct TokenSequence {
  std::vector<int> ids;
  std::vector<Modality> modality;
  std::vector<bool> loss_mask;
  Task task = Task::kGeneration;

  std::size_t size() const { return ids.size(); }
  bool operator==(const TokenSequence&) const = default;
};

/// Checks lengths, vocabulary range and the PAD/loss-mask rule.
void validate_sequence(const TokenSequence& seq, const ModelConfig& config);

/// Attention probabilities for one sample, index [layer * heads + head], each
/// (length, length). When tape is set the matrices are also live graph nodes.
struct AttentionRecord {
  std::size_t layers = 0;
  std::size_t heads = 0;
  std::size_t length = 0;
  std::vector<Tensor> probs;
  std::vector<Modality> modality;
  Tape* tape = nullptr;
  std::vector<Var> nodes;

  const Tensor& at(std::size_t layer, std::size_t head) const { return probs[layer * heads + head]; }
  Var node(std::size_t layer, std::size_t head) const { return nodes[layer * heads + head]; }
  bool attached() const { return tape != nullptr; }
};

struct Checkpoint {
  ModelConfig config;
  ParamSet weights;
  std::uint64_t step = 0;
};

/// Closed-form count:
///   V*d + S*d + L*(12*d^2 + 13*d) + 2*d + d*V + V
/// with V the joint vocabulary and S the maximum length.
std::size_t expected_parameter_count(const ModelConfig& config);

/// Parameter names in checkpoint order.
std::vector<std::string> parameter_names(const ModelConfig& config);

Checkpoint build_model(const ModelConfig& config);

struct ForwardOutput {
  Tensor logits;
  std::optional<AttentionRecord> attention;
};

ForwardOutput forward(const Checkpoint& checkpoint, const TokenSequence& seq, bool record_attention);

struct GraphForward {
  Var logits;
  AttentionRecord attention;  // empty unless requested
};

std::vector<Var> bind_parameters(Tape& tape, const ParamSet& params, bool requires_grad);

/// Differentiable forward over weights already bound on a tape.
GraphForward forward(Tape& tape, std::span<const Var> weights, const ModelConfig& config, const TokenSequence& seq,
                     bool record_attention);

/// Row t predicts token t+1 and counts iff loss_mask[t+1].
struct NtpTargets {
  std::vector<int> targets;
  std::vector<bool> mask;
  std::size_t count = 0;
};

NtpTargets ntp_targets(const TokenSequence& seq);
double ntp_loss(const Tensor& logits, const TokenSequence& seq);
Var ntp_loss(Var logits, const TokenSequence& seq);

}  // namespace aialab
