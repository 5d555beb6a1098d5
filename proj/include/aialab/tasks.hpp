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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aialab/model.hpp"
#include "aialab/rng.hpp"

namespace aialab {

// Token table for the grid world, as offsets into the text and image
// segments of the joint vocabulary (see docs/tokens.md).
namespace vocab {
inline constexpr std::size_t kColors = 8;
inline constexpr int kColorWord = 0;     // text 0..7: red .. gray
inline constexpr int kObjectWord = 8;    // "object"
inline constexpr int kQuadrantWord = 9;  // text 9..12: top-left .. bottom-right
inline constexpr int kWhat = 13;
inline constexpr int kColorQ = 14;  // "color"
inline constexpr int kWhere = 15;
inline constexpr std::size_t kTextVocab = 16;
inline constexpr std::size_t kImageVocab = kColors;
}  // namespace vocab

/// Throws InputError if the model's vocabulary cannot host the grid tasks.
void check_task_vocab(const ModelConfig& config, std::size_t side = 4);

enum class Quadrant : std::uint8_t { kTopLeft = 0, kTopRight = 1, kBottomLeft = 2, kBottomRight = 3 };
enum class Question : std::uint8_t { kWhatColor = 0, kWhere = 1 };

struct GridScene {
  std::size_t side = 4;
  int background = 0;
  int object = 1;
  Quadrant quadrant = Quadrant::kTopLeft;

  void validate() const;
  /// Color at (row, col); the object fills its whole quadrant.
  int cell(std::size_t row, std::size_t col) const;
  bool operator==(const GridScene&) const = default;
};

struct TaskOptions {
  std::size_t side = 4;
  // Also supervise IMG_START (generation) and ANS (understanding).
  bool supervise_boundary = false;
};

/// Row-major cell colors as joint image-token ids; length side^2.
std::vector<int> scene_to_tokens(const GridScene& scene);

GridScene random_scene(Rng& rng, std::size_t side = 4);

/// BOS, <color> object <quadrant>, IMG_START, image..., EOS
TokenSequence gen_sequence(const GridScene& scene, const TaskOptions& options = {});
/// BOS, IMG_START, image..., IMG_END, question..., ANS, answer, EOS
TokenSequence und_sequence(const GridScene& scene, Question question, const TaskOptions& options = {});

TokenSequence gen_sample(Rng& rng, const TaskOptions& options = {});
TokenSequence und_sample(Rng& rng, const TaskOptions& options = {});
TokenSequence make_sample(Task task, Rng& rng, const TaskOptions& options = {});

enum class Split : std::uint8_t { kTrain, kEval };

/// Per-sample seed; training seeds are even, evaluation seeds odd.
std::uint64_t sample_seed(std::uint64_t base, std::uint64_t index, Split split);

struct MixerConfig {
  std::uint64_t gen_weight = 1;
  std::uint64_t und_weight = 1;
  std::uint64_t seed = 0;

  void validate() const;
  /// Weights divided by their gcd.
  std::pair<std::uint64_t, std::uint64_t> reduced() const;
};

struct Batch {
  std::uint64_t index = 0;
  Task task = Task::kGeneration;
  std::vector<TokenSequence> samples;
};

/// Single-task batches; each batch's task is a seeded weighted draw.
class MixStream {
 public:
  MixStream(const MixerConfig& config, std::size_t batch_size, TaskOptions options = {});

  Batch next();
  Task next_task();  // advances like next() without building samples

 private:
  MixerConfig config_;
  std::size_t batch_size_;
  TaskOptions options_;
  Rng task_rng_;
  std::uint64_t batch_index_ = 0;
  std::uint64_t sample_index_ = 0;
};

std::vector<Batch> mix_stream(const MixerConfig& config, std::size_t batch_size, std::size_t count,
                              const TaskOptions& options = {});

/// Held-out samples for evaluation.
std::vector<TokenSequence> eval_samples(Task task, std::uint64_t seed, std::size_t count, const TaskOptions& options = {});

/// One JSON object per line: task, ids, modality, loss_mask.
std::string to_jsonl_record(const TokenSequence& seq);
TokenSequence from_jsonl_record(std::string_view line);

}  // namespace aialab
