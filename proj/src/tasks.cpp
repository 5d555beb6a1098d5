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

#include "aialab/tasks.hpp"

#include <numeric>

#include "aialab/errors.hpp"
#include "json.hpp"

namespace aialab {

namespace {

// Layout of the default ModelConfig; check_task_vocab keeps models in sync.
const ModelConfig kLayout{};

int text_token(int offset) { return kLayout.text_id(static_cast<std::size_t>(offset)); }
int image_token(int color) { return kLayout.image_id(static_cast<std::size_t>(color)); }

void push(TokenSequence& seq, int id, Modality m, bool supervised) {
  seq.ids.push_back(id);
  seq.modality.push_back(m);
  seq.loss_mask.push_back(supervised);
}

}  // namespace

void check_task_vocab(const ModelConfig& config, std::size_t side) {
  if (config.text_vocab != vocab::kTextVocab || config.image_vocab != vocab::kImageVocab) {
    throw InputError("model vocabulary (text " + std::to_string(config.text_vocab) + ", image " +
                     std::to_string(config.image_vocab) + ") does not match the grid tasks (text 16, image 8)");
  }
  if (config.special != SpecialTokens{}) throw InputError("model special-token ids differ from the task layout");
  const std::size_t longest = side * side + 8;
  if (config.max_len < longest) {
    throw InputError("max_len " + std::to_string(config.max_len) + " too short for task sequences of length " +
                     std::to_string(longest));
  }
}

void GridScene::validate() const {
  if (side < 2 || side % 2 != 0) throw InputError("grid side must be even and at least 2");
  const int colors = static_cast<int>(vocab::kColors);
  if (background < 0 || background >= colors || object < 0 || object >= colors) throw InputError("scene color out of range");
  if (background == object) throw InputError("object color equals background color");
}

int GridScene::cell(std::size_t row, std::size_t col) const {
  const std::size_t half = side / 2;
  const bool bottom = row >= half, right = col >= half;
  const auto q = static_cast<Quadrant>((bottom ? 2 : 0) + (right ? 1 : 0));
  return q == quadrant ? object : background;
}

std::vector<int> scene_to_tokens(const GridScene& scene) {
  scene.validate();
  std::vector<int> out;
  out.reserve(scene.side * scene.side);
  for (std::size_t r = 0; r < scene.side; ++r) {
    for (std::size_t c = 0; c < scene.side; ++c) out.push_back(image_token(scene.cell(r, c)));
  }
  return out;
}

GridScene random_scene(Rng& rng, std::size_t side) {
  GridScene s;
  s.side = side;
  s.background = static_cast<int>(uniform_index(rng, vocab::kColors));
  const auto shift = static_cast<int>(1 + uniform_index(rng, vocab::kColors - 1));
  s.object = (s.background + shift) % static_cast<int>(vocab::kColors);
  s.quadrant = static_cast<Quadrant>(uniform_index(rng, 4));
  return s;
}

TokenSequence gen_sequence(const GridScene& scene, const TaskOptions& options) {
  const auto& sp = kLayout.special;
  TokenSequence seq;
  seq.task = Task::kGeneration;
  push(seq, sp.bos, Modality::kSpecial, false);
  push(seq, text_token(vocab::kColorWord + scene.object), Modality::kText, false);
  push(seq, text_token(vocab::kObjectWord), Modality::kText, false);
  push(seq, text_token(vocab::kQuadrantWord + static_cast<int>(scene.quadrant)), Modality::kText, false);
  push(seq, sp.img_start, Modality::kSpecial, options.supervise_boundary);
  for (int id : scene_to_tokens(scene)) push(seq, id, Modality::kImage, true);
  push(seq, sp.eos, Modality::kSpecial, true);
  return seq;
}

TokenSequence und_sequence(const GridScene& scene, Question question, const TaskOptions& options) {
  const auto& sp = kLayout.special;
  TokenSequence seq;
  seq.task = Task::kUnderstanding;
  push(seq, sp.bos, Modality::kSpecial, false);
  push(seq, sp.img_start, Modality::kSpecial, false);
  for (int id : scene_to_tokens(scene)) push(seq, id, Modality::kImage, false);
  push(seq, sp.img_end, Modality::kSpecial, false);
  if (question == Question::kWhatColor) {
    push(seq, text_token(vocab::kWhat), Modality::kText, false);
    push(seq, text_token(vocab::kColorQ), Modality::kText, false);
  } else {
    push(seq, text_token(vocab::kWhere), Modality::kText, false);
  }
  push(seq, sp.ans, Modality::kSpecial, options.supervise_boundary);
  const int answer = question == Question::kWhatColor ? vocab::kColorWord + scene.object
                                                      : vocab::kQuadrantWord + static_cast<int>(scene.quadrant);
  push(seq, text_token(answer), Modality::kText, true);
  push(seq, sp.eos, Modality::kSpecial, true);
  return seq;
}

TokenSequence gen_sample(Rng& rng, const TaskOptions& options) {
  return gen_sequence(random_scene(rng, options.side), options);
}

TokenSequence und_sample(Rng& rng, const TaskOptions& options) {
  const GridScene scene = random_scene(rng, options.side);
  const auto question = static_cast<Question>(uniform_index(rng, 2));
  return und_sequence(scene, question, options);
}

TokenSequence make_sample(Task task, Rng& rng, const TaskOptions& options) {
  return task == Task::kGeneration ? gen_sample(rng, options) : und_sample(rng, options);
}

std::uint64_t sample_seed(std::uint64_t base, std::uint64_t index, Split split) {
  const std::uint64_t mixed = splitmix64(splitmix64(base) ^ (index * 0x9e3779b97f4a7c15ULL));
  return (mixed & ~std::uint64_t{1}) | (split == Split::kEval ? 1u : 0u);
}

void MixerConfig::validate() const {
  if (gen_weight == 0 || und_weight == 0) throw ConfigError("mixer weights must both be at least 1");
}

std::pair<std::uint64_t, std::uint64_t> MixerConfig::reduced() const {
  const std::uint64_t g = std::gcd(gen_weight, und_weight);
  return g == 0 ? std::pair{gen_weight, und_weight} : std::pair{gen_weight / g, und_weight / g};
}

MixStream::MixStream(const MixerConfig& config, std::size_t batch_size, TaskOptions options)
    : config_(config), batch_size_(batch_size), options_(options), task_rng_(splitmix64(config.seed ^ 0x7461736bULL)) {
  config_.validate();
  if (batch_size_ == 0) throw ConfigError("batch size must be at least 1");
}

Task MixStream::next_task() {
  const std::uint64_t draw = uniform_index(task_rng_, config_.gen_weight + config_.und_weight);
  ++batch_index_;
  sample_index_ += batch_size_;
  return draw < config_.gen_weight ? Task::kGeneration : Task::kUnderstanding;
}

Batch MixStream::next() {
  Batch batch;
  batch.index = batch_index_;
  const std::uint64_t first = sample_index_;
  batch.task = next_task();
  batch.samples.reserve(batch_size_);
  for (std::size_t i = 0; i < batch_size_; ++i) {
    Rng rng(sample_seed(config_.seed, first + i, Split::kTrain));
    batch.samples.push_back(make_sample(batch.task, rng, options_));
  }
  return batch;
}

std::vector<Batch> mix_stream(const MixerConfig& config, std::size_t batch_size, std::size_t count,
                              const TaskOptions& options) {
  MixStream stream(config, batch_size, options);
  std::vector<Batch> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(stream.next());
  return out;
}

std::vector<TokenSequence> eval_samples(Task task, std::uint64_t seed, std::size_t count, const TaskOptions& options) {
  std::vector<TokenSequence> out;
  out.reserve(count);
  const std::uint64_t stream = task == Task::kGeneration ? 0 : 1;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(sample_seed(seed ^ (stream << 32), i, Split::kEval));
    out.push_back(make_sample(task, rng, options));
  }
  return out;
}

std::string to_jsonl_record(const TokenSequence& seq) {
  nlohmann::json j;
  j["task"] = std::string(to_string(seq.task));
  j["ids"] = seq.ids;
  std::vector<int> modality;
  modality.reserve(seq.modality.size());
  for (Modality m : seq.modality) modality.push_back(static_cast<int>(m));
  j["modality"] = modality;
  std::vector<int> mask(seq.loss_mask.begin(), seq.loss_mask.end());
  j["loss_mask"] = mask;
  return j.dump();
}

TokenSequence from_jsonl_record(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    TokenSequence seq;
    seq.task = parse_task(j.at("task").get<std::string>());
    seq.ids = j.at("ids").get<std::vector<int>>();
    for (int m : j.at("modality").get<std::vector<int>>()) {
      if (m < 0 || m > 3) throw FormatError("modality label out of range");
      seq.modality.push_back(static_cast<Modality>(m));
    }
    for (int b : j.at("loss_mask").get<std::vector<int>>()) seq.loss_mask.push_back(b != 0);
    return seq;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed dataset record: ") + e.what());
  }
}

}  // namespace aialab
