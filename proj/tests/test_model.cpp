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

#include <cmath>
#include <cstring>
#include <vector>

#include "aialab/errors.hpp"
#include "aialab/gradcheck.hpp"
#include "aialab/model.hpp"
#include "aialab/rng.hpp"
#include "aialab/tasks.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace aialab;

namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.depth = 2;
  c.heads = 2;
  c.dim = 16;
  c.seed = 7;
  return c;
}

TokenSequence plain_sequence(const std::vector<int>& ids) {
  TokenSequence s;
  s.ids = ids;
  for (int id : ids) s.modality.push_back(id < 6 ? Modality::kSpecial : id < 22 ? Modality::kText : Modality::kImage);
  s.loss_mask.assign(ids.size(), true);
  s.loss_mask[0] = false;
  return s;
}

}  // namespace

TEST_CASE("joint vocabulary layout") {
  const ModelConfig c;
  CHECK(c.joint_vocab() == 30);
  CHECK(c.text_id(0) == 6);
  CHECK(c.image_id(0) == 22);
  CHECK(c.image_id(7) == 29);
}

TEST_CASE("config validation") {
  ModelConfig c = small_config();
  c.heads = 3;
  CHECK_THROWS_AS(build_model(c), ConfigError);
  c = small_config();
  c.special.ans = c.special.bos;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.depth = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("parameter count matches the closed form") {
  const ModelConfig c = small_config();
  const Checkpoint ck = build_model(c);
  CHECK(parameter_count(ck.weights) == oracle::parameter_count(30, 32, 2, 16));
  CHECK(parameter_count(ck.weights) == 8094);
  CHECK(expected_parameter_count(c) == 8094);
  const ModelConfig big;
  CHECK(expected_parameter_count(big) == oracle::parameter_count(30, 32, 4, 64));
  CHECK(parameter_names(c).size() == ck.weights.size());
}

TEST_CASE("build_model is seeded") {
  const ModelConfig c = small_config();
  CHECK(identical(build_model(c).weights, build_model(c).weights));
  ModelConfig other = c;
  other.seed = 8;
  CHECK_FALSE(identical(build_model(c).weights, build_model(other).weights));
}

TEST_CASE("single-token sequence attends to itself") {
  const Checkpoint ck = build_model(small_config());
  const ForwardOutput out = forward(ck, plain_sequence({1}), true);
  REQUIRE(out.attention);
  for (std::size_t l = 0; l < 2; ++l) {
    for (std::size_t h = 0; h < 2; ++h) CHECK(out.attention->at(l, h)[0] == 1.0);
  }
}

TEST_CASE("attention is causal and row-stochastic") {
  const Checkpoint ck = build_model(small_config());
  Rng rng(4);
  const TokenSequence seq = und_sample(rng);
  const ForwardOutput out = forward(ck, seq, true);
  REQUIRE(out.attention);
  const std::size_t n = seq.size();
  CHECK(out.logits.rows() == n);
  CHECK(out.logits.cols() == 30);
  for (const Tensor& p : out.attention->probs) {
    for (std::size_t q = 0; q < n; ++q) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k > q) CHECK(p.at(q, k) == 0.0);
        s += p.at(q, k);
      }
      CHECK(std::fabs(s - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("changing a later token leaves earlier logits untouched") {
  const Checkpoint ck = build_model(small_config());
  TokenSequence a = plain_sequence({1, 6, 14, 9, 3, 22, 23, 24});
  TokenSequence b = a;
  b.ids[6] = 29;
  const Tensor la = forward(ck, a, false).logits, lb = forward(ck, b, false).logits;
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 30; ++c) CHECK(la.at(r, c) == lb.at(r, c));
  }
}

TEST_CASE("PAD keys receive no attention") {
  const Checkpoint ck = build_model(small_config());
  TokenSequence seq = plain_sequence({1, 6, 0, 22, 23});
  seq.modality[2] = Modality::kPad;
  seq.loss_mask[2] = false;
  const ForwardOutput out = forward(ck, seq, true);
  for (const Tensor& p : out.attention->probs) {
    for (std::size_t q = 2; q < 5; ++q) CHECK(p.at(q, 2) == 0.0);
  }
}

TEST_CASE("forward is bit-reproducible on a 12-token input") {
  const Checkpoint ck = build_model(small_config());
  const TokenSequence seq = plain_sequence({1, 7, 14, 10, 3, 22, 22, 25, 25, 22, 22, 2});
  const Tensor a = forward(ck, seq, false).logits;
  const Tensor b = forward(ck, seq, true).logits;
  CHECK(a.identical(b));
  CHECK(a.all_finite());
}

TEST_CASE("sequence validation") {
  const ModelConfig c = small_config();
  const Checkpoint ck = build_model(c);
  CHECK_THROWS_AS(forward(ck, plain_sequence({1, 30}), false), InputError);
  CHECK_THROWS_AS(forward(ck, plain_sequence({1, -1}), false), InputError);
  std::vector<int> long_ids(33, 22);
  CHECK_THROWS_AS(forward(ck, plain_sequence(long_ids), false), InputError);
  TokenSequence pad = plain_sequence({1, 0});
  pad.modality[1] = Modality::kPad;
  CHECK_THROWS_AS(validate_sequence(pad, c), InputError);  // PAD with loss
  TokenSequence ragged = plain_sequence({1, 22});
  ragged.loss_mask.pop_back();
  CHECK_THROWS_AS(validate_sequence(ragged, c), InputError);
}

TEST_CASE("ntp_loss at initialization is close to ln(vocab)") {
  const Checkpoint ck = build_model(ModelConfig{});
  Rng rng(1);
  double total = 0.0;
  for (int i = 0; i < 20; ++i) {
    const TokenSequence seq = gen_sample(rng);
    total += ntp_loss(forward(ck, seq, false).logits, seq);
  }
  CHECK(std::fabs(total / 20.0 - std::log(30.0)) < 0.05 * std::log(30.0));
}

TEST_CASE("ntp_loss matches hand log-sum-exp on a 3-token sequence") {
  const TokenSequence seq = plain_sequence({1, 22, 2});
  Tensor logits({3, 30});
  for (std::size_t c = 0; c < 30; ++c) {
    logits.at(0, c) = 0.1 * static_cast<double>(c);
    logits.at(1, c) = c == 2 ? 3.0 : -0.5;
    logits.at(2, c) = 42.0;  // no target follows the last row
  }
  double z0 = 0.0, z1 = 0.0;
  for (std::size_t c = 0; c < 30; ++c) {
    z0 += std::exp(0.1 * static_cast<double>(c));
    z1 += std::exp(c == 2 ? 3.0 : -0.5);
  }
  const double expected = ((std::log(z0) - 2.2) + (std::log(z1) - 3.0)) / 2.0;
  CHECK(std::fabs(ntp_loss(logits, seq) - expected) < 1e-13);
}

TEST_CASE("ntp_loss with nothing supervised") {
  TokenSequence seq = plain_sequence({1, 22, 2});
  seq.loss_mask.assign(3, false);
  CHECK_THROWS_AS(ntp_targets(seq), EmptyLossError);
  CHECK_THROWS_AS(ntp_loss(Tensor({3, 30}), seq), EmptyLossError);
}

TEST_CASE("ntp gradients pass a finite-difference check on a depth-2 model") {
  const ModelConfig c = small_config();
  const Checkpoint ck = build_model(c);
  Rng rng(2);
  const TokenSequence seq = gen_sample(rng);
  const GraphLossFn fn = [&](Tape& tape, std::span<const Var> w) {
    return ntp_loss(forward(tape, w, c, seq, false).logits, seq);
  };
  const auto reports = grad_check(fn, ck.weights);
  CHECK(reports.size() == ck.weights.size() * 4);
  CHECK(max_relative_error(reports) < 1e-4);
}

TEST_CASE("task names") {
  CHECK(parse_task("gen") == Task::kGeneration);
  CHECK(parse_task("understanding") == Task::kUnderstanding);
  CHECK(to_string(Task::kGeneration) == "generation");
  CHECK_THROWS_AS(parse_task("vision"), InputError);
}
