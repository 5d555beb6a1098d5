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
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "aialab/tensor.hpp"

namespace aialab {

class Tape;

/// Handle to a node on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  double item() const { return value().item(); }
};

/// Gradient seed for a scalar node.
struct Seed {
  Var var;
  double gradient = 1.0;
};

/// Records operations in execution order and replays them in reverse to
/// accumulate gradients. Nodes live in a deque so references to values stay
/// valid while the tape grows.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor value);

  /// Appends a node. fn is kept only if some input requires a gradient.
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn fn);
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(fn));
  }

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  /// Upstream gradient of a node during backward (same shape as its value).
  const Tensor& upstream(std::size_t id) const { return nodes_[id].grad; }

  /// Gradient buffer of an input, zero-initialized on first touch.
  double* accumulate(std::size_t id);

  /// Gradient after backward; zeros if the node was never reached.
  Tensor gradient(Var v) const;

  void backward(Var scalar_output);
  void backward(std::span<const Seed> seeds);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;
};

namespace ad {

// Graph operations. Every op that takes two Vars requires them on the same tape.

Var matmul(Var a, Var b);     // (m,k)(k,n) -> (m,n)
Var matmul_nt(Var a, Var b);  // (m,k)(n,k)^T -> (m,n)
Var add(Var a, Var b);
Var add_bias(Var x, Var bias);  // (m,n) + (n)
Var mul(Var a, Var b);          // elementwise
Var scale(Var x, double c);
Var gelu(Var x);  // tanh approximation
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
Var embedding(Var table, std::span<const int> ids);
Var col_slice(Var x, std::size_t offset, std::size_t width);
Var concat_cols(std::span<const Var> parts);
Var softmax_rows(Var x, const Mask& mask);
Var sum(Var x);
Var add_n(std::span<const Var> scalars);

/// Sum of -log softmax(logits[r])[targets[r]] over rows where mask[r].
Var nll_sum(Var logits, std::span<const int> targets, const std::vector<bool>& mask);

/// Mean of nll_sum over the unmasked rows.
Var cross_entropy(Var logits, std::span<const int> targets, const std::vector<bool>& mask);

/// Sum of x[r, c] over rows[r] && cols[c].
Var block_sum(Var x, const std::vector<bool>& rows, const std::vector<bool>& cols);

}  // namespace ad

/// Row-wise masked softmax on plain values. Masked entries come out exactly 0.
Tensor softmax_rows(const Tensor& x, const Mask& mask);

/// Mean negative log-likelihood over unmasked rows.
double cross_entropy(const Tensor& logits, std::span<const int> targets, const std::vector<bool>& mask);

}  // namespace aialab
