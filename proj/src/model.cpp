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

#include "aialab/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "aialab/errors.hpp"
#include "aialab/rng.hpp"

namespace aialab {

std::string_view to_string(Task task) { return task == Task::kGeneration ? "generation" : "understanding"; }

Task parse_task(std::string_view name) {
  if (name == "generation" || name == "gen") return Task::kGeneration;
  if (name == "understanding" || name == "und") return Task::kUnderstanding;
  throw InputError("unknown task '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  if (depth == 0 || heads == 0 || dim == 0) throw ConfigError("depth, heads and dim must be positive");
  if (dim % heads != 0) {
    throw ConfigError("dim " + std::to_string(dim) + " is not divisible by heads " + std::to_string(heads));
  }
  if (text_vocab == 0 || image_vocab == 0) throw ConfigError("text and image vocabularies must be non-empty");
  if (max_len == 0) throw ConfigError("max_len must be positive");
  const std::set<int> ids{special.pad, special.bos, special.eos, special.img_start, special.img_end, special.ans};
  if (ids.size() != kSpecialCount) throw ConfigError("special token ids must be distinct");
  if (*ids.begin() < 0 || *ids.rbegin() >= static_cast<int>(kSpecialCount)) {
    throw ConfigError("special token ids must lie in [0, 6)");
  }
}

void validate_sequence(const TokenSequence& seq, const ModelConfig& config) {
  const std::size_t n = seq.ids.size();
  if (n == 0) throw InputError("empty sequence");
  if (seq.modality.size() != n || seq.loss_mask.size() != n) throw InputError("ids, modality and loss_mask lengths differ");
  if (n > config.max_len) {
    throw InputError("sequence length " + std::to_string(n) + " exceeds max_len " + std::to_string(config.max_len));
  }
  const int vocab = static_cast<int>(config.joint_vocab());
  for (std::size_t i = 0; i < n; ++i) {
    if (seq.ids[i] < 0 || seq.ids[i] >= vocab) {
      throw InputError("token id " + std::to_string(seq.ids[i]) + " at position " + std::to_string(i) +
                       " outside joint vocabulary of " + std::to_string(vocab));
    }
    if (seq.modality[i] == Modality::kPad && seq.loss_mask[i]) {
      throw InputError("PAD position " + std::to_string(i) + " carries loss");
    }
  }
  if (seq.modality[0] == Modality::kPad) throw InputError("sequence may not start with PAD");
}

namespace {

constexpr std::size_t kPerLayer = 16;

// Offsets of each tensor inside one layer's block.
enum LayerSlot : std::size_t {
  kLn1Gain, kLn1Bias, kWq, kBq, kWk, kBk, kWv, kBv, kWo, kBo, kLn2Gain, kLn2Bias, kW1, kB1, kW2, kB2
};

std::size_t layer_base(std::size_t layer) { return 2 + kPerLayer * layer; }

}  // namespace

std::size_t expected_parameter_count(const ModelConfig& c) {
  const std::size_t v = c.joint_vocab(), d = c.dim;
  return v * d + c.max_len * d + c.depth * (12 * d * d + 13 * d) + 2 * d + d * v + v;
}

std::vector<std::string> parameter_names(const ModelConfig& config) {
  static const char* kLayerNames[kPerLayer] = {"ln1.gain", "ln1.bias", "attn.wq",  "attn.bq",  "attn.wk",  "attn.bk",
                                               "attn.wv",  "attn.bv",  "attn.wo",  "attn.bo",  "ln2.gain", "ln2.bias",
                                               "mlp.w1",   "mlp.b1",   "mlp.w2",   "mlp.b2"};
  std::vector<std::string> names{"tok_emb", "pos_emb"};
  for (std::size_t l = 0; l < config.depth; ++l) {
    for (const char* n : kLayerNames) names.push_back("layers." + std::to_string(l) + "." + n);
  }
  for (const char* n : {"ln_f.gain", "ln_f.bias", "head.w", "head.b"}) names.emplace_back(n);
  return names;
}

Checkpoint build_model(const ModelConfig& config) {
  config.validate();
  const std::size_t d = config.dim, v = config.joint_vocab(), hidden = kMlpRatio * d;
  const double std_in = 0.02;
  const double std_out = 0.02 / std::sqrt(2.0 * static_cast<double>(config.depth));
  Rng rng(config.seed);
  const auto names = parameter_names(config);
  Checkpoint ckpt;
  ckpt.config = config;
  std::size_t next = 0;
  auto normal = [&](Shape shape, double sd) {
    Tensor t(std::move(shape));
    for (double& x : t.values()) x = sd * standard_normal(rng);
    ckpt.weights.push_back({names[next++], std::move(t)});
  };
  auto constant = [&](Shape shape, double value) { ckpt.weights.push_back({names[next++], Tensor::filled(std::move(shape), value)}); };

  normal({v, d}, std_in);
  normal({config.max_len, d}, std_in);
  for (std::size_t l = 0; l < config.depth; ++l) {
    constant({d}, 1.0);
    constant({d}, 0.0);
    for (int i = 0; i < 3; ++i) {
      normal({d, d}, std_in);
      constant({d}, 0.0);
    }
    normal({d, d}, std_out);
    constant({d}, 0.0);
    constant({d}, 1.0);
    constant({d}, 0.0);
    normal({d, hidden}, std_in);
    constant({hidden}, 0.0);
    normal({hidden, d}, std_out);
    constant({d}, 0.0);
  }
  constant({d}, 1.0);
  constant({d}, 0.0);
  normal({d, v}, std_in);
  constant({v}, 0.0);
  return ckpt;
}

std::vector<Var> bind_parameters(Tape& tape, const ParamSet& params, bool requires_grad) {
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(requires_grad ? tape.parameter(p.value) : tape.constant(p.value));
  return vars;
}

GraphForward forward(Tape& tape, std::span<const Var> w, const ModelConfig& config, const TokenSequence& seq,
                     bool record_attention) {
  validate_sequence(seq, config);
  if (w.size() != 2 + kPerLayer * config.depth + 4) throw ShapeError("forward: weight count does not match config");
  const std::size_t n = seq.size(), heads = config.heads, hd = config.head_dim();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));

  Mask mask(n, n, false);
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t k = 0; k <= q; ++k) mask.set(q, k, seq.modality[k] != Modality::kPad);
  }
  std::vector<int> positions(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = static_cast<int>(i);

  GraphForward out;
  if (record_attention) {
    out.attention.layers = config.depth;
    out.attention.heads = heads;
    out.attention.length = n;
    out.attention.modality = seq.modality;
    out.attention.tape = &tape;
  }

  Var x = ad::add(ad::embedding(w[0], seq.ids), ad::embedding(w[1], positions));
  for (std::size_t l = 0; l < config.depth; ++l) {
    const auto p = [&](std::size_t slot) { return w[layer_base(l) + slot]; };
    const Var h = ad::layer_norm(x, p(kLn1Gain), p(kLn1Bias));
    const Var q = ad::add_bias(ad::matmul(h, p(kWq)), p(kBq));
    const Var k = ad::add_bias(ad::matmul(h, p(kWk)), p(kBk));
    const Var v = ad::add_bias(ad::matmul(h, p(kWv)), p(kBv));
    std::vector<Var> head_out;
    head_out.reserve(heads);
    for (std::size_t hh = 0; hh < heads; ++hh) {
      const Var qh = ad::col_slice(q, hh * hd, hd);
      const Var kh = ad::col_slice(k, hh * hd, hd);
      const Var vh = ad::col_slice(v, hh * hd, hd);
      const Var probs = ad::softmax_rows(ad::scale(ad::matmul_nt(qh, kh), inv_sqrt), mask);
      if (record_attention) {
        out.attention.probs.push_back(probs.value());
        out.attention.nodes.push_back(probs);
      }
      head_out.push_back(ad::matmul(probs, vh));
    }
    const Var attn = ad::add_bias(ad::matmul(ad::concat_cols(head_out), p(kWo)), p(kBo));
    x = ad::add(x, attn);
    const Var h2 = ad::layer_norm(x, p(kLn2Gain), p(kLn2Bias));
    const Var m = ad::gelu(ad::add_bias(ad::matmul(h2, p(kW1)), p(kB1)));
    x = ad::add(x, ad::add_bias(ad::matmul(m, p(kW2)), p(kB2)));
  }
  const std::size_t f = layer_base(config.depth);
  const Var hf = ad::layer_norm(x, w[f], w[f + 1]);
  out.logits = ad::add_bias(ad::matmul(hf, w[f + 2]), w[f + 3]);
  return out;
}

ForwardOutput forward(const Checkpoint& checkpoint, const TokenSequence& seq, bool record_attention) {
  Tape tape;
  const auto weights = bind_parameters(tape, checkpoint.weights, false);
  GraphForward g = forward(tape, weights, checkpoint.config, seq, record_attention);
  ForwardOutput out;
  out.logits = g.logits.value();
  if (record_attention) {
    g.attention.tape = nullptr;
    g.attention.nodes.clear();
    out.attention = std::move(g.attention);
  }
  return out;
}

NtpTargets ntp_targets(const TokenSequence& seq) {
  const std::size_t n = seq.size();
  NtpTargets t;
  t.targets.assign(n, 0);
  t.mask.assign(n, false);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!seq.loss_mask[i + 1]) continue;
    t.targets[i] = seq.ids[i + 1];
    t.mask[i] = true;
    ++t.count;
  }
  if (t.count == 0) throw EmptyLossError("ntp_loss: no supervised target in sequence");
  return t;
}

double ntp_loss(const Tensor& logits, const TokenSequence& seq) {
  const NtpTargets t = ntp_targets(seq);
  if (logits.rank() != 2 || logits.rows() != seq.size()) throw ShapeError("ntp_loss: logits rows must equal sequence length");
  return cross_entropy(logits, t.targets, t.mask);
}

Var ntp_loss(Var logits, const TokenSequence& seq) {
  const NtpTargets t = ntp_targets(seq);
  if (logits.value().rank() != 2 || logits.value().rows() != seq.size()) {
    throw ShapeError("ntp_loss: logits rows must equal sequence length");
  }
  return ad::cross_entropy(logits, t.targets, t.mask);
}

}  // namespace aialab
