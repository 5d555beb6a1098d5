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

#include "aialab/autodiff.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "aialab/errors.hpp"
#include "aialab/parallel.hpp"

namespace aialab {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

ConstMatMap view(const Tensor& t) { return ConstMatMap(t.data(), t.rows(), t.cols()); }
MatMap view(double* p, std::size_t r, std::size_t c) { return MatMap(p, r, c); }

Tape& same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) throw Error("operands recorded on different tapes");
  return *a.tape;
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected rank-2 operand, got " + shape_string(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

Tensor masked_softmax(const Tensor& x, const Mask& mask) {
  require_rank2(x, "softmax_rows");
  const std::size_t rows = x.rows(), cols = x.cols();
  if (mask.rows != rows || mask.cols != cols) throw ShapeError("softmax_rows: mask shape does not match input");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  Tensor out({rows, cols});
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.data() + r * cols;
    double* o = out.data() + r * cols;
    double peak = kNegInf;
    std::size_t valid = 0;
    bool finite = true;
    for (std::size_t c = 0; c < cols; ++c) {
      o[c] = mask(r, c) ? in[c] : kNegInf;
      if (mask(r, c)) {
        ++valid;
        finite = finite && std::isfinite(in[c]);
      }
      peak = std::max(peak, o[c]);
    }
    if (valid == 0) throw InvalidMaskError("softmax_rows: row " + std::to_string(r) + " has no valid position");
    if (!finite) {
      // Non-finite scores propagate so the caller's divergence checks see them.
      for (std::size_t c = 0; c < cols; ++c) o[c] = mask(r, c) ? std::numeric_limits<double>::quiet_NaN() : 0.0;
      continue;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      o[c] = std::exp(o[c] - peak);
      total += o[c];
    }
    const double inv = 1.0 / total;
    for (std::size_t c = 0; c < cols; ++c) o[c] *= inv;
  }
  return out;
}

void check_targets(const Tensor& logits, std::span<const int> targets, const std::vector<bool>& mask) {
  require_rank2(logits, "cross_entropy");
  if (targets.size() != logits.rows() || mask.size() != logits.rows()) {
    throw ShapeError("cross_entropy: targets/mask length must equal logits rows");
  }
  bool any = false;
  for (std::size_t r = 0; r < mask.size(); ++r) {
    if (!mask[r]) continue;
    any = true;
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= logits.cols()) {
      throw InputError("cross_entropy: target id " + std::to_string(targets[r]) + " out of range");
    }
  }
  if (!any) throw EmptyLossError("cross_entropy: every position is masked");
}

double row_logsumexp(const double* row, std::size_t n) {
  double peak = row[0];
  for (std::size_t c = 1; c < n; ++c) peak = std::max(peak, row[c]);
  double total = 0.0;
  for (std::size_t c = 0; c < n; ++c) total += std::exp(row[c] - peak);
  return peak + std::log(total);
}

double nll_total(const Tensor& logits, std::span<const int> targets, const std::vector<bool>& mask) {
  const std::size_t cols = logits.cols();
  double total = 0.0;
  for (std::size_t r = 0; r < mask.size(); ++r) {
    if (!mask[r]) continue;
    const double* row = logits.data() + r * cols;
    total += row_logsumexp(row, cols) - row[targets[r]];
  }
  return total;
}

}  // namespace

const Tensor& Var::value() const { return tape->value(id); }

// ---------------------------------------------------------------------------
// Tape

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), Tensor(), false, false, nullptr});
  return Var{this, nodes_.size() - 1};
}

Var Tape::parameter(Tensor value) {
  nodes_.push_back(Node{std::move(value), Tensor(), true, false, nullptr});
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn fn) {
  bool needs = false;
  for (const Var& v : inputs) {
    if (v.tape != this) throw Error("input recorded on a different tape");
    needs = needs || nodes_[v.id].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Tensor(), needs, false, needs ? std::move(fn) : nullptr});
  return Var{this, nodes_.size() - 1};
}

double* Tape::accumulate(std::size_t id) {
  Node& node = nodes_[id];
  if (!node.has_grad) {
    node.grad = Tensor(node.value.shape());
    node.has_grad = true;
  }
  return node.grad.data();
}

Tensor Tape::gradient(Var v) const {
  const Node& node = nodes_.at(v.id);
  if (node.has_grad) return node.grad;
  return Tensor(node.value.shape());
}

void Tape::backward(Var scalar_output) {
  const Seed seed{scalar_output, 1.0};
  backward(std::span<const Seed>(&seed, 1));
}

void Tape::backward(std::span<const Seed> seeds) {
  std::size_t top = 0;
  bool any = false;
  for (const Seed& s : seeds) {
    if (s.var.tape != this) throw Error("backward seed belongs to a different tape");
    if (nodes_[s.var.id].value.size() != 1) throw ShapeError("backward seeds must be scalar nodes");
    if (!nodes_[s.var.id].requires_grad) continue;
    accumulate(s.var.id)[0] += s.gradient;
    top = std::max(top, s.var.id);
    any = true;
  }
  if (!any) return;
  for (std::size_t i = top + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.has_grad && node.backward) node.backward(*this, i);
  }
}

// ---------------------------------------------------------------------------
// Operations

namespace ad {

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_rank2(A, "matmul");
  require_rank2(B, "matmul");
  if (A.cols() != B.rows()) throw ShapeError("matmul: inner dimensions differ " + shape_string(A.shape()) + " x " + shape_string(B.shape()));
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor out({m, n});
  view(out.data(), m, n).noalias() = view(A) * view(B);
  return t.record(std::move(out), {a, b}, [ia = a.id, ib = b.id, m, k, n](Tape& tp, std::size_t self) {
    const Tensor& g = tp.upstream(self);
    if (tp.requires_grad(ia)) view(tp.accumulate(ia), m, k).noalias() += view(g) * view(tp.value(ib)).transpose();
    if (tp.requires_grad(ib)) view(tp.accumulate(ib), k, n).noalias() += view(tp.value(ia)).transpose() * view(g);
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_rank2(A, "matmul_nt");
  require_rank2(B, "matmul_nt");
  if (A.cols() != B.cols()) throw ShapeError("matmul_nt: inner dimensions differ");
  const std::size_t m = A.rows(), k = A.cols(), n = B.rows();
  Tensor out({m, n});
  view(out.data(), m, n).noalias() = view(A) * view(B).transpose();
  return t.record(std::move(out), {a, b}, [ia = a.id, ib = b.id, m, k, n](Tape& tp, std::size_t self) {
    const Tensor& g = tp.upstream(self);
    if (tp.requires_grad(ia)) view(tp.accumulate(ia), m, k).noalias() += view(g) * view(tp.value(ib));
    if (tp.requires_grad(ib)) view(tp.accumulate(ib), n, k).noalias() += view(g).transpose() * view(tp.value(ia));
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_same_shape(A, B, "add");
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  return t.record(std::move(out), {a, b}, [ia = a.id, ib = b.id](Tape& tp, std::size_t self) {
    const Tensor& g = tp.upstream(self);
    for (std::size_t in : {ia, ib}) {
      if (!tp.requires_grad(in)) continue;
      double* d = tp.accumulate(in);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    }
  });
}

Var add_bias(Var x, Var bias) {
  Tape& t = same_tape(x, bias);
  const Tensor& X = x.value();
  const Tensor& B = bias.value();
  require_rank2(X, "add_bias");
  if (B.rank() != 1 || B.size() != X.cols()) throw ShapeError("add_bias: bias must be a vector of length cols");
  const std::size_t rows = X.rows(), cols = X.cols();
  Tensor out = X;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += B[c];
  }
  return t.record(std::move(out), {x, bias}, [ix = x.id, ib = bias.id, rows, cols](Tape& tp, std::size_t self) {
    const Tensor& g = tp.upstream(self);
    if (tp.requires_grad(ix)) {
      double* d = tp.accumulate(ix);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    }
    if (tp.requires_grad(ib)) {
      double* d = tp.accumulate(ib);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) d[c] += g[r * cols + c];
      }
    }
  });
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_same_shape(A, B, "mul");
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  return t.record(std::move(out), {a, b}, [ia = a.id, ib = b.id](Tape& tp, std::size_t self) {
    const Tensor& g = tp.upstream(self);
    if (tp.requires_grad(ia)) {
      const Tensor& Bv = tp.value(ib);
      double* d = tp.accumulate(ia);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * Bv[i];
    }
    if (tp.requires_grad(ib)) {
      const Tensor& Av = tp.value(ia);
      double* d = tp.accumulate(ib);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * Av[i];
    }
  });
}

Var scale(Var x, double c) {
  Tensor out = x.value();
  for (double& v : out.values()) v *= c;
  return x.tape->record(std::move(out), {x}, [ix = x.id, c](Tape& tp, std::size_t self) {
    const Tensor& g = tp.upstream(self);
    double* d = tp.accumulate(ix);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += c * g[i];
  });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Var gelu(Var x) {
  const Tensor& X = x.value();
  Tensor out(X.shape());
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double v = X[i];
    out[i] = 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  }
  return x.tape->record(std::move(out), {x}, [ix = x.id](Tape& tp, std::size_t self) {
    const Tensor& g = tp.upstream(self);
    const Tensor& Xv = tp.value(ix);
    double* d = tp.accumulate(ix);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = Xv[i];
      const double th = std::tanh(kGeluC * (v + kGeluA * v * v * v));
      const double du = kGeluC * (1.0 + 3.0 * kGeluA * v * v);
      d[i] += g[i] * (0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * du);
    }
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  Tape& t = same_tape(x, gain);
  same_tape(x, bias);
  const Tensor& X = x.value();
  require_rank2(X, "layer_norm");
  const std::size_t rows = X.rows(), cols = X.cols();
  if (gain.value().size() != cols || bias.value().size() != cols) throw ShapeError("layer_norm: gain/bias length must equal cols");
  const Tensor& G = gain.value();
  const Tensor& B = bias.value();
  std::vector<double> xhat(rows * cols);
  std::vector<double> rstd(rows);
  Tensor out({rows, cols});
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = X.data() + r * cols;
    double mean = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mean += in[c];
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) var += (in[c] - mean) * (in[c] - mean);
    var /= static_cast<double>(cols);
    rstd[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      const double h = (in[c] - mean) * rstd[r];
      xhat[r * cols + c] = h;
      out[r * cols + c] = h * G[c] + B[c];
    }
  }
  return t.record(std::move(out), {x, gain, bias},
                  [ix = x.id, ig = gain.id, ib = bias.id, rows, cols, xhat = std::move(xhat),
                   rstd = std::move(rstd)](Tape& tp, std::size_t self) {
                    const Tensor& g = tp.upstream(self);
                    const Tensor& Gv = tp.value(ig);
                    if (tp.requires_grad(ig)) {
                      double* d = tp.accumulate(ig);
                      for (std::size_t i = 0; i < g.size(); ++i) d[i % cols] += g[i] * xhat[i];
                    }
                    if (tp.requires_grad(ib)) {
                      double* d = tp.accumulate(ib);
                      for (std::size_t i = 0; i < g.size(); ++i) d[i % cols] += g[i];
                    }
                    if (tp.requires_grad(ix)) {
                      double* d = tp.accumulate(ix);
                      const double inv_n = 1.0 / static_cast<double>(cols);
                      for (std::size_t r = 0; r < rows; ++r) {
                        double mean_dh = 0.0, mean_dh_h = 0.0;
                        for (std::size_t c = 0; c < cols; ++c) {
                          const double dh = g[r * cols + c] * Gv[c];
                          mean_dh += dh;
                          mean_dh_h += dh * xhat[r * cols + c];
                        }
                        mean_dh *= inv_n;
                        mean_dh_h *= inv_n;
                        for (std::size_t c = 0; c < cols; ++c) {
                          const double dh = g[r * cols + c] * Gv[c];
                          d[r * cols + c] += rstd[r] * (dh - mean_dh - xhat[r * cols + c] * mean_dh_h);
                        }
                      }
                    }
                  });
}

Var embedding(Var table, std::span<const int> ids) {
  const Tensor& W = table.value();
  require_rank2(W, "embedding");
  const std::size_t vocab = W.rows(), dim = W.cols();
  if (ids.empty()) throw InputError("embedding: empty id list");
  Tensor out({ids.size(), dim});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= vocab) {
      throw InputError("embedding: id " + std::to_string(ids[r]) + " outside [0, " + std::to_string(vocab) + ")");
    }
    std::copy_n(W.data() + static_cast<std::size_t>(ids[r]) * dim, dim, out.data() + r * dim);
  }
  return table.tape->record(std::move(out), {table},
                            [it = table.id, dim, rows = std::vector<int>(ids.begin(), ids.end())](Tape& tp, std::size_t self) {
                              const Tensor& g = tp.upstream(self);
                              double* d = tp.accumulate(it);
                              for (std::size_t r = 0; r < rows.size(); ++r) {
                                double* dst = d + static_cast<std::size_t>(rows[r]) * dim;
                                const double* src = g.data() + r * dim;
                                for (std::size_t c = 0; c < dim; ++c) dst[c] += src[c];
                              }
                            });
}

Var col_slice(Var x, std::size_t offset, std::size_t width) {
  const Tensor& X = x.value();
  require_rank2(X, "col_slice");
  const std::size_t rows = X.rows(), cols = X.cols();
  if (width == 0 || offset + width > cols) throw ShapeError("col_slice: slice outside input columns");
  Tensor out({rows, width});
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(X.data() + r * cols + offset, width, out.data() + r * width);
  return x.tape->record(std::move(out), {x}, [ix = x.id, rows, cols, offset, width](Tape& tp, std::size_t self) {
    const Tensor& g = tp.upstream(self);
    double* d = tp.accumulate(ix);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < width; ++c) d[r * cols + offset + c] += g[r * width + c];
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Tape& t = *parts.front().tape;
  const std::size_t rows = parts.front().value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.value().rows() != rows) throw ShapeError("concat_cols: row counts differ");
    widths.push_back(p.value().cols());
    total += widths.back();
  }
  Tensor out({rows, total});
  std::size_t offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Tensor& P = parts[i].value();
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(P.data() + r * widths[i], widths[i], out.data() + r * total + offset);
    offset += widths[i];
  }
  std::vector<std::size_t> ids;
  for (const Var& p : parts) ids.push_back(p.id);
  return t.record(std::move(out), parts, [ids, widths, rows, total](Tape& tp, std::size_t self) {
    const Tensor& g = tp.upstream(self);
    std::size_t offset = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (tp.requires_grad(ids[i])) {
        double* d = tp.accumulate(ids[i]);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < widths[i]; ++c) d[r * widths[i] + c] += g[r * total + offset + c];
        }
      }
      offset += widths[i];
    }
  });
}

Var softmax_rows(Var x, const Mask& mask) {
  Tensor out = masked_softmax(x.value(), mask);
  const std::size_t rows = out.rows(), cols = out.cols();
  return x.tape->record(std::move(out), {x}, [ix = x.id, rows, cols](Tape& tp, std::size_t self) {
    const Tensor& g = tp.upstream(self);
    const Tensor& p = tp.value(self);
    double* d = tp.accumulate(ix);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* pr = p.data() + r * cols;
      const double* gr = g.data() + r * cols;
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += pr[c] * gr[c];
      for (std::size_t c = 0; c < cols; ++c) d[r * cols + c] += pr[c] * (gr[c] - dot);
    }
  });
}

Var sum(Var x) {
  const double total = deterministic_sum(x.value().values());
  return x.tape->record(Tensor::scalar(total), {x}, [ix = x.id](Tape& tp, std::size_t self) {
    const double g = tp.upstream(self)[0];
    const std::size_t n = tp.value(ix).size();
    double* d = tp.accumulate(ix);
    for (std::size_t i = 0; i < n; ++i) d[i] += g;
  });
}

Var add_n(std::span<const Var> scalars) {
  if (scalars.empty()) throw ShapeError("add_n: no inputs");
  double total = 0.0;
  for (const Var& s : scalars) total += s.value().item();
  std::vector<std::size_t> ids;
  for (const Var& s : scalars) ids.push_back(s.id);
  return scalars.front().tape->record(Tensor::scalar(total), scalars, [ids](Tape& tp, std::size_t self) {
    const double g = tp.upstream(self)[0];
    for (std::size_t id : ids) {
      if (tp.requires_grad(id)) tp.accumulate(id)[0] += g;
    }
  });
}

Var nll_sum(Var logits, std::span<const int> targets, const std::vector<bool>& mask) {
  const Tensor& L = logits.value();
  check_targets(L, targets, mask);
  const double total = nll_total(L, targets, mask);
  return logits.tape->record(
      Tensor::scalar(total), {logits},
      [il = logits.id, tg = std::vector<int>(targets.begin(), targets.end()), mask](Tape& tp, std::size_t self) {
        const double g = tp.upstream(self)[0];
        const Tensor& Lv = tp.value(il);
        const std::size_t cols = Lv.cols();
        double* d = tp.accumulate(il);
        for (std::size_t r = 0; r < mask.size(); ++r) {
          if (!mask[r]) continue;
          const double* row = Lv.data() + r * cols;
          const double lse = row_logsumexp(row, cols);
          for (std::size_t c = 0; c < cols; ++c) d[r * cols + c] += g * std::exp(row[c] - lse);
          d[r * cols + static_cast<std::size_t>(tg[r])] -= g;
        }
      });
}

Var cross_entropy(Var logits, std::span<const int> targets, const std::vector<bool>& mask) {
  const Var total = nll_sum(logits, targets, mask);
  const auto count = static_cast<double>(std::count(mask.begin(), mask.end(), true));
  return scale(total, 1.0 / count);
}

Var block_sum(Var x, const std::vector<bool>& rows, const std::vector<bool>& cols) {
  const Tensor& X = x.value();
  require_rank2(X, "block_sum");
  if (rows.size() != X.rows() || cols.size() != X.cols()) throw ShapeError("block_sum: mask lengths must match input");
  const std::size_t ncols = X.cols();
  double total = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r]) continue;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (cols[c]) total += X[r * ncols + c];
    }
  }
  return x.tape->record(Tensor::scalar(total), {x}, [ix = x.id, rows, cols, ncols](Tape& tp, std::size_t self) {
    const double g = tp.upstream(self)[0];
    double* d = tp.accumulate(ix);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows[r]) continue;
      for (std::size_t c = 0; c < ncols; ++c) {
        if (cols[c]) d[r * ncols + c] += g;
      }
    }
  });
}

}  // namespace ad

Tensor softmax_rows(const Tensor& x, const Mask& mask) { return masked_softmax(x, mask); }

double cross_entropy(const Tensor& logits, std::span<const int> targets, const std::vector<bool>& mask) {
  check_targets(logits, targets, mask);
  const auto count = static_cast<double>(std::count(mask.begin(), mask.end(), true));
  return nll_total(logits, targets, mask) / count;
}

}  // namespace aialab
