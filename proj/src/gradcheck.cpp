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

#include "aialab/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aialab/errors.hpp"

namespace aialab {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-12, std::abs(analytic) + std::abs(numeric));
}

namespace {

std::vector<std::size_t> pick_entries(const Tensor& grad, std::size_t k) {
  std::vector<std::size_t> order(grad.size());
  std::iota(order.begin(), order.end(), 0);
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double ma = std::abs(grad[a]), mb = std::abs(grad[b]);
                      return ma != mb ? ma > mb : a < b;
                    });
  order.resize(k);
  return order;
}

}  // namespace

std::vector<GradReport> grad_check(const LossFn& loss, const ParamSet& params, const ParamSet& analytic,
                                   const GradCheckOptions& options) {
  if (!(options.step > 0.0)) throw ParameterError("grad_check: step must be positive");
  if (analytic.size() != params.size()) throw ShapeError("grad_check: gradient/parameter count mismatch");
  ParamSet probe = params;
  std::vector<GradReport> reports;
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (analytic[t].value.shape() != params[t].value.shape()) {
      throw ShapeError("grad_check: gradient shape mismatch for " + params[t].name);
    }
    for (std::size_t i : pick_entries(analytic[t].value, options.entries_per_tensor)) {
      const double original = params[t].value[i];
      probe[t].value[i] = original + options.step;
      const double up = loss(probe);
      probe[t].value[i] = original - options.step;
      const double down = loss(probe);
      probe[t].value[i] = original;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw PerturbationError("grad_check: non-finite loss when perturbing " + params[t].name + "[" +
                                std::to_string(i) + "]");
      }
      GradReport r;
      r.parameter = params[t].name;
      r.index = i;
      r.analytic = analytic[t].value[i];
      r.numeric = (up - down) / (2.0 * options.step);
      r.relative_error = relative_error(r.analytic, r.numeric);
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

LossAndGradient evaluate_gradient(const GraphLossFn& fn, const ParamSet& params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.parameter(p.value));
  const Var out = fn(tape, vars);
  tape.backward(out);
  LossAndGradient result;
  result.loss = out.item();
  for (std::size_t i = 0; i < params.size(); ++i) result.gradient.push_back({params[i].name, tape.gradient(vars[i])});
  return result;
}

double evaluate_loss(const GraphLossFn& fn, const ParamSet& params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.constant(p.value));
  return fn(tape, vars).item();
}

std::vector<GradReport> grad_check(const GraphLossFn& fn, const ParamSet& params, const GradCheckOptions& options) {
  const LossAndGradient base = evaluate_gradient(fn, params);
  return grad_check([&](const ParamSet& p) { return evaluate_loss(fn, p); }, params, base.gradient, options);
}

double max_relative_error(std::span<const GradReport> reports) {
  double worst = 0.0;
  for (const auto& r : reports) worst = std::max(worst, r.relative_error);
  return worst;
}

}  // namespace aialab
