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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "aialab/autodiff.hpp"
#include "aialab/tensor.hpp"

namespace aialab {

struct GradReport {
  std::string parameter;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

/// |a - n| / max(1e-12, |a| + |n|)
double relative_error(double analytic, double numeric);

struct GradCheckOptions {
  double step = 1e-5;
  // Entries checked per tensor: the ones with the largest analytic magnitude,
  // since entries below the finite-difference noise floor say nothing.
  std::size_t entries_per_tensor = 4;
};

using LossFn = std::function<double(const ParamSet&)>;
using GraphLossFn = std::function<Var(Tape&, std::span<const Var>)>;

/// Central differences (f(p+h) - f(p-h)) / 2h against a supplied gradient.
std::vector<GradReport> grad_check(const LossFn& loss, const ParamSet& params, const ParamSet& analytic,
                                   const GradCheckOptions& options = {});

/// Same, with the analytic gradient taken from a backward pass over fn.
std::vector<GradReport> grad_check(const GraphLossFn& fn, const ParamSet& params, const GradCheckOptions& options = {});

struct LossAndGradient {
  double loss = 0.0;
  ParamSet gradient;
};

LossAndGradient evaluate_gradient(const GraphLossFn& fn, const ParamSet& params);
double evaluate_loss(const GraphLossFn& fn, const ParamSet& params);

double max_relative_error(std::span<const GradReport> reports);

}  // namespace aialab
