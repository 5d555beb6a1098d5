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
#include <string>
#include <utility>
#include <vector>

#include "aialab/aia.hpp"
#include "aialab/intensity.hpp"
#include "aialab/model.hpp"
#include "aialab/tasks.hpp"

namespace aialab {

enum class Regime : std::uint8_t {
  kSft,   // random init, AIA from the first step
  kPost,  // warm start from a converged checkpoint, then AIA fine-tune
};

std::string_view to_string(Regime r);
Regime parse_regime(std::string_view name);

/// "50:1" -> {50, 1}; both parts must be positive.
std::pair<double, double> parse_ratio(std::string_view text);

enum class LrSchedule : std::uint8_t { kConstant, kCosine };

std::string_view to_string(LrSchedule s);
LrSchedule parse_lr_schedule(std::string_view name);

struct OptimizerConfig {
  double lr = 3e-4;  // peak rate when a schedule is set
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 0.01;
  double clip_norm = 1.0;
  LrSchedule schedule = LrSchedule::kConstant;
  std::size_t warmup_steps = 0;  // linear ramp over the first steps
};

/// Learning rate of 1-based step `step` out of `total_steps`. Cosine decays
/// from lr after warmup toward zero at the end of training.
double learning_rate(const OptimizerConfig& config, std::size_t step, std::size_t total_steps);

struct TrainConfig {
  ModelConfig model;
  MixerConfig mixer;
  TaskOptions tasks;
  OptimizerConfig optimizer;

  double lambda = 40.0;
  // NTP:AIA weight ratio. When set, lambda is derived from the loss
  // magnitudes on the first calibration_batches batches at initial weights.
  std::optional<std::pair<double, double>> ratio;
  std::size_t calibration_batches = 8;
  // false removes the AIA path from the step entirely.
  bool aia_enabled = true;

  // Unset: Emu3 tables for sft, Janus-Pro tables for post.
  std::optional<Provenance> provenance;
  std::optional<TargetSchedule> generation_schedule;  // overrides the built-in table
  std::optional<TargetSchedule> understanding_schedule;
  PenaltyVariant variant = PenaltyVariant::kCenter;

  std::size_t steps = 2000;
  std::size_t batch_size = 8;
  std::size_t eval_interval = 0;  // 0: evaluate only after the last step
  std::size_t eval_samples = 100;
  std::uint64_t eval_seed = 0;

  Regime regime = Regime::kSft;
  std::optional<std::string> warm_start;
  std::optional<std::string> out_dir;

  void validate() const;
  Provenance schedule_provenance() const;
  std::vector<LayerTarget> targets(Task task) const;
};

std::string train_config_to_json(const TrainConfig& config, std::optional<double> resolved_lambda = std::nullopt,
                                 const std::string& lambda_source = "");
TrainConfig train_config_from_json(const std::string& text);

struct StepRecord {
  std::size_t step = 0;
  Task task = Task::kGeneration;
  double ntp = 0.0;
  double aia = 0.0;
  double total = 0.0;
  double grad_norm = 0.0;
  bool clipped = false;
};

struct EvalRecord {
  std::size_t step = 0;
  Task task = Task::kGeneration;
  double ntp = 0.0;
  IntensityProfile mean;
  std::vector<double> std;
  double std_scalar = 0.0;
  double alignment_gap = 0.0;
};

struct RunLog {
  double lambda = 0.0;
  std::string lambda_source;
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
  std::size_t clip_events = 0;
  double wall_seconds = 0.0;

  /// Last evaluation record for a task; throws if none exists.
  const EvalRecord& final_eval(Task task) const;
};

struct BatchLoss {
  double ntp = 0.0;
  double aia = 0.0;
  double total = 0.0;
  IntensityProfile profile;  // batch-mean intensity, empty when AIA is off
  ParamSet gradient;         // empty unless requested
};

/// Loss of one single-task batch: token-mean NTP plus lambda times the
/// penalty of the batch-mean intensity profile. AIA is evaluated only when
/// aia_active; lambda = 0 callers should pass aia_active = false.
BatchLoss batch_loss(const Checkpoint& checkpoint, const Batch& batch, std::span<const LayerTarget> targets,
                     double lambda, PenaltyVariant variant, bool aia_active, bool with_gradient);

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::size_t t = 0;
};

/// Clips to the global norm, then applies one decoupled-weight-decay Adam
/// update. Returns the pre-clip norm.
double adam_step(ParamSet& params, ParamSet gradient, AdamState& state, const OptimizerConfig& config, bool* clipped);

/// Resolves the weight from cfg.ratio (or returns cfg.lambda) and describes how.
std::pair<double, std::string> resolve_lambda(const TrainConfig& config, const Checkpoint& initial);

struct TrainResult {
  Checkpoint checkpoint;
  RunLog log;
};

TrainResult train(const TrainConfig& config);

struct EvalOptions {
  std::uint64_t seed = 0;
  bool identical = false;  // repeat the first held-out sample (test mode)
  TaskOptions tasks;
};

struct EvalResult {
  double ntp = 0.0;
  ProfileSummary summary;
  double std_scalar = 0.0;
  std::vector<IntensityProfile> samples;
};

EvalResult evaluate(const Checkpoint& checkpoint, Task task, std::size_t sample_count, const EvalOptions& options = {});

/// Mean over layers of max(0, |I - T| - delta).
double alignment_gap(const IntensityProfile& profile, std::span<const LayerTarget> targets);

}  // namespace aialab
