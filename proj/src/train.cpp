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

#include "aialab/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>

#include "aialab/checkpoint.hpp"
#include "aialab/errors.hpp"
#include "aialab/parallel.hpp"
#include "aialab/profile_csv.hpp"
#include "json.hpp"
#include "json_convert.hpp"

namespace aialab {

using nlohmann::json;

std::string_view to_string(Regime r) { return r == Regime::kSft ? "sft" : "post"; }

Regime parse_regime(std::string_view name) {
  if (name == "sft") return Regime::kSft;
  if (name == "post") return Regime::kPost;
  throw ConfigError("unknown regime '" + std::string(name) + "' (expected sft or post)");
}

std::pair<double, double> parse_ratio(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("ratio must look like 'a:b', got '" + std::string(text) + "'");
  const auto number = [&](std::string_view part) {
    const std::string s(part);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (s.empty() || used != s.size() || !std::isfinite(v) || v <= 0.0) {
      throw ConfigError("ratio parts must be positive numbers, got '" + std::string(text) + "'");
    }
    return v;
  };
  return {number(text.substr(0, colon)), number(text.substr(colon + 1))};
}

// ---------------------------------------------------------------------------
// Config

void TrainConfig::validate() const {
  model.validate();
  check_task_vocab(model, tasks.side);
  mixer.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be a finite value >= 0");
  if (ratio && (!(ratio->first > 0.0) || !(ratio->second > 0.0))) throw ConfigError("ratio parts must be positive");
  if (ratio && calibration_batches == 0) throw ConfigError("calibration_batches must be >= 1 when a ratio is given");
  // Zero steps is only meaningful as a warm-start round trip.
  if (steps == 0 && !warm_start) throw ConfigError("steps must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (eval_samples < 2) throw ConfigError("eval_samples must be >= 2");
  if (regime == Regime::kPost && !warm_start) throw ConfigError("the post regime needs a warm-start checkpoint");
  if (!(optimizer.lr > 0.0)) throw ConfigError("optimizer.lr must be positive");
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0) || !(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0)) {
    throw ConfigError("optimizer betas must lie in [0, 1)");
  }
  if (!(optimizer.eps > 0.0)) throw ConfigError("optimizer.eps must be positive");
  if (!(optimizer.weight_decay >= 0.0)) throw ConfigError("optimizer.weight_decay must be >= 0");
  if (!(optimizer.clip_norm >= 0.0)) throw ConfigError("optimizer.clip_norm must be >= 0 (0 disables clipping)");
  for (const auto* s : {&generation_schedule, &understanding_schedule}) {
    if (*s) s->value().validate();
  }
  if (generation_schedule && generation_schedule->task != Task::kGeneration) {
    throw ConfigError("generation schedule is tagged for understanding");
  }
  if (understanding_schedule && understanding_schedule->task != Task::kUnderstanding) {
    throw ConfigError("understanding schedule is tagged for generation");
  }
  if (schedule_provenance() == Provenance::kCustom && (!generation_schedule || !understanding_schedule)) {
    throw ConfigError("custom provenance needs both schedules");
  }
}

Provenance TrainConfig::schedule_provenance() const {
  if (provenance) return *provenance;
  return regime == Regime::kPost ? Provenance::kJanusPro : Provenance::kEmu3;
}

std::vector<LayerTarget> TrainConfig::targets(Task task) const {
  const auto& custom = task == Task::kGeneration ? generation_schedule : understanding_schedule;
  const TargetSchedule schedule = custom ? *custom : builtin_schedule(schedule_provenance(), task);
  return rescale_schedule(schedule, model.depth);
}

void to_json(json& j, const OptimizerConfig& o) {
  j = {{"lr", o.lr},
       {"beta1", o.beta1},
       {"beta2", o.beta2},
       {"eps", o.eps},
       {"weight_decay", o.weight_decay},
       {"clip_norm", o.clip_norm},
       {"schedule", to_string(o.schedule)},
       {"warmup_steps", o.warmup_steps}};
}

void from_json(const json& j, OptimizerConfig& o) {
  o.lr = j.value("lr", o.lr);
  o.beta1 = j.value("beta1", o.beta1);
  o.beta2 = j.value("beta2", o.beta2);
  o.eps = j.value("eps", o.eps);
  o.weight_decay = j.value("weight_decay", o.weight_decay);
  o.clip_norm = j.value("clip_norm", o.clip_norm);
  if (j.contains("schedule")) o.schedule = parse_lr_schedule(j["schedule"].get<std::string>());
  o.warmup_steps = j.value("warmup_steps", o.warmup_steps);
}

std::string_view to_string(LrSchedule s) { return s == LrSchedule::kConstant ? "constant" : "cosine"; }

LrSchedule parse_lr_schedule(std::string_view name) {
  if (name == "constant") return LrSchedule::kConstant;
  if (name == "cosine") return LrSchedule::kCosine;
  throw ConfigError("unknown learning-rate schedule '" + std::string(name) + "' (constant or cosine)");
}

double learning_rate(const OptimizerConfig& config, std::size_t step, std::size_t total_steps) {
  if (step <= config.warmup_steps) {
    return config.lr * static_cast<double>(step) / static_cast<double>(config.warmup_steps);
  }
  if (config.schedule == LrSchedule::kConstant || total_steps <= config.warmup_steps) return config.lr;
  const double progress = static_cast<double>(step - config.warmup_steps - 1) /
                          static_cast<double>(total_steps - config.warmup_steps);
  return config.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

namespace {

std::string ratio_string(const std::pair<double, double>& r) {
  return format_double(r.first) + ":" + format_double(r.second);
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

}  // namespace

std::string train_config_to_json(const TrainConfig& c, std::optional<double> resolved_lambda,
                                 const std::string& lambda_source) {
  json aia = {{"enabled", c.aia_enabled},
              {"lambda", c.lambda},
              {"calibration_batches", c.calibration_batches},
              {"provenance", to_string(c.schedule_provenance())},
              {"variant", to_string(c.variant)}};
  if (c.ratio) aia["ratio"] = ratio_string(*c.ratio);
  if (c.generation_schedule || c.understanding_schedule) {
    json schedules = json::object();
    if (c.generation_schedule) schedules["generation"] = json::parse(schedule_to_json(*c.generation_schedule));
    if (c.understanding_schedule) schedules["understanding"] = json::parse(schedule_to_json(*c.understanding_schedule));
    aia["schedules"] = schedules;
  }
  if (resolved_lambda) aia["resolved_lambda"] = *resolved_lambda;
  if (!lambda_source.empty()) aia["lambda_source"] = lambda_source;

  json train = {{"steps", c.steps},
                {"batch_size", c.batch_size},
                {"eval_interval", c.eval_interval},
                {"eval_samples", c.eval_samples},
                {"eval_seed", c.eval_seed},
                {"regime", to_string(c.regime)}};
  if (c.warm_start) train["warm_start"] = *c.warm_start;

  json doc = {{"model", c.model},
              {"mixer", c.mixer},
              {"tasks", {{"side", c.tasks.side}, {"supervise_boundary", c.tasks.supervise_boundary}}},
              {"optimizer", c.optimizer},
              {"aia", aia},
              {"train", train}};
  return doc.dump(2) + "\n";
}

TrainConfig train_config_from_json(const std::string& text) {
  TrainConfig c;
  try {
    const json doc = json::parse(text, nullptr, true, true);
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc, {"model", "mixer", "tasks", "optimizer", "aia", "train"}, "config");
    if (doc.contains("model")) {
      reject_unknown(doc["model"], {"depth", "heads", "dim", "text_vocab", "image_vocab", "max_len", "seed", "special"},
                     "model");
      c.model = doc["model"].get<ModelConfig>();
    }
    if (doc.contains("mixer")) {
      reject_unknown(doc["mixer"], {"gen_weight", "und_weight", "seed"}, "mixer");
      c.mixer = doc["mixer"].get<MixerConfig>();
    }
    if (doc.contains("tasks")) {
      const json& t = doc["tasks"];
      reject_unknown(t, {"side", "supervise_boundary"}, "tasks");
      c.tasks.side = t.value("side", c.tasks.side);
      c.tasks.supervise_boundary = t.value("supervise_boundary", c.tasks.supervise_boundary);
    }
    if (doc.contains("optimizer")) {
      reject_unknown(doc["optimizer"],
                     {"lr", "beta1", "beta2", "eps", "weight_decay", "clip_norm", "schedule", "warmup_steps"},
                     "optimizer");
      c.optimizer = doc["optimizer"].get<OptimizerConfig>();
    }
    if (doc.contains("aia")) {
      const json& a = doc["aia"];
      reject_unknown(a,
                     {"enabled", "lambda", "ratio", "calibration_batches", "provenance", "variant", "schedules",
                      "resolved_lambda", "lambda_source"},
                     "aia");
      c.aia_enabled = a.value("enabled", c.aia_enabled);
      c.lambda = a.value("lambda", c.lambda);
      if (a.contains("ratio") && !a["ratio"].is_null()) c.ratio = parse_ratio(a["ratio"].get<std::string>());
      c.calibration_batches = a.value("calibration_batches", c.calibration_batches);
      if (a.contains("provenance")) c.provenance = parse_provenance(a["provenance"].get<std::string>());
      if (a.contains("variant")) c.variant = parse_penalty_variant(a["variant"].get<std::string>());
      if (a.contains("schedules")) {
        const json& s = a["schedules"];
        reject_unknown(s, {"generation", "understanding"}, "aia.schedules");
        if (s.contains("generation")) c.generation_schedule = schedule_from_json(s["generation"].dump());
        if (s.contains("understanding")) c.understanding_schedule = schedule_from_json(s["understanding"].dump());
      }
    }
    if (doc.contains("train")) {
      const json& t = doc["train"];
      reject_unknown(t, {"steps", "batch_size", "eval_interval", "eval_samples", "eval_seed", "regime", "warm_start"},
                     "train");
      c.steps = t.value("steps", c.steps);
      c.batch_size = t.value("batch_size", c.batch_size);
      c.eval_interval = t.value("eval_interval", c.eval_interval);
      c.eval_samples = t.value("eval_samples", c.eval_samples);
      c.eval_seed = t.value("eval_seed", c.eval_seed);
      if (t.contains("regime")) c.regime = parse_regime(t["regime"].get<std::string>());
      if (t.contains("warm_start") && !t["warm_start"].is_null()) c.warm_start = t["warm_start"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const FormatError& e) {
    throw ConfigError(std::string("config schedule: ") + e.what());
  } catch (const ScheduleError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

const EvalRecord& RunLog::final_eval(Task task) const {
  for (auto it = evals.rbegin(); it != evals.rend(); ++it) {
    if (it->task == task) return *it;
  }
  throw Error("run log has no " + std::string(to_string(task)) + " evaluation");
}

// ---------------------------------------------------------------------------
// Losses

namespace {

struct SampleGraph {
  std::unique_ptr<Tape> tape;
  std::vector<Var> weights;
  Var nll;
  std::size_t count = 0;
  std::vector<Var> intensity;
};

}  // namespace

BatchLoss batch_loss(const Checkpoint& checkpoint, const Batch& batch, std::span<const LayerTarget> targets,
                     double lambda, PenaltyVariant variant, bool aia_active, bool with_gradient) {
  const std::size_t n = batch.samples.size();
  if (n == 0) throw EmptyLossError("batch has no samples");
  const std::size_t depth = checkpoint.config.depth;
  if (aia_active && targets.size() != depth) {
    throw ShapeError("targets cover " + std::to_string(targets.size()) + " layers, model has " + std::to_string(depth));
  }
  for (const auto& seq : batch.samples) {
    if (seq.task != batch.task) throw InputError("batch mixes tasks");
  }

  std::vector<SampleGraph> graphs(n);
  parallel_for(n, [&](std::size_t i) {
    SampleGraph& g = graphs[i];
    const TokenSequence& seq = batch.samples[i];
    g.tape = std::make_unique<Tape>();
    g.weights = bind_parameters(*g.tape, checkpoint.weights, with_gradient);
    GraphForward out = forward(*g.tape, g.weights, checkpoint.config, seq, aia_active);
    const NtpTargets t = ntp_targets(seq);
    g.nll = ad::nll_sum(out.logits, t.targets, t.mask);
    g.count = t.count;
    if (aia_active) g.intensity = layer_intensity_graph(out.attention, modality_roles(seq.modality, batch.task));
  });

  double nll_total = 0.0;
  std::size_t count = 0;
  for (const auto& g : graphs) {
    nll_total += g.nll.item();
    count += g.count;
  }

  BatchLoss loss;
  loss.ntp = nll_total / static_cast<double>(count);
  std::vector<double> slopes;
  if (aia_active) {
    loss.profile.task = batch.task;
    loss.profile.samples = n;
    loss.profile.values.assign(depth, 0.0);
    for (std::size_t l = 0; l < depth; ++l) {
      double s = 0.0;
      for (const auto& g : graphs) s += g.intensity[l].item();
      loss.profile.values[l] = s / static_cast<double>(n);
    }
    loss.aia = aia_loss(loss.profile, targets, variant);
    slopes.resize(depth);
    for (std::size_t l = 0; l < depth; ++l) {
      slopes[l] = lambda * penalty_slope(loss.profile.values[l], targets[l], variant) /
                  (static_cast<double>(depth) * static_cast<double>(n));
    }
  }
  loss.total = total_loss(loss.ntp, loss.aia, lambda);
  if (!with_gradient) return loss;

  std::vector<std::vector<Tensor>> per_sample(n);
  parallel_for(n, [&](std::size_t i) {
    SampleGraph& g = graphs[i];
    std::vector<Seed> seeds{{g.nll, 1.0 / static_cast<double>(count)}};
    for (std::size_t l = 0; l < slopes.size(); ++l) {
      if (slopes[l] != 0.0) seeds.push_back({g.intensity[l], slopes[l]});
    }
    g.tape->backward(seeds);
    per_sample[i].reserve(g.weights.size());
    for (const Var& w : g.weights) per_sample[i].push_back(g.tape->gradient(w));
    g.tape.reset();
  });

  // Ascending sample order keeps the reduction independent of thread timing.
  loss.gradient.reserve(checkpoint.weights.size());
  for (std::size_t k = 0; k < checkpoint.weights.size(); ++k) {
    Tensor acc = std::move(per_sample[0][k]);
    for (std::size_t i = 1; i < n; ++i) {
      const Tensor& g = per_sample[i][k];
      for (std::size_t e = 0; e < acc.size(); ++e) acc[e] += g[e];
    }
    loss.gradient.push_back({checkpoint.weights[k].name, std::move(acc)});
  }
  return loss;
}

double adam_step(ParamSet& params, ParamSet gradient, AdamState& state, const OptimizerConfig& config, bool* clipped) {
  if (gradient.size() != params.size()) throw ShapeError("gradient does not match parameters");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.value.shape());
      state.v.emplace_back(p.value.shape());
    }
  }
  double sq = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (gradient[k].value.shape() != params[k].value.shape()) {
      throw ShapeError("gradient shape mismatch for " + params[k].name);
    }
    for (double g : gradient[k].value.values()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (clipped) *clipped = false;
  if (!std::isfinite(norm)) return norm;
  double factor = 1.0;
  if (config.clip_norm > 0.0 && norm > config.clip_norm) {
    factor = config.clip_norm / norm;
    if (clipped) *clipped = true;
  }

  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k].value;
    const Tensor& g = gradient[k].value;
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    // Decay matrices only; biases, gains and other vectors are left alone.
    const double decay = p.rank() == 2 ? config.weight_decay : 0.0;
    for (std::size_t e = 0; e < p.size(); ++e) {
      const double ge = g[e] * factor;
      m[e] = config.beta1 * m[e] + (1.0 - config.beta1) * ge;
      v[e] = config.beta2 * v[e] + (1.0 - config.beta2) * ge * ge;
      const double update = (m[e] / c1) / (std::sqrt(v[e] / c2) + config.eps);
      p[e] -= config.lr * (update + decay * p[e]);
    }
  }
  return norm;
}

std::pair<double, std::string> resolve_lambda(const TrainConfig& config, const Checkpoint& initial) {
  if (!config.ratio) return {config.lambda, "lambda"};
  if (!config.aia_enabled) return {0.0, "aia disabled"};
  const auto [a, b] = *config.ratio;
  const std::vector<LayerTarget> gen = config.targets(Task::kGeneration);
  const std::vector<LayerTarget> und = config.targets(Task::kUnderstanding);
  MixStream stream(config.mixer, config.batch_size, config.tasks);
  double ntp = 0.0, aia = 0.0;
  for (std::size_t i = 0; i < config.calibration_batches; ++i) {
    const Batch batch = stream.next();
    const auto& targets = batch.task == Task::kGeneration ? gen : und;
    const BatchLoss loss = batch_loss(initial, batch, targets, 1.0, config.variant, true, false);
    ntp += loss.ntp;
    aia += loss.aia;
  }
  const double k = static_cast<double>(config.calibration_batches);
  ntp /= k;
  aia /= k;
  const std::string ratio = ratio_string(*config.ratio);
  if (!(aia > 0.0)) {
    return {config.lambda, "ratio " + ratio + " with zero initial aia loss; fell back to lambda"};
  }
  const double lambda = ntp / ((a / b) * aia);
  return {lambda, "ratio " + ratio + " (ntp0=" + format_double(ntp) + ", aia0=" + format_double(aia) + ")"};
}

// ---------------------------------------------------------------------------
// Evaluation

EvalResult evaluate(const Checkpoint& checkpoint, Task task, std::size_t sample_count, const EvalOptions& options) {
  if (sample_count < 2) throw AggregationError("evaluation needs at least 2 samples");
  std::vector<TokenSequence> samples = eval_samples(task, options.seed, options.identical ? 1 : sample_count, options.tasks);
  if (options.identical) samples.assign(sample_count, samples.front());

  std::vector<double> nll(sample_count);
  std::vector<std::size_t> counts(sample_count);
  std::vector<IntensityProfile> profiles(sample_count);
  parallel_for(sample_count, [&](std::size_t i) {
    const TokenSequence& seq = samples[i];
    ForwardOutput out = forward(checkpoint, seq, true);
    const NtpTargets t = ntp_targets(seq);
    counts[i] = t.count;
    nll[i] = ntp_loss(out.logits, seq) * static_cast<double>(t.count);
    profiles[i] = layer_intensity(*out.attention, modality_roles(seq.modality, task));
  });

  EvalResult result;
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < sample_count; ++i) {
    total += nll[i];
    count += counts[i];
  }
  result.ntp = total / static_cast<double>(count);
  result.summary = aggregate_profiles(profiles);
  result.std_scalar = profile_std_scalar(profiles);
  result.samples = std::move(profiles);
  return result;
}

double alignment_gap(const IntensityProfile& profile, std::span<const LayerTarget> targets) {
  if (profile.depth() != targets.size()) {
    throw ShapeError("profile has " + std::to_string(profile.depth()) + " layers, targets have " +
                     std::to_string(targets.size()));
  }
  if (targets.empty()) throw ShapeError("alignment_gap of an empty profile");
  std::vector<double> excess(targets.size());
  for (std::size_t l = 0; l < targets.size(); ++l) {
    excess[l] = std::max(0.0, std::abs(profile.values[l] - targets[l].target) - targets[l].delta);
  }
  return deterministic_sum(excess) / static_cast<double>(targets.size());
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

namespace fs = std::filesystem;

class RunDir {
 public:
  explicit RunDir(const std::optional<std::string>& path) {
    if (!path) return;
    root_ = *path;
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_)) throw InputError("cannot create run directory " + root_.string());
  }

  bool active() const { return !root_.empty(); }
  fs::path path(const std::string& name) const { return root_ / name; }

  void write(const std::string& name, const std::string& text) const {
    if (!active()) return;
    std::ofstream out(path(name), std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw InputError("cannot write " + path(name).string());
  }

  void append(const std::string& name, const std::string& line) const {
    if (!active()) return;
    std::ofstream out(path(name), std::ios::binary | std::ios::app);
    out << line << '\n';
    if (!out) throw InputError("cannot write " + path(name).string());
  }

 private:
  fs::path root_;
};

std::string step_line(const StepRecord& r) {
  json j = {{"step", r.step},   {"task", to_string(r.task)},   {"ntp", r.ntp},         {"aia", r.aia},
            {"total", r.total}, {"grad_norm", r.grad_norm}, {"clipped", r.clipped}};
  return j.dump();
}

std::string eval_line(const EvalRecord& r) {
  json j = {{"step", r.step},
            {"task", to_string(r.task)},
            {"ntp", r.ntp},
            {"mean", r.mean.values},
            {"std", r.std},
            {"std_scalar", r.std_scalar},
            {"alignment_gap", r.alignment_gap}};
  return j.dump();
}

void check_finite(const ParamSet& params, std::size_t step) {
  for (const auto& p : params) {
    if (!p.value.all_finite()) throw DivergenceError(step, "non-finite weights in " + p.name);
  }
}

}  // namespace

TrainResult train(const TrainConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();

  Checkpoint checkpoint;
  if (config.warm_start) {
    checkpoint = load_checkpoint(*config.warm_start);
    if (!(checkpoint.config == config.model)) {
      throw CheckpointError("warm-start checkpoint " + *config.warm_start + " does not match the model config");
    }
  } else {
    checkpoint = build_model(config.model);
  }

  TrainResult result;
  RunLog& log = result.log;
  std::tie(log.lambda, log.lambda_source) = resolve_lambda(config, checkpoint);
  const bool aia_active = config.aia_enabled && log.lambda > 0.0;
  const std::vector<LayerTarget> gen_targets = config.targets(Task::kGeneration);
  const std::vector<LayerTarget> und_targets = config.targets(Task::kUnderstanding);
  const auto targets_for = [&](Task t) -> const std::vector<LayerTarget>& {
    return t == Task::kGeneration ? gen_targets : und_targets;
  };

  const RunDir dir(config.out_dir);
  dir.write("config.json", train_config_to_json(config, log.lambda, log.lambda_source));
  dir.write("runlog.jsonl", "");
  dir.write("evals.jsonl", "");

  const EvalOptions eval_options{config.eval_seed, false, config.tasks};
  const auto run_eval = [&](std::size_t step) {
    for (Task task : {Task::kGeneration, Task::kUnderstanding}) {
      const EvalResult ev = evaluate(checkpoint, task, config.eval_samples, eval_options);
      EvalRecord rec;
      rec.step = step;
      rec.task = task;
      rec.ntp = ev.ntp;
      rec.mean = ev.summary.mean;
      rec.std = ev.summary.std;
      rec.std_scalar = ev.std_scalar;
      rec.alignment_gap = alignment_gap(ev.summary.mean, targets_for(task));
      dir.append("evals.jsonl", eval_line(rec));
      dir.write("profile_step" + std::to_string(step) + "_" + std::string(to_string(task)) + ".csv",
                format_profile_csv(ev.summary, ev.std_scalar,
                                   {"step=" + std::to_string(step), "alignment_gap=" + format_double(rec.alignment_gap)}));
      log.evals.push_back(std::move(rec));
    }
    if (dir.active()) save_checkpoint(dir.path("step_" + std::to_string(checkpoint.step) + ".aiac").string(), checkpoint);
  };

  MixStream stream(config.mixer, config.batch_size, config.tasks);
  AdamState adam;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    const Batch batch = stream.next();
    BatchLoss loss =
        batch_loss(checkpoint, batch, targets_for(batch.task), log.lambda, config.variant, aia_active, true);
    if (!std::isfinite(loss.total)) throw DivergenceError(step, "non-finite loss");
    StepRecord rec;
    rec.step = step;
    rec.task = batch.task;
    rec.ntp = loss.ntp;
    rec.aia = loss.aia;
    rec.total = loss.total;
    OptimizerConfig opt = config.optimizer;
    opt.lr = learning_rate(config.optimizer, step, config.steps);
    rec.grad_norm = adam_step(checkpoint.weights, std::move(loss.gradient), adam, opt, &rec.clipped);
    if (!std::isfinite(rec.grad_norm)) throw DivergenceError(step, "non-finite gradient");
    check_finite(checkpoint.weights, step);
    ++checkpoint.step;
    if (rec.clipped) ++log.clip_events;
    dir.append("runlog.jsonl", step_line(rec));
    log.steps.push_back(rec);
    if (config.eval_interval > 0 && step % config.eval_interval == 0 && step != config.steps) run_eval(step);
  }
  run_eval(config.steps);

  log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.checkpoint = std::move(checkpoint);
  return result;
}

}  // namespace aialab
