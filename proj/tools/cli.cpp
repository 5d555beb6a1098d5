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

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "aialab/aia.hpp"
#include "aialab/attention_dump.hpp"
#include "aialab/checkpoint.hpp"
#include "aialab/errors.hpp"
#include "aialab/gradcheck.hpp"
#include "aialab/intensity.hpp"
#include "aialab/profile_csv.hpp"
#include "aialab/svg_plot.hpp"
#include "aialab/tasks.hpp"
#include "aialab/train.hpp"

namespace aialab::cli {

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// "-" writes to the command's standard output.
void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw InputError("cannot write " + path);
  file << text;
  file.close();
  if (!file) throw InputError("cannot write " + path);
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

Task task_option(const std::string& name) {
  try {
    return parse_task(name);
  } catch (const Error&) {
    throw InputError("unknown task '" + name + "' (expected generation or understanding)");
  }
}

// gen-data -------------------------------------------------------------------

struct GenDataArgs {
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::string task = "mixed";
  std::string out;
  bool supervise_boundary = false;
};

int gen_data(const GenDataArgs& a, std::ostream& out) {
  TaskOptions options;
  options.supervise_boundary = a.supervise_boundary;
  std::string text;
  if (a.task == "mixed") {
    MixerConfig mixer;
    mixer.seed = a.seed;
    MixStream stream(mixer, 1, options);
    for (std::size_t i = 0; i < a.count; ++i) text += to_jsonl_record(stream.next().samples.front()) + "\n";
  } else {
    const Task task = task_option(a.task);
    for (std::size_t i = 0; i < a.count; ++i) {
      Rng rng(sample_seed(a.seed, i, Split::kTrain));
      text += to_jsonl_record(make_sample(task, rng, options)) + "\n";
    }
  }
  write_text(a.out, text, out);
  return kOk;
}

// train ----------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string out_dir;
  std::optional<double> lambda;
  std::optional<std::string> ratio;
  std::optional<std::string> regime;
  std::optional<std::string> warm_start;
  std::optional<std::string> provenance;
  std::optional<std::size_t> steps;
  std::optional<std::uint64_t> seed;
};

int train_cmd(const TrainArgs& a, std::ostream& out) {
  TrainConfig cfg = train_config_from_json(read_text(a.config));
  if (a.lambda) {
    cfg.lambda = *a.lambda;
    cfg.ratio.reset();
  }
  if (a.ratio) cfg.ratio = parse_ratio(*a.ratio);
  if (a.regime) cfg.regime = parse_regime(*a.regime);
  if (a.warm_start) cfg.warm_start = *a.warm_start;
  if (a.provenance) {
    try {
      cfg.provenance = parse_provenance(*a.provenance);
    } catch (const ScheduleError& e) {
      throw ConfigError(e.what());
    }
  }
  if (a.steps) cfg.steps = *a.steps;
  if (a.seed) cfg.model.seed = cfg.mixer.seed = *a.seed;
  cfg.out_dir = a.out_dir;

  const TrainResult result = train(cfg);
  out << "lambda " << format_double(result.log.lambda) << " (" << result.log.lambda_source << ")\n";
  out << "steps " << result.log.steps.size() << ", clipped " << result.log.clip_events << "\n";
  for (Task task : {Task::kGeneration, Task::kUnderstanding}) {
    const EvalRecord& e = result.log.final_eval(task);
    out << to_string(task) << ": eval_ntp " << fmt("%.6f", e.ntp) << ", alignment_gap " << fmt("%.6f", e.alignment_gap)
        << "\n";
  }
  out << "checkpoint " << a.out_dir << "/step_" << result.checkpoint.step << ".aiac\n";
  return kOk;
}

// profile / dump / ingest ----------------------------------------------------

struct ProfileArgs {
  std::string checkpoint;
  std::string task;
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  bool identical = false;
  std::string out = "-";
  std::optional<std::string> provenance;
  bool f32 = false;
};

int profile_cmd(const ProfileArgs& a, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  check_task_vocab(ck.config);
  const Task task = task_option(a.task);
  const EvalResult r = evaluate(ck, task, a.samples, {a.seed, a.identical, {}});
  std::vector<std::string> comments{"step=" + std::to_string(ck.step), "eval_ntp=" + format_double(r.ntp)};
  if (a.provenance) {
    const auto targets = rescale_schedule(builtin_schedule(parse_provenance(*a.provenance), task), ck.config.depth);
    comments.push_back("alignment_gap=" + format_double(alignment_gap(r.summary.mean, targets)));
  }
  write_text(a.out, format_profile_csv(r.summary, r.std_scalar, comments), out);
  return kOk;
}

int dump_cmd(const ProfileArgs& a, std::ostream& out) {
  if (a.out == "-") throw InputError("dump needs a file for --out");
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  check_task_vocab(ck.config);
  const Task task = task_option(a.task);
  if (a.samples == 0) throw InputError("--samples must be at least 1");
  std::vector<TokenSequence> samples = eval_samples(task, a.seed, a.identical ? 1 : a.samples);
  if (a.identical) samples.assign(a.samples, samples.front());
  std::vector<AttentionRecord> records;
  records.reserve(samples.size());
  for (const auto& seq : samples) records.push_back(*forward(ck, seq, true).attention);
  write_attention_dump(a.out, records, a.f32 ? DumpPrecision::kF32 : DumpPrecision::kF64);
  out << "wrote " << records.size() << " samples to " << a.out << "\n";
  return kOk;
}

struct IngestArgs {
  std::string dump;
  std::string out = "-";
};

int ingest_cmd(const IngestArgs& a, std::ostream& out) {
  const std::vector<AttentionRecord> records = read_attention_dump(a.dump);
  if (records.empty()) throw InputError("attention dump holds no samples");
  std::vector<IntensityProfile> profiles;
  profiles.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      const Task task = infer_task(records[i].modality);
      profiles.push_back(layer_intensity(records[i], modality_roles(records[i].modality, task)));
    } catch (const Error& e) {
      throw InputError("sample " + std::to_string(i) + ": " + e.what());
    }
  }
  const ProfileSummary summary = aggregate_profiles(profiles);
  std::optional<double> scalar;
  if (profiles.size() >= 2) scalar = profile_std_scalar(profiles);
  write_text(a.out, format_profile_csv(summary, scalar), out);
  return kOk;
}

// targets --------------------------------------------------------------------

struct TargetsArgs {
  std::optional<std::string> provenance;
  std::optional<std::string> schedule;
  std::optional<std::string> task;
  std::optional<std::size_t> depth;
  std::string out = "-";
  std::string layers_out = "-";
};

int targets_cmd(const TargetsArgs& a, std::ostream& out) {
  TargetSchedule schedule;
  if (a.schedule) {
    schedule = schedule_from_json(read_text(*a.schedule));
    if (a.task && task_option(*a.task) != schedule.task) throw InputError("--task disagrees with the schedule document");
  } else {
    if (!a.task) throw InputError("--task is required with --provenance");
    const Provenance p = parse_provenance(*a.provenance);
    if (p == Provenance::kCustom) throw ScheduleError("custom schedules are loaded with --schedule");
    schedule = builtin_schedule(p, task_option(*a.task));
  }
  write_text(a.out, schedule_to_json(schedule), out);
  if (a.depth) {
    std::string csv = "layer,reference_layer,T,delta\n";
    const auto layers = rescale_schedule(schedule, *a.depth);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      csv += std::to_string(l) + "," + std::to_string(layers[l].reference_layer) + "," + format_double(layers[l].target) +
             "," + format_double(layers[l].delta) + "\n";
    }
    write_text(a.layers_out, csv, out);
  }
  return kOk;
}

// plot -----------------------------------------------------------------------

struct PlotArgs {
  std::vector<std::string> csv;
  std::optional<std::string> targets;
  std::string out;
  std::optional<std::string> title;
};

int plot_cmd(const PlotArgs& a, std::ostream& out) {
  std::vector<PlotSeries> series;
  for (const auto& path : a.csv) {
    const ProfileTable table = parse_profile_csv(read_text(path));
    if (table.depth() == 0) throw FormatError(path + ": no profile rows");
    std::string label = path;
    if (const auto slash = label.find_last_of('/'); slash != std::string::npos) label = label.substr(slash + 1);
    series.push_back({label, table.task, table.mean});
  }
  std::vector<LayerTarget> bands;
  if (a.targets) {
    TargetSchedule schedule;
    try {
      schedule = builtin_schedule(parse_provenance(*a.targets), series.front().task);
    } catch (const ScheduleError&) {
      schedule = schedule_from_json(read_text(*a.targets));
    }
    bands = rescale_schedule(schedule, series.front().values.size());
  }
  PlotOptions options;
  if (a.title) options.title = *a.title;
  write_text(a.out, render_intensity_svg(series, bands, options), out);
  return kOk;
}

// gradcheck ------------------------------------------------------------------

struct GradcheckArgs {
  std::uint64_t seed = 0;
  std::size_t depth = 2;
  std::size_t heads = 2;
  std::size_t dim = 16;
  double lambda = 40.0;
  double tolerance = 1e-4;
  bool corrupt = false;
};

int gradcheck_cmd(const GradcheckArgs& a, std::ostream& out) {
  ModelConfig config;
  config.depth = a.depth;
  config.heads = a.heads;
  config.dim = a.dim;
  config.seed = a.seed;
  config.validate();
  const Checkpoint ck = build_model(config);

  Rng rng(splitmix64(a.seed));
  const TokenSequence gen = gen_sample(rng);
  const TokenSequence und = und_sample(rng);
  const auto gen_targets = rescale_schedule(builtin_schedule(Provenance::kEmu3, Task::kGeneration), config.depth);
  const auto und_targets = rescale_schedule(builtin_schedule(Provenance::kEmu3, Task::kUnderstanding), config.depth);

  // Each variant sums the loss over one generation and one understanding sample.
  const auto make = [&](double ntp_weight, double aia_weight) -> GraphLossFn {
    return [&, ntp_weight, aia_weight](Tape& tape, std::span<const Var> w) {
      std::vector<Var> terms;
      for (const TokenSequence* seq : {&gen, &und}) {
        const bool record = aia_weight != 0.0;
        GraphForward f = forward(tape, w, config, *seq, record);
        if (ntp_weight != 0.0) terms.push_back(ad::scale(ntp_loss(f.logits, *seq), ntp_weight));
        if (record) {
          const auto intensity = layer_intensity_graph(f.attention, modality_roles(*seq));
          const auto& targets = seq->task == Task::kGeneration ? gen_targets : und_targets;
          terms.push_back(ad::scale(aia_loss(intensity, targets), aia_weight));
        }
      }
      return ad::add_n(terms);
    };
  };

  struct Variant {
    const char* name;
    GraphLossFn fn;
  };
  const std::vector<Variant> variants{
      {"ntp", make(1.0, 0.0)}, {"aia", make(0.0, 1.0)}, {"combined", make(1.0, a.lambda)}};

  bool ok = true;
  out << "gradcheck depth=" << a.depth << " heads=" << a.heads << " dim=" << a.dim << " seed=" << a.seed
      << " lambda=" << format_double(a.lambda) << " tolerance=" << format_double(a.tolerance) << "\n";
  for (const auto& v : variants) {
    LossAndGradient lg = evaluate_gradient(v.fn, ck.weights);
    if (a.corrupt) {
      // Fault injection for testing the failure path.
      for (auto& g : lg.gradient) {
        for (double& x : g.value.values()) x *= 1.01;
      }
    }
    const LossFn loss = [&](const ParamSet& p) { return evaluate_loss(v.fn, p); };
    const auto reports = grad_check(loss, ck.weights, lg.gradient);
    const double worst = max_relative_error(reports);
    const bool pass = worst < a.tolerance;
    ok = ok && pass;
    out << v.name << ": loss " << fmt("%.10f", lg.loss) << ", max relative error " << fmt("%.3e", worst) << " over "
        << reports.size() << " entries " << (pass ? "PASS" : "FAIL") << "\n";
  }
  out << (ok ? "all gradients agree" : "gradient check failed") << "\n";
  return ok ? kOk : kVerificationFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention-interaction alignment lab: toy unified multimodal training and intensity tooling", "aia_lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "aia_lab 0.1.0");

  int status = kOk;

  GenDataArgs gd;
  auto* gen_cmd = app.add_subcommand("gen-data", "Export seeded task samples as JSON lines");
  gen_cmd->add_option("--seed", gd.seed, "Base seed");
  gen_cmd->add_option("--count", gd.count, "Number of records")->required();
  gen_cmd->add_option("--task", gd.task, "generation, understanding or mixed")
      ->check(CLI::IsMember({"generation", "understanding", "mixed", "gen", "und"}));
  gen_cmd->add_option("--out", gd.out, "Output path, - for stdout")->required();
  gen_cmd->add_flag("--supervise-boundary", gd.supervise_boundary, "Also supervise IMG_START / ANS");
  gen_cmd->callback([&] { status = gen_data(gd, out); });

  TrainArgs ta;
  auto* train_sub = app.add_subcommand("train", "Train a model and write a run directory");
  train_sub->add_option("--config", ta.config, "Training config document (JSON, comments allowed)")->required();
  train_sub->add_option("--out-dir", ta.out_dir, "Run directory")->required();
  auto* lambda_opt = train_sub->add_option("--lambda", ta.lambda, "AIA loss weight");
  auto* ratio_opt = train_sub->add_option("--ratio", ta.ratio, "NTP:AIA ratio such as 50:1");
  lambda_opt->excludes(ratio_opt);
  train_sub->add_option("--regime", ta.regime, "sft or post")->check(CLI::IsMember({"sft", "post"}));
  train_sub->add_option("--warm-start", ta.warm_start, "Checkpoint to start from");
  train_sub->add_option("--provenance", ta.provenance, "Target tables: emu3 or janus_pro");
  train_sub->add_option("--steps", ta.steps, "Override the number of steps");
  train_sub->add_option("--seed", ta.seed, "Override model and mixer seeds");
  train_sub->callback([&] { status = train_cmd(ta, out); });

  ProfileArgs pa;
  auto* profile_sub = app.add_subcommand("profile", "Per-layer intensity profile of a checkpoint as CSV");
  profile_sub->add_option("--checkpoint", pa.checkpoint, "AIAC checkpoint")->required();
  profile_sub->add_option("--task", pa.task, "generation or understanding")->required();
  profile_sub->add_option("--samples", pa.samples, "Held-out samples");
  profile_sub->add_option("--seed", pa.seed, "Held-out sample seed");
  profile_sub->add_flag("--identical", pa.identical, "Repeat the first sample (test mode)");
  profile_sub->add_option("--provenance", pa.provenance, "Report the alignment gap against these tables");
  profile_sub->add_option("--out", pa.out, "CSV path, - for stdout");
  profile_sub->callback([&] { status = profile_cmd(pa, out); });

  ProfileArgs da;
  auto* dump_sub = app.add_subcommand("dump", "Write raw attention of held-out samples as an ATTD file");
  dump_sub->add_option("--checkpoint", da.checkpoint, "AIAC checkpoint")->required();
  dump_sub->add_option("--task", da.task, "generation or understanding")->required();
  dump_sub->add_option("--samples", da.samples, "Held-out samples");
  dump_sub->add_option("--seed", da.seed, "Held-out sample seed");
  dump_sub->add_flag("--identical", da.identical, "Repeat the first sample (test mode)");
  dump_sub->add_flag("--f32", da.f32, "Store single-precision probabilities");
  dump_sub->add_option("--out", da.out, "Dump path")->required();
  dump_sub->callback([&] { status = dump_cmd(da, out); });

  IngestArgs ia;
  auto* ingest_sub = app.add_subcommand("ingest", "Profile CSV from an external attention dump");
  ingest_sub->add_option("--dump", ia.dump, "ATTD file")->required();
  ingest_sub->add_option("--out", ia.out, "CSV path, - for stdout");
  ingest_sub->callback([&] { status = ingest_cmd(ia, out); });

  TargetsArgs tg;
  auto* targets_sub = app.add_subcommand("targets", "Print a target schedule and its per-layer rescaling");
  auto* prov_opt = targets_sub->add_option("--provenance", tg.provenance, "emu3 or janus_pro");
  auto* sched_opt = targets_sub->add_option("--schedule", tg.schedule, "Schedule document to load instead");
  prov_opt->excludes(sched_opt);
  targets_sub->add_option("--task", tg.task, "generation or understanding");
  targets_sub->add_option("--depth", tg.depth, "Model depth to rescale to")->check(CLI::PositiveNumber);
  targets_sub->add_option("--out", tg.out, "Schedule document path, - for stdout");
  targets_sub->add_option("--layers-out", tg.layers_out, "Per-layer CSV path, - for stdout");
  targets_sub->callback([&] {
    if (!tg.provenance && !tg.schedule) throw CLI::RequiredError("--provenance or --schedule");
    status = targets_cmd(tg, out);
  });

  PlotArgs pl;
  auto* plot_sub = app.add_subcommand("plot", "Render profile CSVs as an SVG line plot");
  plot_sub->add_option("--csv", pl.csv, "Profile CSV (repeatable)")->required();
  plot_sub->add_option("--targets", pl.targets, "Provenance name or schedule document for target bands");
  plot_sub->add_option("--title", pl.title, "Plot title");
  plot_sub->add_option("--out", pl.out, "SVG path, - for stdout")->required();
  plot_sub->callback([&] { status = plot_cmd(pl, out); });

  GradcheckArgs gc;
  auto* grad_sub = app.add_subcommand("gradcheck", "Finite-difference check of NTP, AIA and combined gradients");
  grad_sub->add_option("--seed", gc.seed, "Model and sample seed");
  grad_sub->add_option("--depth", gc.depth, "Layers");
  grad_sub->add_option("--heads", gc.heads, "Attention heads");
  grad_sub->add_option("--dim", gc.dim, "Model width");
  grad_sub->add_option("--lambda", gc.lambda, "AIA weight of the combined loss");
  grad_sub->add_flag("--corrupt-gradient", gc.corrupt)->group("");
  grad_sub->callback([&] { status = gradcheck_cmd(gc, out); });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return status;
}

}  // namespace aialab::cli
