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


// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Tolerances and run sizes are pinned
// below; training runs are shared between criteria that need them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aialab/aia.hpp"
#include "aialab/checkpoint.hpp"
#include "aialab/intensity.hpp"
#include "aialab/profile_csv.hpp"
#include "aialab/rng.hpp"
#include "aialab/train.hpp"
#include "cli.hpp"
#include "json.hpp"
#include "support/files.hpp"
#include "support/oracles.hpp"
#include "support/random_attention.hpp"

using namespace aialab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr double kOracleTol = 1e-12;
constexpr double kOracleSeconds = 10.0;
constexpr double kHuberExampleTol = 1e-15;  // decimal examples are not exact binary fractions
constexpr double kKnotTol = 1e-12;
constexpr double kKnotSlopeTol = 1e-6;
constexpr double kGradcheckSeconds = 60.0;
constexpr double kGapReduction = 0.5;
constexpr double kNtpRatio = 1.10;
constexpr double kMechanismSeconds = 15.0 * 60.0;
constexpr double kStdTol = 1e-15;
constexpr double kRoundTripTol = 1e-12;

// Pinned run sizes.
constexpr std::size_t kMechanismSteps = 2000;
constexpr std::size_t kPostSteps = 500;
constexpr std::size_t kMixSteps = 1000;
constexpr std::size_t kBatchSize = 16;
constexpr double kLearningRate = 1e-3;
constexpr std::uint64_t kMechanismSeed = 1;
const std::vector<std::uint64_t> kMixSeeds{1, 2, 3};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class Suite {
 public:
  explicit Suite(fs::path work) : work_(std::move(work)) { fs::create_directories(work_); }

  Outcome intensity_oracle();
  Outcome schedule_fidelity();
  Outcome huber();
  Outcome gradcheck();
  Outcome mechanism();
  Outcome lambda_sensitivity();
  Outcome sampling_ratio();
  Outcome determinism();
  Outcome std_metric();
  Outcome round_trips();

  std::vector<std::string> info;

 private:
  TrainConfig base_config(const std::string& name, std::uint64_t seed) const;
  const TrainResult& trained(const std::string& name, const std::function<TrainConfig()>& make);
  const TrainResult& mechanism_run(bool aia);
  double combined_ntp(const TrainResult& r) const;

  fs::path work_;
  std::map<std::string, TrainResult> runs_;
  std::map<std::string, double> run_seconds_;
};

// 1 -------------------------------------------------------------------------

Outcome Suite::intensity_oracle() {
  const auto t0 = Clock::now();
  Rng rng(20260);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t L = 1 + uniform_index(rng, 4), H = 1 + uniform_index(rng, 4), n = 2 + uniform_index(rng, 31);
    const Task task = trial % 2 ? Task::kGeneration : Task::kUnderstanding;
    auto ra = testing_support::random_attention(rng, L, H, n);
    ra.record.modality = testing_support::random_modalities(rng, n, task);
    const ModalityRoles roles = modality_roles(ra.record.modality, task);
    const auto expected = oracle::intensity(ra.flat, L, H, n, roles.query_mask, roles.key_mask);
    const IntensityProfile got = layer_intensity(ra.record, roles);
    for (std::size_t l = 0; l < L; ++l) worst = std::max(worst, std::fabs(got.values[l] - expected[l]));
  }
  const double secs = seconds_since(t0);
  return {worst < kOracleTol && secs < kOracleSeconds,
          "max |diff| " + fmt("%.2e", worst) + " over 1000 tensors in " + fmt("%.2f", secs) + " s"};
}

// 2 -------------------------------------------------------------------------

struct Row {
  std::size_t lo;
  std::optional<std::size_t> hi;
  double target;
  double delta;
};

// The published stage tables, transcribed as (layer range, T, delta).
const std::map<std::string, std::vector<Row>> kTables{
    {"emu3/generation",
     {{0, 10, 0.4, 0.2}, {10, 20, 0.4, 0.1}, {20, 25, 0.4, 0.1}, {25, 31, 0.2, 0.05}, {31, std::nullopt, 0.2, 0.05}}},
    {"emu3/understanding",
     {{0, 10, 0.1, 0.05}, {10, 20, 0.15, 0.05}, {20, 25, 0.3, 0.05}, {25, 31, 0.3, 0.05}, {31, std::nullopt, 0.2, 0.05}}},
    {"janus_pro/generation",
     {{0, 10, 0.4, 0.2}, {10, 20, 0.4, 0.1}, {20, 25, 0.4, 0.1}, {25, 30, 0.2, 0.05}, {30, std::nullopt, 0.2, 0.05}}},
    {"janus_pro/understanding",
     {{0, 10, 0.1, 0.05}, {10, 20, 0.15, 0.05}, {20, 25, 0.3, 0.05}, {25, 30, 0.3, 0.05}, {30, std::nullopt, 0.2, 0.05}}},
};

Outcome Suite::schedule_fidelity() {
  std::size_t matched = 0, total = 0;
  std::string first_error;
  for (const auto& [key, rows] : kTables) {
    const auto slash = key.find('/');
    const CliRun r = cli_run({"targets", "--provenance", key.substr(0, slash), "--task", key.substr(slash + 1)});
    if (r.code != 0) return {false, key + ": targets exited " + std::to_string(r.code)};
    const auto doc = nlohmann::json::parse(r.out);
    const auto& stages = doc.at("stages");
    if (stages.size() != rows.size()) return {false, key + ": stage count " + std::to_string(stages.size())};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ++total;
      const auto& s = stages[i];
      const bool hi_ok = rows[i].hi ? (!s.at("hi").is_null() && s.at("hi").get<std::size_t>() == *rows[i].hi)
                                    : s.at("hi").is_null();
      if (s.at("lo").get<std::size_t>() == rows[i].lo && hi_ok && s.at("T").get<double>() == rows[i].target &&
          s.at("delta").get<double>() == rows[i].delta) {
        ++matched;
      } else if (first_error.empty()) {
        first_error = ", first mismatch " + key + " stage " + std::to_string(i);
      }
    }
  }
  return {matched == 20 && total == 20,
          std::to_string(matched) + "/" + std::to_string(total) + " stage entries equal" + first_error};
}

// 3 -------------------------------------------------------------------------

Outcome Suite::huber() {
  const double a = huber_penalty(0.5, 0.4, 0.2);
  const double b = huber_penalty(0.8, 0.4, 0.2);
  const double c = huber_penalty(0.4, 0.4, 0.2);
  const bool examples = std::fabs(a - 0.005) <= kHuberExampleTol && std::fabs(b - 0.06) <= kHuberExampleTol &&
                        c == 0.0 && std::fabs(a - oracle::huber(0.5, 0.4, 0.2)) <= kHuberExampleTol &&
                        std::fabs(b - oracle::huber(0.8, 0.4, 0.2)) <= kHuberExampleTol;

  Rng rng(31);
  double worst_value = 0.0, worst_slope = 0.0;
  const double h = 1e-7;
  for (int i = 0; i < 1000; ++i) {
    const double t = uniform_unit(rng);
    const double d = 0.01 + 0.49 * uniform_unit(rng);
    for (double side : {-1.0, 1.0}) {
      const double knot = t + side * d;
      const double r = std::fabs(knot - t);
      const double quadratic = 0.5 * r * r;
      const double linear = d * r - 0.5 * d * d;
      worst_value = std::max(worst_value, std::fabs(quadratic - linear));
      worst_value = std::max(worst_value, std::fabs(huber_penalty(knot, t, d) - linear));
      const double inner = (huber_penalty(knot, t, d) - huber_penalty(knot - side * h, t, d)) / h;
      const double outer = (huber_penalty(knot + side * h, t, d) - huber_penalty(knot, t, d)) / h;
      worst_slope = std::max(worst_slope, std::fabs(inner - outer));
    }
  }
  const bool pass = examples && worst_value < kKnotTol && worst_slope < kKnotSlopeTol;
  return {pass, "examples " + fmt("%.17g", a) + ", " + fmt("%.17g", b) + ", " + fmt("%g", c) + "; knot value gap " +
                    fmt("%.2e", worst_value) + ", knot slope gap " + fmt("%.2e", worst_slope)};
}

// 4 -------------------------------------------------------------------------

Outcome Suite::gradcheck() {
  const auto t0 = Clock::now();
  const CliRun r = cli_run({"gradcheck", "--depth", "2", "--heads", "2", "--dim", "16", "--lambda", "40"});
  const double secs = seconds_since(t0);
  std::string worst;
  std::istringstream lines(r.out);
  for (std::string line; std::getline(lines, line);) {
    const auto pos = line.find("max relative error ");
    if (pos != std::string::npos) {
      worst += (worst.empty() ? "" : ", ") + line.substr(0, line.find(':')) + " " +
               line.substr(pos + 19, line.find(' ', pos + 19) - pos - 19);
    }
  }
  const bool variants = r.out.find("ntp:") != std::string::npos && r.out.find("aia:") != std::string::npos &&
                        r.out.find("combined:") != std::string::npos;
  return {r.code == 0 && variants && secs < kGradcheckSeconds,
          "exit " + std::to_string(r.code) + ", " + worst + ", " + fmt("%.1f", secs) + " s"};
}

// Training runs ----------------------------------------------------------------

TrainConfig Suite::base_config(const std::string& name, std::uint64_t seed) const {
  TrainConfig c;
  c.model.depth = 4;
  c.model.heads = 4;
  c.model.dim = 64;
  c.model.seed = seed;
  c.mixer.seed = seed;
  c.batch_size = kBatchSize;
  c.optimizer.lr = kLearningRate;
  c.eval_samples = 100;
  c.out_dir = (work_ / name).string();
  fs::remove_all(work_ / name);
  return c;
}

const TrainResult& Suite::trained(const std::string& name, const std::function<TrainConfig()>& make) {
  auto it = runs_.find(name);
  if (it != runs_.end()) return it->second;
  std::cerr << "  training " << name << " ..." << std::endl;
  const auto t0 = Clock::now();
  TrainResult r = train(make());
  run_seconds_[name] = seconds_since(t0);
  const std::string line = name + ": lambda " + fmt("%.6g", r.log.lambda) + ", gen ntp " +
                           fmt("%.5f", r.log.final_eval(Task::kGeneration).ntp) + ", und ntp " +
                           fmt("%.5f", r.log.final_eval(Task::kUnderstanding).ntp) + ", " +
                           fmt("%.1f", run_seconds_[name]) + " s";
  std::cerr << "    " << line << std::endl;
  info.push_back(line);
  return runs_.emplace(name, std::move(r)).first->second;
}

const TrainResult& Suite::mechanism_run(bool aia) {
  if (aia) {
    return trained("sft_ratio50", [&] {
      TrainConfig c = base_config("sft_ratio50", kMechanismSeed);
      c.steps = kMechanismSteps;
      c.ratio = std::pair<double, double>{50.0, 1.0};
      return c;
    });
  }
  return trained("sft_lambda0", [&] {
    TrainConfig c = base_config("sft_lambda0", kMechanismSeed);
    c.steps = kMechanismSteps;
    c.lambda = 0.0;
    return c;
  });
}

double Suite::combined_ntp(const TrainResult& r) const {
  return 0.5 * (r.log.final_eval(Task::kGeneration).ntp + r.log.final_eval(Task::kUnderstanding).ntp);
}

// 5 -------------------------------------------------------------------------

Outcome Suite::mechanism() {
  const TrainResult& base = mechanism_run(false);
  const TrainResult& aia = mechanism_run(true);
  const double secs = run_seconds_["sft_lambda0"] + run_seconds_["sft_ratio50"];
  bool pass = secs < kMechanismSeconds;
  std::string detail;
  for (Task task : {Task::kGeneration, Task::kUnderstanding}) {
    const EvalRecord& b = base.log.final_eval(task);
    const EvalRecord& a = aia.log.final_eval(task);
    // A zero baseline gap leaves nothing to reduce; the AIA run must then also be zero.
    const double reduction = b.alignment_gap > 0.0 ? 1.0 - a.alignment_gap / b.alignment_gap : 0.0;
    const bool gap_ok = b.alignment_gap > 0.0 ? reduction >= kGapReduction : a.alignment_gap == 0.0;
    const double ratio = a.ntp / b.ntp;
    const bool ntp_ok = ratio <= kNtpRatio;
    pass = pass && gap_ok && ntp_ok;
    detail += std::string(to_string(task)) + ": gap " + fmt("%.4f", b.alignment_gap) + " -> " +
              fmt("%.4f", a.alignment_gap) + " (" + fmt("%.0f", 100.0 * reduction) + "% reduced" +
              (gap_ok ? "" : ", too small") + "), ntp " + fmt("%.4f", a.ntp) + "/" + fmt("%.4f", b.ntp) + " = " +
              fmt("%.3f", ratio) + "x" + (ntp_ok ? "" : " (over limit)") + "; ";

    std::string profile;
    for (double v : a.mean.values) profile += " " + fmt("%.3f", v);
    info.push_back(std::string(to_string(task)) + " profile with AIA:" + profile + ", std_scalar " +
                   fmt("%.4f", a.std_scalar) + " (lambda 0: " + fmt("%.4f", b.std_scalar) + ")");
  }
  return {pass, detail + fmt("%.0f", secs) + " s"};
}

// 6 -------------------------------------------------------------------------

Outcome Suite::lambda_sensitivity() {
  const TrainResult& base = mechanism_run(false);
  const std::string warm = (work_ / "post_from.aiac").string();
  save_checkpoint(warm, base.checkpoint);
  const auto post = [&](const std::string& name, std::optional<std::pair<double, double>> ratio) {
    return trained(name, [&] {
      TrainConfig c = base_config(name, kMechanismSeed);
      c.steps = kPostSteps;
      c.regime = Regime::kPost;
      c.warm_start = warm;
      c.ratio = ratio;
      if (!ratio) c.lambda = 0.0;
      return c;
    });
  };
  const double one = combined_ntp(post("post_ratio1", std::pair<double, double>{1.0, 1.0}));
  const double fifty = combined_ntp(post("post_ratio50", std::pair<double, double>{50.0, 1.0}));
  const double zero = combined_ntp(post("post_lambda0", std::nullopt));
  const bool ordered = one > fifty;
  const bool close = fifty <= kNtpRatio * zero;
  return {ordered && close, "mean eval ntp 1:1 " + fmt("%.4f", one) + (ordered ? " > " : " <= ") + "50:1 " +
                                fmt("%.4f", fifty) + ", 50:1 / lambda0 " + fmt("%.4f", zero) + " = " +
                                fmt("%.3f", fifty / zero) + "x"};
}

// 7 -------------------------------------------------------------------------

Outcome Suite::sampling_ratio() {
  int agree = 0;
  std::string detail;
  for (std::uint64_t seed : kMixSeeds) {
    double metric[2];
    for (int k = 0; k < 2; ++k) {
      const std::uint64_t gen_weight = k == 0 ? 1 : 4;
      const std::string name = "mix" + std::to_string(gen_weight) + "to1_seed" + std::to_string(seed);
      metric[k] = combined_ntp(trained(name, [&] {
        TrainConfig c = base_config(name, seed);
        c.steps = kMixSteps;
        c.mixer.gen_weight = gen_weight;
        c.ratio = std::pair<double, double>{50.0, 1.0};
        return c;
      }));
    }
    const bool ok = metric[0] <= metric[1];
    agree += ok ? 1 : 0;
    detail += "seed " + std::to_string(seed) + ": " + fmt("%.4f", metric[0]) + (ok ? " <= " : " > ") +
              fmt("%.4f", metric[1]) + "; ";
  }
  const int needed = static_cast<int>(kMixSeeds.size() / 2 + 1);
  return {agree >= needed, detail + std::to_string(agree) + "/" + std::to_string(kMixSeeds.size()) +
                               " seeds favour 1:1 over 4:1"};
}

// 8 -------------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = testing_support::slurp(e.path());
  }
  return files;
}

Outcome Suite::determinism() {
  const char* old = std::getenv("AIA_THREADS");
  const std::string saved = old ? old : "";
  ::setenv("AIA_THREADS", "0", 1);

  const fs::path dir = work_ / "strict";
  const auto run_all = [&] {
    fs::remove_all(dir);
    fs::create_directories(dir);
    testing_support::spit(dir / "config.jsonc", R"({
      "model": {"depth": 2, "heads": 2, "dim": 16, "seed": 7},
      "train": {"steps": 5, "batch_size": 2, "eval_samples": 4}
    })");
    const std::string d = dir.string();
    const std::vector<std::vector<std::string>> commands{
        {"gen-data", "--seed", "3", "--count", "20", "--task", "mixed", "--out", d + "/data.jsonl"},
        {"train", "--config", d + "/config.jsonc", "--out-dir", d + "/run", "--ratio", "50:1"},
        {"profile", "--checkpoint", d + "/run/step_5.aiac", "--task", "understanding", "--samples", "10", "--out",
         d + "/und.csv"},
        {"dump", "--checkpoint", d + "/run/step_5.aiac", "--task", "generation", "--samples", "3", "--out",
         d + "/gen.attd"},
        {"ingest", "--dump", d + "/gen.attd", "--out", d + "/gen.csv"},
        {"targets", "--provenance", "janus_pro", "--task", "generation", "--depth", "2", "--out", d + "/s.json",
         "--layers-out", d + "/layers.csv"},
        {"plot", "--csv", d + "/gen.csv", "--csv", d + "/und.csv", "--targets", "emu3", "--out", d + "/plot.svg"},
        {"gradcheck"},
    };
    std::map<std::string, std::string> outputs;
    for (std::size_t i = 0; i < commands.size(); ++i) {
      const CliRun r = cli_run(commands[i]);
      outputs["stdout:" + commands[i][0]] = std::to_string(r.code) + "\n" + r.out + r.err;
    }
    for (auto& [k, v] : snapshot(dir)) outputs[k] = std::move(v);
    return outputs;
  };
  const auto first = run_all();
  const auto second = run_all();

  if (saved.empty()) ::unsetenv("AIA_THREADS");
  else ::setenv("AIA_THREADS", saved.c_str(), 1);

  std::size_t differing = 0;
  std::string names;
  for (const auto& [k, v] : first) {
    auto it = second.find(k);
    if (it == second.end() || it->second != v) {
      ++differing;
      names += " " + k;
    }
  }
  bool all_ok = true;
  for (const auto& [k, v] : first) {
    if (k.rfind("stdout:", 0) == 0 && v.rfind("0\n", 0) != 0) all_ok = false;
  }
  const bool has_checkpoint = first.count("run/step_5.aiac") == 1;
  return {differing == 0 && first.size() == second.size() && all_ok && has_checkpoint,
          std::to_string(first.size()) + " outputs compared, " + std::to_string(differing) + " differ" + names +
              (all_ok ? "" : ", a command failed")};
}

// 9 -------------------------------------------------------------------------

Outcome Suite::std_metric() {
  const auto make = [](double v) {
    IntensityProfile p;
    p.values.assign(4, v);
    return p;
  };
  const std::vector<IntensityProfile> same{make(0.37), make(0.37), make(0.37)};
  const std::vector<IntensityProfile> pair{make(0.4), make(0.6)};
  const double zero = profile_std_scalar(same);
  const double tenth = profile_std_scalar(pair);
  return {zero == 0.0 && std::fabs(tenth - 0.1) <= kStdTol,
          "identical " + fmt("%g", zero) + ", {0.4, 0.6} " + fmt("%.17g", tenth)};
}

// 10 ------------------------------------------------------------------------

Outcome Suite::round_trips() {
  const Checkpoint& ck = mechanism_run(true).checkpoint;
  const std::string path = (work_ / "roundtrip.aiac").string();
  save_checkpoint(path, ck);
  const Checkpoint loaded = load_checkpoint(path);
  const bool ck_ok = identical(loaded.weights, ck.weights) && loaded.config == ck.config && loaded.step == ck.step &&
                     encode_checkpoint(loaded) == encode_checkpoint(ck);

  double worst = 0.0;
  bool dump_ok = true;
  for (const char* task : {"generation", "understanding"}) {
    const std::string dump = (work_ / (std::string(task) + ".attd")).string();
    const CliRun d = cli_run({"dump", "--checkpoint", path, "--task", task, "--samples", "100", "--out", dump});
    const CliRun i = cli_run({"ingest", "--dump", dump});
    const CliRun p = cli_run({"profile", "--checkpoint", path, "--task", task, "--samples", "100"});
    if (d.code != 0 || i.code != 0 || p.code != 0) {
      dump_ok = false;
      continue;
    }
    const ProfileTable a = parse_profile_csv(i.out);
    const ProfileTable b = parse_profile_csv(p.out);
    if (a.depth() != b.depth() || a.task != b.task) {
      dump_ok = false;
      continue;
    }
    for (std::size_t l = 0; l < a.depth(); ++l) {
      worst = std::max(worst, std::fabs(a.mean[l] - b.mean[l]));
      worst = std::max(worst, std::fabs(a.std[l] - b.std[l]));
    }
  }
  dump_ok = dump_ok && worst < kRoundTripTol;

  bool schedule_ok = true;
  for (Provenance p : {Provenance::kEmu3, Provenance::kJanusPro}) {
    for (Task t : {Task::kGeneration, Task::kUnderstanding}) {
      const TargetSchedule s = builtin_schedule(p, t);
      const std::string text = schedule_to_json(s);
      const TargetSchedule back = schedule_from_json(text);
      schedule_ok = schedule_ok && schedule_to_json(back) == text && back.stages.size() == s.stages.size();
      for (std::size_t i = 0; schedule_ok && i < s.stages.size(); ++i) {
        schedule_ok = back.stages[i].lo == s.stages[i].lo && back.stages[i].hi == s.stages[i].hi &&
                      back.stages[i].target == s.stages[i].target && back.stages[i].delta == s.stages[i].delta;
      }
    }
  }
  return {ck_ok && dump_ok && schedule_ok, std::string("checkpoint ") + (ck_ok ? "bit-exact" : "differs") +
                                               ", dump vs direct max |diff| " + fmt("%.2e", worst) + ", schedules " +
                                               (schedule_ok ? "lossless" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work = (fs::temp_directory_path() / "aialab_acceptance").string();
  std::vector<int> only;
  app.add_option("--work-dir", work, "Scratch directory for runs");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  Suite suite(work);
  struct Criterion {
    int id;
    const char* name;
    Outcome (Suite::*fn)();
  };
  const std::vector<Criterion> criteria{
      {1, "intensity oracle equivalence", &Suite::intensity_oracle},
      {2, "schedule fidelity", &Suite::schedule_fidelity},
      {3, "Huber correctness", &Suite::huber},
      {4, "gradient checks", &Suite::gradcheck},
      {5, "mechanism reproduction", &Suite::mechanism},
      {6, "lambda sensitivity (post regime)", &Suite::lambda_sensitivity},
      {7, "sampling-ratio ordering", &Suite::sampling_ratio},
      {8, "strict-mode determinism", &Suite::determinism},
      {9, "std metric", &Suite::std_metric},
      {10, "round trips", &Suite::round_trips},
  };
  const std::set<int> selected(only.begin(), only.end());
  int passed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    ++ran;
    Outcome o;
    try {
      o = (suite.*c.fn)();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    passed += o.pass ? 1 : 0;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " " << c.name << ": " << o.detail
              << std::endl;
  }
  for (const auto& line : suite.info) std::cout << "info  " << line << "\n";
  std::cout << passed << "/" << ran << " criteria passed\n";
  return passed == ran ? 0 : 1;
}
