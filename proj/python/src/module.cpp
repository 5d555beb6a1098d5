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


#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "aialab/aia.hpp"
#include "aialab/checkpoint.hpp"
#include "aialab/errors.hpp"
#include "aialab/intensity.hpp"
#include "aialab/profile_csv.hpp"
#include "aialab/rng.hpp"
#include "aialab/tasks.hpp"
#include "aialab/train.hpp"
#include "cli.hpp"

namespace py = pybind11;
using namespace aialab;

namespace {

Modality modality_from(const py::handle& h) {
  if (py::isinstance<py::str>(h)) {
    const auto s = h.cast<std::string>();
    if (s == "text") return Modality::kText;
    if (s == "image") return Modality::kImage;
    if (s == "special") return Modality::kSpecial;
    if (s == "pad") return Modality::kPad;
    throw InputError("unknown modality '" + s + "'");
  }
  const int code = h.cast<int>();
  if (code < 0 || code > 3) throw InputError("modality code out of range");
  return static_cast<Modality>(code);
}

std::vector<Modality> modalities_from(const py::sequence& seq) {
  std::vector<Modality> out;
  out.reserve(seq.size());
  for (const auto& h : seq) out.push_back(modality_from(h));
  return out;
}

IntensityProfile profile_from(const std::vector<double>& values, Task task) {
  IntensityProfile p;
  p.task = task;
  p.values = values;
  return p;
}

std::vector<IntensityProfile> profiles_from(const std::vector<std::vector<double>>& rows) {
  std::vector<IntensityProfile> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(profile_from(r, Task::kGeneration));
  return out;
}

// probs: float64 array shaped (layers, heads, n, n).
AttentionRecord record_from(py::array_t<double, py::array::c_style | py::array::forcecast> probs,
                            std::vector<Modality> modality) {
  if (probs.ndim() != 4) throw ShapeError("attention must have shape (layers, heads, n, n)");
  const auto L = static_cast<std::size_t>(probs.shape(0)), H = static_cast<std::size_t>(probs.shape(1));
  const auto n = static_cast<std::size_t>(probs.shape(2));
  if (static_cast<std::size_t>(probs.shape(3)) != n) throw ShapeError("attention matrices must be square");
  if (modality.size() != n) throw ShapeError("modality length must match the attention size");
  AttentionRecord rec;
  rec.layers = L;
  rec.heads = H;
  rec.length = n;
  rec.modality = std::move(modality);
  const double* data = probs.data();
  for (std::size_t lh = 0; lh < L * H; ++lh) {
    rec.probs.emplace_back(Shape{n, n}, std::vector<double>(data + lh * n * n, data + (lh + 1) * n * n));
  }
  return rec;
}

py::dict sequence_dict(const TokenSequence& seq) {
  py::dict d;
  d["task"] = std::string(to_string(seq.task));
  d["ids"] = seq.ids;
  std::vector<int> modality;
  for (Modality m : seq.modality) modality.push_back(static_cast<int>(m));
  d["modality"] = modality;
  d["loss_mask"] = seq.loss_mask;
  return d;
}

py::dict eval_dict(const EvalRecord& e) {
  py::dict d;
  d["step"] = e.step;
  d["ntp"] = e.ntp;
  d["mean"] = e.mean.values;
  d["std"] = e.std;
  d["std_scalar"] = e.std_scalar;
  d["alignment_gap"] = e.alignment_gap;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Attention interaction alignment lab: intensity profiles, target schedules and toy training";

  py::register_exception<Error>(m, "AialabError", PyExc_ValueError);

  m.def(
      "layer_intensity",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> probs, const py::sequence& modality,
         std::optional<std::string> task) {
        const auto mods = modalities_from(modality);
        const Task t = task ? parse_task(*task) : infer_task(mods);
        const AttentionRecord rec = record_from(probs, mods);
        return layer_intensity(rec, modality_roles(rec.modality, t)).values;
      },
      py::arg("probs"), py::arg("modality"), py::arg("task") = py::none(),
      "Per-layer cross-modal intensity of attention shaped (layers, heads, n, n).");

  m.def("huber_penalty", py::overload_cast<double, double, double>(&huber_penalty), py::arg("intensity"),
        py::arg("target"), py::arg("delta"));

  m.def(
      "targets",
      [](const std::string& provenance, const std::string& task, std::size_t depth) {
        std::vector<std::tuple<std::size_t, double, double>> out;
        for (const auto& t : rescale_schedule(builtin_schedule(parse_provenance(provenance), parse_task(task)), depth)) {
          out.emplace_back(t.reference_layer, t.target, t.delta);
        }
        return out;
      },
      py::arg("provenance"), py::arg("task"), py::arg("depth"),
      "Per-layer (reference_layer, T, delta) for a built-in table rescaled to depth.");

  m.def(
      "schedule_json",
      [](const std::string& provenance, const std::string& task) {
        return schedule_to_json(builtin_schedule(parse_provenance(provenance), parse_task(task)));
      },
      py::arg("provenance"), py::arg("task"));

  m.def(
      "aia_loss",
      [](const std::vector<double>& profile, const std::string& provenance, const std::string& task,
         const std::string& variant) {
        const Task t = parse_task(task);
        const auto targets = rescale_schedule(builtin_schedule(parse_provenance(provenance), t), profile.size());
        return aia_loss(profile_from(profile, t), targets, parse_penalty_variant(variant));
      },
      py::arg("profile"), py::arg("provenance"), py::arg("task"), py::arg("variant") = "center");

  m.def(
      "alignment_gap",
      [](const std::vector<double>& profile, const std::string& provenance, const std::string& task) {
        const Task t = parse_task(task);
        const auto targets = rescale_schedule(builtin_schedule(parse_provenance(provenance), t), profile.size());
        return alignment_gap(profile_from(profile, t), targets);
      },
      py::arg("profile"), py::arg("provenance"), py::arg("task"));

  m.def(
      "aggregate_profiles",
      [](const std::vector<std::vector<double>>& profiles) {
        const auto ps = profiles_from(profiles);
        const ProfileSummary s = aggregate_profiles(ps);
        return std::make_pair(s.mean.values, s.std);
      },
      py::arg("profiles"), "Per-layer (mean, population std) over sample profiles.");

  m.def(
      "profile_std_scalar",
      [](const std::vector<std::vector<double>>& profiles) { return profile_std_scalar(profiles_from(profiles)); },
      py::arg("profiles"));

  m.def(
      "sample",
      [](const std::string& task, std::uint64_t seed) {
        Rng rng(seed);
        return sequence_dict(make_sample(parse_task(task), rng));
      },
      py::arg("task"), py::arg("seed") = 0);

  m.def(
      "train",
      [](const std::string& config_json, const std::string& out_dir) {
        TrainConfig cfg = train_config_from_json(config_json);
        cfg.out_dir = out_dir;
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(cfg);
        }
        py::dict d;
        d["lambda"] = r.log.lambda;
        d["lambda_source"] = r.log.lambda_source;
        d["steps"] = r.log.steps.size();
        d["checkpoint"] = out_dir + "/step_" + std::to_string(r.checkpoint.step) + ".aiac";
        d["generation"] = eval_dict(r.log.final_eval(Task::kGeneration));
        d["understanding"] = eval_dict(r.log.final_eval(Task::kUnderstanding));
        return d;
      },
      py::arg("config_json"), py::arg("out_dir"), "Train from a JSON config; returns the final evaluations.");

  m.def(
      "profile",
      [](const std::string& checkpoint, const std::string& task, std::size_t samples, std::uint64_t seed) {
        const Checkpoint ck = load_checkpoint(checkpoint);
        EvalOptions options;
        options.seed = seed;
        EvalResult e;
        {
          py::gil_scoped_release release;
          e = evaluate(ck, parse_task(task), samples, options);
        }
        py::dict d;
        d["ntp"] = e.ntp;
        d["mean"] = e.summary.mean.values;
        d["std"] = e.summary.std;
        d["std_scalar"] = e.std_scalar;
        return d;
      },
      py::arg("checkpoint"), py::arg("task"), py::arg("samples") = 100, py::arg("seed") = 0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs an aia_lab subcommand in-process; returns (exit_code, stdout, stderr).");
}
