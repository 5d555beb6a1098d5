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

#include "aialab/aia.hpp"

#include <cmath>

#include "aialab/errors.hpp"
#include "aialab/parallel.hpp"
#include "json.hpp"

namespace aialab {

using nlohmann::json;

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kEmu3:
      return "emu3";
    case Provenance::kJanusPro:
      return "janus_pro";
    case Provenance::kCustom:
      break;
  }
  return "custom";
}

Provenance parse_provenance(std::string_view name) {
  if (name == "emu3") return Provenance::kEmu3;
  if (name == "janus_pro" || name == "janus-pro" || name == "januspro") return Provenance::kJanusPro;
  if (name == "custom") return Provenance::kCustom;
  throw ScheduleError("unknown provenance '" + std::string(name) + "'");
}

void TargetSchedule::validate() const {
  if (reference_depth == 0) throw ScheduleError("reference depth must be positive");
  if (stages.empty()) throw ScheduleError("schedule has no stages");
  std::size_t expected = 0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const TargetStage& s = stages[i];
    if (s.lo != expected) throw ScheduleError("stage " + std::to_string(i) + " does not start where the previous ended");
    if (!(s.delta > 0.0)) throw ScheduleError("stage " + std::to_string(i) + " has non-positive delta");
    if (!(s.target >= 0.0 && s.target <= 1.0)) throw ScheduleError("stage " + std::to_string(i) + " target outside [0,1]");
    if (!s.hi) {
      if (i + 1 != stages.size()) throw ScheduleError("only the last stage may be open-ended");
      expected = reference_depth;
      break;
    }
    if (*s.hi <= s.lo) throw ScheduleError("stage " + std::to_string(i) + " is empty");
    expected = *s.hi;
  }
  if (expected < reference_depth) throw ScheduleError("stages do not cover the reference depth");
}

const TargetStage& TargetSchedule::lookup(std::size_t reference_layer) const {
  for (const auto& s : stages) {
    if (s.contains(reference_layer)) return s;
  }
  throw ScheduleError("no stage covers reference layer " + std::to_string(reference_layer));
}

TargetSchedule builtin_schedule(Provenance provenance, Task task) {
  TargetSchedule s;
  s.task = task;
  s.provenance = provenance;
  const bool gen = task == Task::kGeneration;
  // Rows are (delta, target) per stage; the two tables differ only in where
  // the fourth stage ends.
  std::size_t fourth_end = 0;
  switch (provenance) {
    case Provenance::kEmu3:
      s.reference_depth = 32;
      fourth_end = 31;  // 25 <= l <= 30
      break;
    case Provenance::kJanusPro:
      s.reference_depth = 30;
      fourth_end = 30;  // 25 <= l <= 29
      break;
    case Provenance::kCustom:
      throw ScheduleError("no built-in schedule for custom provenance");
  }
  s.stages = {
      {0, 10, gen ? 0.4 : 0.1, gen ? 0.2 : 0.05},
      {10, 20, gen ? 0.4 : 0.15, gen ? 0.1 : 0.05},
      {20, 25, gen ? 0.4 : 0.3, gen ? 0.1 : 0.05},
      {25, fourth_end, gen ? 0.2 : 0.3, 0.05},
      {fourth_end, std::nullopt, 0.2, 0.05},
  };
  return s;
}

std::vector<LayerTarget> rescale_schedule(const TargetSchedule& schedule, std::size_t model_depth) {
  if (model_depth == 0) throw ParameterError("model depth must be at least 1");
  schedule.validate();
  std::vector<LayerTarget> out(model_depth);
  for (std::size_t l = 0; l < model_depth; ++l) {
    const std::size_t ref = l * schedule.reference_depth / model_depth;
    const TargetStage& s = schedule.lookup(ref);
    out[l] = {ref, s.target, s.delta};
  }
  return out;
}

std::string_view to_string(PenaltyVariant v) { return v == PenaltyVariant::kCenter ? "center" : "band"; }

PenaltyVariant parse_penalty_variant(std::string_view name) {
  if (name == "center") return PenaltyVariant::kCenter;
  if (name == "band") return PenaltyVariant::kBand;
  throw ParameterError("unknown penalty variant '" + std::string(name) + "'");
}

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0)) throw ParameterError("Huber threshold must be positive");
}

}  // namespace

double huber_penalty(double intensity, double target, double delta) {
  check_delta(delta);
  const double r = std::abs(intensity - target);
  return r <= delta ? 0.5 * r * r : delta * r - 0.5 * delta * delta;
}

double huber_slope(double intensity, double target, double delta) {
  check_delta(delta);
  const double r = intensity - target;
  if (std::abs(r) <= delta) return r;
  return r > 0 ? delta : -delta;
}

Var huber_penalty(Var intensity, double target, double delta) {
  const double i = intensity.item();
  return intensity.tape->record(Tensor::scalar(huber_penalty(i, target, delta)), {intensity},
                                [ii = intensity.id, target, delta](Tape& tp, std::size_t self) {
                                  const double g = tp.upstream(self)[0];
                                  tp.accumulate(ii)[0] += g * huber_slope(tp.value(ii)[0], target, delta);
                                });
}

double penalty(double intensity, const LayerTarget& t, PenaltyVariant variant) {
  if (variant == PenaltyVariant::kCenter) return huber_penalty(intensity, t.target, t.delta);
  const double excess = std::max(0.0, std::abs(intensity - t.target) - t.delta);
  return huber_penalty(excess, 0.0, t.delta);
}

double penalty_slope(double intensity, const LayerTarget& t, PenaltyVariant variant) {
  if (variant == PenaltyVariant::kCenter) return huber_slope(intensity, t.target, t.delta);
  const double r = intensity - t.target;
  const double excess = std::abs(r) - t.delta;
  if (excess <= 0.0) return 0.0;
  const double s = huber_slope(excess, 0.0, t.delta);
  return r > 0 ? s : -s;
}

double aia_loss(const IntensityProfile& profile, std::span<const LayerTarget> targets, PenaltyVariant variant) {
  if (profile.depth() != targets.size()) {
    throw ShapeError("aia_loss: profile depth " + std::to_string(profile.depth()) + " vs " +
                     std::to_string(targets.size()) + " targets");
  }
  std::vector<double> terms(targets.size());
  for (std::size_t l = 0; l < targets.size(); ++l) terms[l] = penalty(profile.values[l], targets[l], variant);
  return deterministic_sum(terms) / static_cast<double>(terms.size());
}

Var aia_loss(std::span<const Var> intensities, std::span<const LayerTarget> targets, PenaltyVariant variant) {
  if (intensities.size() != targets.size() || intensities.empty()) {
    throw ShapeError("aia_loss: intensity count does not match targets");
  }
  std::vector<Var> terms;
  terms.reserve(targets.size());
  for (std::size_t l = 0; l < targets.size(); ++l) {
    const Var in = intensities[l];
    const LayerTarget t = targets[l];
    terms.push_back(in.tape->record(Tensor::scalar(penalty(in.item(), t, variant)), {in},
                                    [ii = in.id, t, variant](Tape& tp, std::size_t self) {
                                      tp.accumulate(ii)[0] += tp.upstream(self)[0] * penalty_slope(tp.value(ii)[0], t, variant);
                                    }));
  }
  return ad::scale(ad::add_n(terms), 1.0 / static_cast<double>(terms.size()));
}

double total_loss(double ntp, double aia, double lambda) {
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be non-negative");
  return ntp + lambda * aia;
}

std::string schedule_to_json(const TargetSchedule& schedule) {
  json doc;
  doc["task"] = std::string(to_string(schedule.task));
  doc["provenance"] = std::string(to_string(schedule.provenance));
  doc["reference_depth"] = schedule.reference_depth;
  json stages = json::array();
  for (const auto& s : schedule.stages) {
    json j;
    j["lo"] = s.lo;
    j["hi"] = s.hi ? json(*s.hi) : json(nullptr);
    j["T"] = s.target;
    j["delta"] = s.delta;
    stages.push_back(std::move(j));
  }
  doc["stages"] = std::move(stages);
  return doc.dump(2) + "\n";
}

TargetSchedule schedule_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text, nullptr, true, true);
    TargetSchedule s;
    s.task = parse_task(doc.at("task").get<std::string>());
    s.provenance = doc.contains("provenance") ? parse_provenance(doc["provenance"].get<std::string>()) : Provenance::kCustom;
    s.reference_depth = doc.at("reference_depth").get<std::size_t>();
    for (const auto& j : doc.at("stages")) {
      TargetStage st;
      st.lo = j.at("lo").get<std::size_t>();
      if (j.contains("hi") && !j["hi"].is_null()) st.hi = j["hi"].get<std::size_t>();
      st.target = j.at("T").get<double>();
      st.delta = j.at("delta").get<double>();
      s.stages.push_back(st);
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed schedule document: ") + e.what());
  } catch (const InputError& e) {
    throw FormatError(std::string("malformed schedule document: ") + e.what());
  }
}

}  // namespace aialab
