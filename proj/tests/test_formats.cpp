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

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "aialab/aia.hpp"
#include "aialab/attention_dump.hpp"
#include "aialab/checkpoint.hpp"
#include "aialab/errors.hpp"
#include "aialab/intensity.hpp"
#include "aialab/profile_csv.hpp"
#include "aialab/rng.hpp"
#include "aialab/svg_plot.hpp"
#include "aialab/tasks.hpp"
#include "doctest.h"
#include "support/files.hpp"

using namespace aialab;

namespace {

ModelConfig tiny() {
  ModelConfig c;
  c.depth = 2;
  c.heads = 2;
  c.dim = 16;
  c.seed = 4;
  return c;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("checkpoints round-trip bit-exactly") {
  Checkpoint ck = build_model(tiny());
  ck.step = 1234;
  ck.weights[5].value[3] = -0.0;
  ck.weights[6].value[0] = 1e-310;  // subnormal survives
  const Checkpoint back = decode_checkpoint(encode_checkpoint(ck));
  CHECK(back.config == ck.config);
  CHECK(back.step == 1234);
  CHECK(identical(back.weights, ck.weights));
  CHECK(std::signbit(back.weights[5].value[3]));
  CHECK(encode_checkpoint(back) == encode_checkpoint(ck));

  const auto dir = testing_support::scratch_dir("formats_ckpt");
  const std::string path = (dir / "a.aiac").string();
  save_checkpoint(path, ck);
  CHECK(identical(load_checkpoint(path).weights, ck.weights));
  CHECK(testing_support::slurp(path).substr(0, 4) == "AIAC");
}

TEST_CASE("damaged checkpoints are rejected") {
  const std::string bytes = encode_checkpoint(build_model(tiny()));
  CHECK_THROWS_AS(decode_checkpoint("NOPE" + bytes.substr(4)), CheckpointError);
  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), CheckpointError);
  CHECK_THROWS_AS(decode_checkpoint(bytes + "x"), CheckpointError);
  std::string version = bytes;
  version[4] = 9;
  CHECK_THROWS_AS(decode_checkpoint(version), CheckpointError);
  CHECK_THROWS_AS(decode_checkpoint(""), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/x.aiac"), CheckpointError);
}

TEST_CASE("model config documents round-trip") {
  ModelConfig c = tiny();
  c.max_len = 40;
  CHECK(model_config_from_json(model_config_to_json(c)) == c);
  CHECK_THROWS_AS(model_config_from_json("{"), ConfigError);
}

TEST_CASE("profile CSV formatting and parsing") {
  ProfileSummary s;
  s.mean.task = Task::kUnderstanding;
  s.mean.values = {0.1, 1.0 / 3.0, 0.7};
  s.mean.samples = 100;
  s.std = {0.0, 0.01, 0.2};
  const std::string csv = format_profile_csv(s, 0.125, {"note"});
  CHECK(csv.rfind("layer,task,mean,std,n\n0,understanding,0.10000000000000001,0,100\n", 0) == 0);
  CHECK(csv.find("# std_scalar=0.125\n") != std::string::npos);
  const ProfileTable t = parse_profile_csv(csv);
  CHECK(t.task == Task::kUnderstanding);
  CHECK(t.mean == s.mean.values);
  CHECK(t.std == s.std);
  CHECK(t.samples == 100);
  REQUIRE(t.std_scalar);
  CHECK(*t.std_scalar == 0.125);
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("malformed profile CSVs") {
  CHECK_THROWS_AS(parse_profile_csv(""), FormatError);
  CHECK_THROWS_AS(parse_profile_csv("layer,task,mean,std,n\n"), FormatError);
  CHECK_THROWS_AS(parse_profile_csv("layer,task,mean\n0,generation,0.1\n"), FormatError);
  CHECK_THROWS_AS(parse_profile_csv("layer,task,mean,std,n\n0,generation,abc,0,1\n"), FormatError);
  CHECK_THROWS_AS(parse_profile_csv("layer,task,mean,std,n\n1,generation,0.1,0,1\n"), FormatError);
  CHECK_THROWS_AS(parse_profile_csv("layer,task,mean,std,n\n0,generation,0.1,0,1\n1,understanding,0.1,0,1\n"),
                  FormatError);
}

TEST_CASE("attention dumps round-trip at both precisions") {
  const Checkpoint ck = build_model(tiny());
  Rng rng(3);
  std::vector<AttentionRecord> records;
  for (int i = 0; i < 3; ++i) records.push_back(*forward(ck, und_sample(rng), true).attention);

  const auto wide = decode_attention_dump(encode_attention_dump(records, DumpPrecision::kF64));
  REQUIRE(wide.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(wide[i].modality == records[i].modality);
    for (std::size_t k = 0; k < records[i].probs.size(); ++k) CHECK(wide[i].probs[k].identical(records[i].probs[k]));
  }
  const auto narrow = decode_attention_dump(encode_attention_dump(records, DumpPrecision::kF32));
  for (std::size_t k = 0; k < records[0].probs.size(); ++k) {
    for (std::size_t e = 0; e < records[0].probs[k].size(); ++e) {
      CHECK(std::fabs(narrow[0].probs[k][e] - records[0].probs[k][e]) < 1e-7);
    }
  }
}

namespace {

// Little-endian writer for hand-built dumps.
struct DumpBuilder {
  std::string bytes = "ATTD";
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    u32(u);
  }
};

std::string one_layer_dump(float row2_key_mass) {
  DumpBuilder b;
  b.u32(1);  // f32
  b.u32(1);
  b.u32(1);  // L
  b.u32(1);  // H
  b.u32(3);  // Q
  b.u32(3);  // K
  b.bytes += std::string("\x00\x01\x01", 3);  // text, image, image
  const float rows[9] = {1, 0, 0, 0.5f, 0.5f, 0, row2_key_mass, 0.2f, 0.8f - row2_key_mass};
  for (float v : rows) b.f32(v);
  return b.bytes;
}

}  // namespace

TEST_CASE("hand-built dump decodes and validates") {
  const auto records = decode_attention_dump(one_layer_dump(0.4f));
  REQUIRE(records.size() == 1);
  const IntensityProfile p = layer_intensity(records[0], modality_roles(records[0].modality, infer_task(records[0].modality)));
  CHECK(std::fabs(p.values[0] - 0.45) < 1e-7);

  std::string bad_row = one_layer_dump(0.4f);
  // Overwrite the last probability so row 2 sums to 0.9.
  const float v = 0.3f;
  std::memcpy(&bad_row[bad_row.size() - 4], &v, 4);
  try {
    decode_attention_dump(bad_row);
    FAIL("expected a row-sum failure");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("sample 0") != std::string::npos);
  }
  CHECK_THROWS_AS(decode_attention_dump("ATTX" + one_layer_dump(0.4f).substr(4)), FormatError);
  const std::string full = one_layer_dump(0.4f);
  CHECK_THROWS_AS(decode_attention_dump(full.substr(0, full.size() - 2)), FormatError);
}

TEST_CASE("SVG output is deterministic and carries one polyline per series") {
  PlotSeries a{"a.csv", Task::kGeneration, {0.1, 0.3, 0.5, 0.2}};
  PlotSeries b{"b.csv", Task::kGeneration, {0.4, 0.4, 0.4, 0.4}};
  const auto bands = rescale_schedule(builtin_schedule(Provenance::kEmu3, Task::kGeneration), 4);
  const std::string svg = render_intensity_svg({a, b}, bands);
  CHECK(svg == render_intensity_svg({a, b}, bands));
  CHECK(count_of(svg, "<polyline class=\"series\"") == 2);
  CHECK(count_of(svg, "class=\"band\"") == 4);
  CHECK(svg.find("data-layer=\"3\" data-target=\"0.40000000000000002\" data-delta=\"0.10000000000000001\"") !=
        std::string::npos);
  // Four points in the first polyline.
  const auto start = svg.find("points=\"") + 8;
  const auto end = svg.find('"', start);
  CHECK(count_of(svg.substr(start, end - start), ",") == 4);
  CHECK_THROWS_AS(render_intensity_svg({}, bands), InputError);
}
