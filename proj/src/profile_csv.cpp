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

#include "aialab/profile_csv.hpp"

#include <cstdio>
#include <sstream>

#include "aialab/errors.hpp"

namespace aialab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_profile_csv(const ProfileSummary& summary, std::optional<double> std_scalar,
                               const std::vector<std::string>& extra_comments) {
  std::string out = "layer,task,mean,std,n\n";
  const std::string task(to_string(summary.mean.task));
  for (std::size_t l = 0; l < summary.mean.values.size(); ++l) {
    out += std::to_string(l) + "," + task + "," + format_double(summary.mean.values[l]) + "," +
           format_double(summary.std[l]) + "," + std::to_string(summary.mean.samples) + "\n";
  }
  if (std_scalar) out += "# std_scalar=" + format_double(*std_scalar) + "\n";
  for (const auto& c : extra_comments) out += "# " + c + "\n";
  return out;
}

namespace {

double parse_number(const std::string& field, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw FormatError("line " + std::to_string(line_no) + ": '" + field + "' is not a number");
  }
}

}  // namespace

ProfileTable parse_profile_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  ProfileTable table;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# std_scalar=";
      if (line.rfind(key, 0) == 0) table.std_scalar = parse_number(line.substr(key.size()), line_no);
      continue;
    }
    if (!header) {
      if (line != "layer,task,mean,std,n") throw FormatError("missing header 'layer,task,mean,std,n'");
      header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 5) throw FormatError("line " + std::to_string(line_no) + ": expected 5 fields");
    if (parse_number(fields[0], line_no) != static_cast<double>(table.mean.size())) {
      throw FormatError("line " + std::to_string(line_no) + ": layers must be listed in order from 0");
    }
    Task task;
    try {
      task = parse_task(fields[1]);
    } catch (const InputError&) {
      throw FormatError("line " + std::to_string(line_no) + ": unknown task '" + fields[1] + "'");
    }
    if (!table.mean.empty() && task != table.task) throw FormatError("profile mixes tasks");
    table.task = task;
    table.mean.push_back(parse_number(fields[2], line_no));
    table.std.push_back(parse_number(fields[3], line_no));
    table.samples = static_cast<std::size_t>(parse_number(fields[4], line_no));
  }
  if (!header) throw FormatError("missing header 'layer,task,mean,std,n'");
  if (table.mean.empty()) throw FormatError("profile has no rows");
  return table;
}

}  // namespace aialab
