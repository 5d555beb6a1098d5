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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aialab/intensity.hpp"

namespace aialab {

/// Parsed `layer,task,mean,std,n` table. Lines starting with '#' are
/// comments; a `# std_scalar=<v>` comment is picked up when present.
struct ProfileTable {
  Task task = Task::kGeneration;
  std::vector<double> mean;
  std::vector<double> std;
  std::size_t samples = 0;
  std::optional<double> std_scalar;

  std::size_t depth() const { return mean.size(); }
};

/// %.17g, enough digits to round-trip any double.
std::string format_double(double v);

std::string format_profile_csv(const ProfileSummary& summary, std::optional<double> std_scalar = std::nullopt,
                               const std::vector<std::string>& extra_comments = {});
ProfileTable parse_profile_csv(std::string_view text);

}  // namespace aialab
