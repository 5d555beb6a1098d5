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
#include <stdexcept>
#include <string>

namespace aialab {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes, so each failure category gets its own type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InvalidMaskError : Error { using Error::Error; };
struct EmptyLossError : Error { using Error::Error; };
struct PerturbationError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct InputError : Error { using Error::Error; };
struct RoleError : Error { using Error::Error; };
struct AggregationError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct ScheduleError : Error { using Error::Error; };
struct ParameterError : Error { using Error::Error; };
struct CheckpointError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };

class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : Error("diverged at step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace aialab
