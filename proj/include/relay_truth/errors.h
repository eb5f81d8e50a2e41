// Copyright 2026 The relay-truth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RELAY_TRUTH_ERRORS_H_
#define RELAY_TRUTH_ERRORS_H_

#include <stdexcept>
#include <string>

namespace relay_truth {

// Caller passed a value outside an operation's precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inconsistent model setup or malformed scenario input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A Monte-Carlo functional produced a non-finite value.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Subcommand cannot run on the given scenario, or a bad command line.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace relay_truth

#endif  // RELAY_TRUTH_ERRORS_H_
