// Copyright 2026 The fleetplan Authors.
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

#ifndef FLEETPLAN_ERRORS_HPP_
#define FLEETPLAN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace fleetplan {

// Bad input that violates an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A restriction of a distribution to an interval that holds no mass.
class EmptyRestriction : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Trace or config file that cannot be read or yields nothing usable.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No fleet meets the SLO within the search bounds, or a queue is unstable.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fleetplan

#endif  // FLEETPLAN_ERRORS_HPP_
