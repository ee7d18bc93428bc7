// Copyright 2026 The qdiode Authors
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

#ifndef QDIODE_ERRORS_HPP
#define QDIODE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qdiode {

/// Numerical routine failed to converge. Carries iteration diagnostics in what().
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A data-reduction step found nothing to work with (flat branch, missing well, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Fewer usable inputs than the algorithm's minimum.
class InsufficientDataError : public DataError {
 public:
  explicit InsufficientDataError(const std::string& msg) : DataError(msg) {}
};

}  // namespace qdiode

#endif  // QDIODE_ERRORS_HPP
