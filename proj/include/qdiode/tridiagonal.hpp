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

#ifndef QDIODE_TRIDIAGONAL_HPP
#define QDIODE_TRIDIAGONAL_HPP

#include <cstdint>
#include <vector>

namespace qdiode {

/// Real symmetric tridiagonal matrix: diag has n entries, off has n-1.
struct TridiagonalMatrix {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const { return diag.size(); }
};

void validate(const TridiagonalMatrix& t);

/// Number of eigenvalues strictly below x (Sturm sequence count).
int eigenvalue_count_below(const TridiagonalMatrix& t, double x);

/// The k smallest eigenvalues, ascending, each located by bisection to
/// near machine precision.
std::vector<double> lowest_eigenvalues(const TridiagonalMatrix& t, std::size_t k);

struct TridiagonalEigen {
  std::vector<double> values;                 // ascending
  std::vector<std::vector<double>> vectors;   // unit 2-norm, one per value
};

/// k smallest eigenpairs: bisection for values, inverse iteration with
/// cluster reorthogonalization for vectors. Throws ConvergenceError with
/// iteration diagnostics if a vector fails to settle.
TridiagonalEigen lowest_eigenpairs(const TridiagonalMatrix& t, std::size_t k,
                                   std::uint64_t seed = 0x7d1a6u);

}  // namespace qdiode

#endif  // QDIODE_TRIDIAGONAL_HPP
