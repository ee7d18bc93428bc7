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

#include <cmath>
#include <numbers>

#include <doctest.h>

#include "qdiode/errors.hpp"
#include "qdiode/transmon.hpp"
#include "qdiode/tridiagonal.hpp"

using namespace qdiode;

namespace {
constexpr double kPi = std::numbers::pi;

PhaseGrid default_box() {
  PhaseGrid g;
  g.phi_min = -2 * kPi;
  g.phi_max = 2 * kPi;
  g.n_points = 2001;
  return g;
}
}  // namespace

TEST_CASE("particle in a box energies") {
  const PhaseGrid grid = default_box();
  const TridiagonalMatrix h =
      build_grid_hamiltonian(1.0, [](double) { return 0.0; }, grid);
  const Spectrum s = solve_spectrum(h, 3, grid);
  const double length = grid.phi_max - grid.phi_min;
  for (int n = 1; n <= 3; ++n) {
    const double exact = 4.0 * std::pow(n * kPi / length, 2);
    CHECK(s.energies[n - 1] == doctest::Approx(exact).epsilon(1e-3));
  }
}

TEST_CASE("harmonic oscillator spacing via the potential hook") {
  // V = k/2 phi^2 with k = E_J at E_J/E_C = 50: spacing sqrt(8*E_J*E_C).
  const PhaseGrid grid = default_box();
  const double e_j = 50.0;
  const TridiagonalMatrix h = build_grid_hamiltonian(
      1.0, [e_j](double phi) { return 0.5 * e_j * phi * phi; }, grid);
  const Spectrum s = solve_spectrum(h, 4, grid);
  const double omega = std::sqrt(8.0 * e_j);
  for (int n = 0; n < 3; ++n) {
    CHECK(s.energies[n + 1] - s.energies[n] ==
          doctest::Approx(omega).epsilon(5e-3));
  }
  CHECK(s.energies[0] == doctest::Approx(omega / 2).epsilon(5e-3));
}

TEST_CASE("global potential shift moves eigenvalues exactly") {
  const PhaseGrid grid = default_box();
  TransmonParams p;
  p.e_j = 20.0;
  p.eta = 0.276;
  const TridiagonalMatrix h = build_grid_hamiltonian(p, grid);
  TridiagonalMatrix shifted = h;
  const double c = 17.25;
  for (double& d : shifted.diag) d += c;

  const Spectrum a = solve_spectrum(h, 5, grid);
  const Spectrum b = solve_spectrum(shifted, 5, grid);
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(b.energies[i] - a.energies[i] - c) < 1e-10);
  }
}

TEST_CASE("sturm count agrees with solved eigenvalues") {
  TridiagonalMatrix t;
  t.diag = {2.0, 1.0, -1.0, 3.0, 0.5};
  t.off = {0.3, -0.4, 0.7, 0.2};
  const std::vector<double> vals = lowest_eigenvalues(t, 5);
  for (std::size_t j = 0; j < vals.size(); ++j) {
    CHECK(eigenvalue_count_below(t, vals[j] - 1e-9) == static_cast<int>(j));
    CHECK(eigenvalue_count_below(t, vals[j] + 1e-9) == static_cast<int>(j + 1));
  }
}

TEST_CASE("eigenpairs satisfy the eigenvalue equation") {
  TridiagonalMatrix t;
  const int n = 200;
  for (int i = 0; i < n; ++i) t.diag.push_back(std::cos(0.7 * i) * 3.0);
  for (int i = 0; i + 1 < n; ++i) t.off.push_back(1.0 + 0.5 * std::sin(0.3 * i));

  const TridiagonalEigen eig = lowest_eigenpairs(t, 6);
  for (std::size_t j = 0; j < 6; ++j) {
    const auto& v = eig.vectors[j];
    double norm2 = 0.0;
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
      double y = t.diag[i] * v[i];
      if (i > 0) y += t.off[i - 1] * v[i - 1];
      if (i + 1 < n) y += t.off[i] * v[i + 1];
      res = std::max(res, std::abs(y - eig.values[j] * v[i]));
      norm2 += v[i] * v[i];
    }
    CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res < 1e-10);
    if (j > 0) CHECK(eig.values[j] >= eig.values[j - 1]);
  }
  // Orthogonality across the set.
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = a + 1; b < 6; ++b) {
      double dot = 0.0;
      for (int i = 0; i < n; ++i) dot += eig.vectors[a][i] * eig.vectors[b][i];
      CHECK(std::abs(dot) < 1e-8);
    }
  }
}

TEST_CASE("degenerate pair is resolved orthogonally") {
  // Two decoupled blocks produce an exactly degenerate ground pair.
  TridiagonalMatrix t;
  t.diag = {1.0, 2.0, 5.0, 2.0, 1.0};
  t.off = {0.5, 0.0, 0.0, 0.5};
  const TridiagonalEigen eig = lowest_eigenpairs(t, 2);
  CHECK(eig.values[0] == doctest::Approx(eig.values[1]).epsilon(1e-12));
  double dot = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    dot += eig.vectors[0][i] * eig.vectors[1][i];
  }
  CHECK(std::abs(dot) < 1e-8);
}

TEST_CASE("input validation") {
  TridiagonalMatrix t;
  t.diag = {1.0, 2.0};
  t.off = {0.1};
  CHECK_THROWS_AS(lowest_eigenvalues(t, 0), std::invalid_argument);
  CHECK_THROWS_AS(lowest_eigenvalues(t, 3), std::invalid_argument);
  t.off.push_back(0.2);
  CHECK_THROWS_AS(lowest_eigenvalues(t, 1), std::invalid_argument);
}
