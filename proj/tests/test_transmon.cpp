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

#include "qdiode/cpr.hpp"
#include "qdiode/errors.hpp"
#include "qdiode/transmon.hpp"

using namespace qdiode;

namespace {

constexpr double kPi = std::numbers::pi;

PhaseGrid grid_2pi() { return PhaseGrid{}; }

PhaseGrid grid_single_well() {
  PhaseGrid g;
  g.phi_min = -kPi;
  g.phi_max = kPi;
  g.n_points = 2001;
  return g;
}

// High-order central stencils for the 2nd/3rd/4th derivatives; accurate to
// O(h^4), chosen so the 4th derivative is good to ~1e-7 at h = 0.05.
struct PotentialDerivatives {
  double d2, d3, d4;
};

PotentialDerivatives fd_derivatives_at_zero(double eta, double h) {
  const DiodeCPR cpr{eta, 1.0};
  auto f = [&](double x) { return cpr_potential(cpr, x); };
  const double fm3 = f(-3 * h), fm2 = f(-2 * h), fm1 = f(-h);
  const double f0 = f(0.0);
  const double fp1 = f(h), fp2 = f(2 * h), fp3 = f(3 * h);
  PotentialDerivatives d;
  d.d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h);
  d.d3 = (fm3 - 8 * fm2 + 13 * fm1 - 13 * fp1 + 8 * fp2 - fp3) /
         (8 * h * h * h);
  d.d4 = (-fm3 + 12 * fm2 - 39 * fm1 + 56 * f0 - 39 * fp1 + 12 * fp2 - fp3) /
         (6 * h * h * h * h);
  return d;
}

}  // namespace

TEST_CASE("grid hamiltonian is the discrete laplacian without a potential") {
  PhaseGrid g;
  g.phi_min = -1.0;
  g.phi_max = 1.0;
  g.n_points = 11;
  const double e_c = 2.0;
  const TridiagonalMatrix h =
      build_grid_hamiltonian(e_c, [](double) { return 0.0; }, g);
  const double kin = 4.0 * e_c / (g.spacing() * g.spacing());
  REQUIRE(h.size() == 9);
  for (double d : h.diag) CHECK(d == doctest::Approx(2.0 * kin).epsilon(1e-14));
  for (double o : h.off) CHECK(o == doctest::Approx(-kin).epsilon(1e-14));
}

TEST_CASE("grid hamiltonian diagonal is mirror symmetric at eta = 0") {
  TransmonParams p;
  p.e_j = 20.0;
  p.eta = 0.0;
  const PhaseGrid g = grid_2pi();
  const TridiagonalMatrix h = build_grid_hamiltonian(p, g);
  const std::size_t m = h.size();
  for (std::size_t i = 0; i < m / 2; ++i) {
    CHECK(std::abs(h.diag[i] - h.diag[m - 1 - i]) < 1e-12 * std::abs(h.diag[i]));
  }
}

TEST_CASE("grid hamiltonian rejects bad input") {
  TransmonParams p;
  p.e_j = 20.0;
  PhaseGrid g;
  g.n_points = 2;
  CHECK_THROWS_AS(build_grid_hamiltonian(p, g), std::invalid_argument);
  g.n_points = 4;  // even
  CHECK_THROWS_AS(build_grid_hamiltonian(p, g), std::invalid_argument);
  p.e_j = -1.0;
  CHECK_THROWS_AS(build_grid_hamiltonian(p, grid_2pi()), std::invalid_argument);
  TransmonParams q;
  q.eta = 1.5;
  CHECK_THROWS_AS(build_grid_hamiltonian(q, grid_2pi()), std::domain_error);
}

TEST_CASE("central-well ground state sits a zero-point energy above the minimum") {
  TransmonParams p;
  p.e_j = 20.0;
  p.eta = 0.276;
  const WellResult res = solve_wells(p, grid_2pi());
  REQUIRE(!res.analysis.bound_state_indices.empty());
  const double e0 = res.spectrum.energies[res.analysis.bound_state_indices[0]];
  const double v_min = -p.e_j * std::sqrt(1.0 - p.eta * p.eta);
  const double harmonic = 0.5 * std::sqrt(8.0 * p.e_j * std::sqrt(1.0 - p.eta * p.eta));
  CHECK((e0 - v_min) / harmonic == doctest::Approx(1.0).epsilon(0.10));
}

TEST_CASE("bound-state counts at E_J/E_C = 20") {
  const double expected[][2] = {{0.10, 3}, {0.276, 2}, {0.50, 1}};
  for (const auto& row : expected) {
    TransmonParams p;
    p.e_j = 20.0;
    p.eta = row[0];
    const WellResult res = solve_wells(p, grid_2pi());
    CHECK(res.analysis.bound_state_indices.size() == std::size_t(row[1]));

    PhaseGrid wide;
    wide.phi_min = -3 * kPi;
    wide.phi_max = 3 * kPi;
    wide.n_points = 3001;
    const WellResult res_wide = solve_wells(p, wide);
    CHECK(res_wide.analysis.bound_state_indices.size() == std::size_t(row[1]));
  }
}

TEST_CASE("well geometry brackets the minimum") {
  TransmonParams p;
  p.e_j = 20.0;
  p.eta = 0.276;
  const WellResult res = solve_wells(p, grid_2pi());
  const WellAnalysis& a = res.analysis;
  CHECK(a.well_left < a.well_min_phi);
  CHECK(a.well_min_phi < a.well_right);
  // The skewed potential has its central minimum at phi = 0 and maxima at
  // 2*phi0 - pi and 2*phi0 + pi.
  const double phi0 = std::asin(p.eta);
  CHECK(a.well_min_phi == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(a.well_left == doctest::Approx(2 * phi0 - kPi).epsilon(1e-3));
  CHECK(a.well_right == doctest::Approx(2 * phi0 + kPi).epsilon(1e-3));
  // Lower flanking barrier for positive tilt is the left one.
  const double barrier_exact =
      p.e_j * (std::sqrt(1 - p.eta * p.eta) + p.eta * (2 * phi0 - kPi));
  CHECK(a.barrier_energy == doctest::Approx(barrier_exact).epsilon(1e-6));
}

TEST_CASE("bound states carry at least 90% collective well weight") {
  TransmonParams p;
  p.e_j = 20.0;
  p.eta = 0.276;
  const WellResult res = solve_wells(p, grid_2pi());
  for (std::size_t idx : res.analysis.bound_state_indices) {
    CHECK(res.spectrum.energies[idx] < res.analysis.barrier_energy);
    CHECK(res.analysis.well_weights[idx] >= 0.45);  // dominant cluster member
  }
}

TEST_CASE("no central well reported when the grid misses it") {
  TransmonParams p;
  p.e_j = 20.0;
  p.eta = 0.9;
  PhaseGrid tiny;
  tiny.phi_min = -0.05;
  tiny.phi_max = 0.30;
  tiny.n_points = 41;  // excludes both flanking maxima
  CHECK_THROWS_AS(solve_wells(p, tiny), DataError);
}

TEST_CASE("spectrum wavefunctions are trapezoidal normalized") {
  TransmonParams p;
  p.e_j = 20.0;
  p.eta = 0.276;
  const PhaseGrid g = grid_2pi();
  const Spectrum s = solve_spectrum(build_grid_hamiltonian(p, g), 4, g);
  const double h = g.spacing();
  for (const auto& psi : s.wavefunctions) {
    CHECK(psi.front() == 0.0);
    CHECK(psi.back() == 0.0);
    double norm = 0.0;
    for (double v : psi) norm += v * v * h;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("grid convergence of refined eigenvalues") {
  TransmonParams p;
  p.e_j = 20.0;
  p.eta = 0.276;
  PhaseGrid fine = grid_2pi();
  fine.n_points = 4001;
  const Spectrum coarse =
      solve_spectrum(build_grid_hamiltonian(p, grid_2pi()), 5, grid_2pi());
  const Spectrum dense = solve_spectrum(build_grid_hamiltonian(p, fine), 5, fine);
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(dense.energies[i] - coarse.energies[i]) < 1e-6);
  }
}

TEST_CASE("parity of single-well states at eta = 0") {
  TransmonParams p;
  p.e_j = 50.0;
  const PhaseGrid g = grid_single_well();
  const Spectrum s = solve_spectrum(build_grid_hamiltonian(p, g), 3, g);
  const double h = g.spacing();

  // Ground state: even, <phi> = 0.
  const auto& psi0 = s.wavefunctions[0];
  double mean_phi = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i) {
    mean_phi += g.point(i) * psi0[i] * psi0[i] * h;
  }
  CHECK(std::abs(mean_phi) < 1e-8);
  for (std::size_t i = 0; i < g.n_points; ++i) {
    CHECK(std::abs(psi0[i] - psi0[g.n_points - 1 - i]) < 1e-6);
  }
  // First excited state: odd.
  const auto& psi1 = s.wavefunctions[1];
  for (std::size_t i = 0; i < g.n_points; ++i) {
    CHECK(std::abs(psi1[i] + psi1[g.n_points - 1 - i]) < 1e-6);
  }
}

TEST_CASE("qubit frequencies in the symmetric transmon limit") {
  TransmonParams p;
  p.e_j = 50.0;
  const PhaseGrid g = grid_single_well();
  const Spectrum s = solve_spectrum(build_grid_hamiltonian(p, g), 3, g);
  const QubitFrequencies f = qubit_frequencies(s.energies);
  CHECK(f.omega01 == doctest::Approx(std::sqrt(8.0 * 50.0) - 1.0).epsilon(0.02));
  CHECK(f.anharmonicity == doctest::Approx(-1.0).epsilon(0.15));
}

TEST_CASE("qubit frequencies handle degenerate input") {
  const QubitFrequencies f = qubit_frequencies({2.0, 2.0, 2.0});
  CHECK(f.omega01 == 0.0);
  CHECK(f.omega12 == 0.0);
  CHECK(f.anharmonicity == 0.0);
  CHECK_THROWS_AS(qubit_frequencies({1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("taylor coefficients match finite-difference derivatives") {
  const double h = 0.05;
  for (double eta : {0.0, 0.276, 0.5}) {
    const PotentialTaylor c = cpr_potential_taylor(eta);
    const PotentialDerivatives d = fd_derivatives_at_zero(eta, h);
    CHECK(std::abs(c.c2 - d.d2 / 2.0) < 1e-6);
    CHECK(std::abs(c.c3 - d.d3 / 6.0) < 1e-6);
    CHECK(std::abs(c.c4 - d.d4 / 24.0) < 1e-6);
  }
  const PotentialTaylor c = cpr_potential_taylor(0.276);
  CHECK(c.c2 == doctest::Approx(0.48058).epsilon(1e-4));
  CHECK(c.c3 == doctest::Approx(0.04600).epsilon(1e-4));
  CHECK(c.c4 == doctest::Approx(-0.04005).epsilon(1e-4));
  CHECK(cpr_potential_taylor(0.0).c3 == 0.0);
}

TEST_CASE("phase and number operators satisfy the canonical commutator") {
  TransmonParams p;
  p.e_j = 20.0;
  p.eta = 0.276;
  const int n_fock = 40;
  const Eigen::MatrixXcd phi = phase_operator(p, n_fock);
  const Eigen::MatrixXcd num = number_operator(p, n_fock);
  const Eigen::MatrixXcd comm = phi * num - num * phi;
  const Eigen::MatrixXcd expect =
      std::complex<double>(0.0, 1.0) *
      Eigen::MatrixXcd::Identity(n_fock, n_fock);
  // Truncation corrupts the last two basis rows only.
  const int m = n_fock - 2;
  CHECK((comm.topLeftCorner(m, m) - expect.topLeftCorner(m, m))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
}

TEST_CASE("truncated hamiltonian is hermitian, also with a charge offset") {
  for (double n_g : {0.0, 0.3}) {
    TransmonParams p;
    p.e_j = 20.0;
    p.eta = 0.276;
    p.n_g = n_g;
    const Eigen::MatrixXcd h = build_truncated_hamiltonian(p, 60);
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("charge offset enters the truncated spectrum") {
  TransmonParams a;
  a.e_j = 20.0;
  a.eta = 0.276;
  TransmonParams b = a;
  b.n_g = 0.5;
  const TruncatedSpectrum sa = solve_truncated(a, 60);
  const TruncatedSpectrum sb = solve_truncated(b, 60);
  REQUIRE(!sa.physical_energies.empty());
  REQUIRE(!sb.physical_energies.empty());
  CHECK(std::abs(sa.physical_energies[0] - sb.physical_energies[0]) > 1e-6);
}

TEST_CASE("truncated hamiltonian input validation") {
  TransmonParams p;
  p.e_j = 20.0;
  CHECK_THROWS_AS(build_truncated_hamiltonian(p, 8), std::invalid_argument);
}

TEST_CASE("truncated well levels are basis-size stable") {
  // The quartic truncation is unbounded below, so the well levels are
  // narrow resonances; their basis-size stability is limited by the
  // resonance width rather than machine precision. Deep wells (E_J/E_C=50)
  // are stable to ~1e-5, the shallower E_J/E_C=20 well to ~1e-2.
  {
    TransmonParams p;
    p.e_j = 50.0;
    const TruncatedSpectrum t60 = solve_truncated(p, 60);
    const TruncatedSpectrum t120 = solve_truncated(p, 120);
    REQUIRE(t60.physical_energies.size() >= 3);
    REQUIRE(t120.physical_energies.size() >= 3);
    CHECK(std::abs(t120.physical_energies[0] - t60.physical_energies[0]) < 1e-5);
    CHECK(std::abs(t120.physical_energies[1] - t60.physical_energies[1]) < 1e-3);
  }
  {
    TransmonParams p;
    p.e_j = 20.0;
    p.eta = 0.276;
    const TruncatedSpectrum t60 = solve_truncated(p, 60);
    const TruncatedSpectrum t120 = solve_truncated(p, 120);
    REQUIRE(t60.physical_energies.size() == 2);
    REQUIRE(t120.physical_energies.size() == 2);
    CHECK(std::abs(t120.physical_energies[0] - t60.physical_energies[0]) < 1e-2);
  }
}

TEST_CASE("raw truncated spectrum dives far below the well (spill states)") {
  TransmonParams p;
  p.e_j = 20.0;
  p.eta = 0.276;
  const TruncatedSpectrum t = solve_truncated(p, 60);
  CHECK(t.raw_energies.front() < -100.0);
  CHECK(t.physical_energies.front() > 0.0);
  CHECK(t.physical_energies.back() < t.barrier_energy);
}

TEST_CASE("grid and truncated qubit frequencies agree within 5%") {
  struct Case {
    double e_j, eta;
  };
  for (const Case& c : {Case{20.0, 0.276}, Case{50.0, 0.276}}) {
    TransmonParams p;
    p.e_j = c.e_j;
    p.eta = c.eta;
    const WellResult res = solve_wells(p, grid_2pi());
    REQUIRE(res.analysis.bound_state_indices.size() >= 2);
    const double grid_w01 =
        res.spectrum.energies[res.analysis.bound_state_indices[1]] -
        res.spectrum.energies[res.analysis.bound_state_indices[0]];
    const TruncatedSpectrum t = solve_truncated(p, 60);
    REQUIRE(t.physical_energies.size() >= 2);
    const double trunc_w01 = t.physical_energies[1] - t.physical_energies[0];
    CHECK(trunc_w01 == doctest::Approx(grid_w01).epsilon(0.05));
  }
  for (double e_j : {20.0, 50.0}) {
    TransmonParams p;
    p.e_j = e_j;
    const PhaseGrid g = grid_single_well();
    const Spectrum s = solve_spectrum(build_grid_hamiltonian(p, g), 2, g);
    const TruncatedSpectrum t = solve_truncated(p, 60);
    REQUIRE(t.physical_energies.size() >= 2);
    const double trunc_w01 = t.physical_energies[1] - t.physical_energies[0];
    CHECK(trunc_w01 ==
          doctest::Approx(s.energies[1] - s.energies[0]).epsilon(0.05));
  }
}

TEST_CASE("two-level sweep window brackets the operating point") {
  const std::vector<double> etas = {0.10, 0.15, 0.22, 0.276, 0.32, 0.40, 0.50};
  const TwoLevelSweep sweep = sweep_two_level_window(20.0, etas, grid_2pi());
  REQUIRE(sweep.bound_counts.size() == etas.size());
  CHECK(sweep.bound_counts.front() == 3);
  CHECK(sweep.bound_counts.back() == 1);
  bool found = false;
  for (const EtaInterval& w : sweep.two_level_windows) {
    if (w.lo <= 0.276 && 0.276 <= w.hi) {
      found = true;
      CHECK(w.lo > 0.10);
      CHECK(w.hi < 0.50);
    }
  }
  CHECK(found);
  // Counts never increase with eta.
  for (std::size_t i = 1; i < sweep.bound_counts.size(); ++i) {
    CHECK(sweep.bound_counts[i] <= sweep.bound_counts[i - 1]);
  }
}

TEST_CASE("sweep is thread-count independent") {
  const std::vector<double> etas = {0.15, 0.22, 0.276, 0.32, 0.40};
  const TwoLevelSweep serial = sweep_two_level_window(20.0, etas, grid_2pi(), 1);
  const TwoLevelSweep parallel =
      sweep_two_level_window(20.0, etas, grid_2pi(), 3);
  REQUIRE(serial.bound_counts.size() == parallel.bound_counts.size());
  for (std::size_t i = 0; i < serial.bound_counts.size(); ++i) {
    CHECK(serial.bound_counts[i] == parallel.bound_counts[i]);
  }
  REQUIRE(serial.two_level_windows.size() == parallel.two_level_windows.size());
}

TEST_CASE("sweep validates its grid") {
  CHECK_THROWS_AS(sweep_two_level_window(20.0, {0.3, 0.2}, grid_2pi()),
                  std::invalid_argument);
  CHECK_THROWS_AS(sweep_two_level_window(20.0, {0.0, 0.2}, grid_2pi()),
                  std::domain_error);
  CHECK_THROWS_AS(sweep_two_level_window(20.0, {}, grid_2pi()),
                  std::invalid_argument);
}
