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

#ifndef QDIODE_TRANSMON_HPP
#define QDIODE_TRANSMON_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "qdiode/tridiagonal.hpp"

namespace qdiode {

// Circuit energies in units of E_C (e_c = 1 internally); convert to GHz at
// the I/O boundary only. eta is the junction diode efficiency fraction.
struct TransmonParams {
  double e_j = 20.0;
  double e_c = 1.0;
  double n_g = 0.0;
  double eta = 0.0;

  /// The charge-insensitive regime needs e_j/e_c >~ 10; below that the
  /// perturbative frequency formulas degrade (callers may warn).
  bool in_transmon_regime() const { return e_j / e_c >= 10.0; }
};

void validate(const TransmonParams& params);

/// Uniform phase grid with hard-wall (Dirichlet) boundaries at both ends.
struct PhaseGrid {
  double phi_min = -2.0 * std::numbers::pi;
  double phi_max = 2.0 * std::numbers::pi;
  std::size_t n_points = 2001;  // odd, >= 3; counts both wall points

  double spacing() const { return (phi_max - phi_min) / double(n_points - 1); }
  double point(std::size_t i) const { return phi_min + double(i) * spacing(); }
  std::size_t interior_size() const { return n_points - 2; }
};

void validate(const PhaseGrid& grid);

// Grid Hamiltonian H = -4*E_C d^2/dphi^2 + E_J*U(phi), three-point kinetic
// stencil over the interior points (walls carry psi = 0). On the open grid
// n_g amounts to a phase redefinition of the wavefunction and is gauged to
// zero; it is honored in the oscillator-basis Hamiltonian below.
TridiagonalMatrix build_grid_hamiltonian(const TransmonParams& params,
                                         const PhaseGrid& grid);

/// Extension hook: same discretization with an arbitrary potential (already
/// scaled to energy units), e.g. for pure-oscillator checks or other CPRs.
TridiagonalMatrix build_grid_hamiltonian(
    double e_c, const std::function<double(double)>& potential,
    const PhaseGrid& grid);

struct Spectrum {
  std::vector<double> energies;                  // ascending, units E_C
  std::vector<std::vector<double>> wavefunctions;  // full grid incl. walls
  PhaseGrid grid;
};

struct SolveOptions {
  // Refine eigenvalues by Richardson extrapolation against the stride-2
  // coarse grid; removes the O(h^2) stencil bias at no accuracy risk.
  bool richardson = true;
  std::uint64_t seed = 0x7d1a6u;
};

/// k lowest eigenpairs of the grid Hamiltonian. Wavefunctions are reported
/// on the full grid (zeros at the walls), trapezoidal-normalized, first
/// appreciable component positive.
Spectrum solve_spectrum(const TridiagonalMatrix& h_matrix, std::size_t k,
                        const PhaseGrid& grid, const SolveOptions& opts = {});

struct WellAnalysis {
  double well_left = 0.0;    // phase of the left flanking maximum
  double well_right = 0.0;   // phase of the right flanking maximum
  double well_min_phi = 0.0; // phase of the central minimum
  double barrier_energy = 0.0;  // min of the two flanking maxima, units E_C
  std::vector<std::size_t> bound_state_indices;
  std::vector<double> well_weights;  // in-well probability per spectrum state
};

// Locates the central well of E_J*U(phi) and classifies bound states:
// energy below the lower flanking barrier and >= 90% probability weight
// inside [well_left, well_right]. Throws DataError when the grid contains
// no interior minimum near phi = 0.
WellAnalysis analyze_wells(const TransmonParams& params, const PhaseGrid& grid,
                           const Spectrum& spectrum);

struct WellResult {
  Spectrum spectrum;
  WellAnalysis analysis;
};

/// Convenience driver: assembles the Hamiltonian, solves every state below
/// the barrier (plus a few above), and classifies the well content.
WellResult solve_wells(const TransmonParams& params, const PhaseGrid& grid = {},
                       std::size_t extra_states = 3,
                       const SolveOptions& opts = {});

struct QubitFrequencies {
  double omega01 = 0.0;
  double omega12 = 0.0;
  double anharmonicity = 0.0;
};

/// Frequencies from the three lowest supplied energies (hbar = 1).
QubitFrequencies qubit_frequencies(const std::vector<double>& energies);

/// Taylor coefficients of the junction potential U(phi) about phi = 0:
/// U ~ const + c2 phi^2 + c3 phi^3 + c4 phi^4.
struct PotentialTaylor {
  double c2 = 0.0, c3 = 0.0, c4 = 0.0;
};
PotentialTaylor cpr_potential_taylor(double eta);

/// Phase operator (2E_C/E_J)^(1/4) (a^dag + a) in the n_fock number basis.
Eigen::MatrixXcd phase_operator(const TransmonParams& params, int n_fock);

/// Number operator (i/2)(E_J/2E_C)^(1/4) (a^dag - a).
Eigen::MatrixXcd number_operator(const TransmonParams& params, int n_fock);

/// Oscillator-basis Hamiltonian with the potential truncated at quartic
/// order; keeps (n - n_g)^2 literally. Hermitian by construction.
Eigen::MatrixXcd build_truncated_hamiltonian(const TransmonParams& params,
                                             int n_fock);

// The quartic coefficient is negative, so the truncated potential is
// unbounded below: large Fock bases develop non-physical eigenstates far
// outside the well. physical_energies keeps only well-localized levels
// (energy between the well bottom and the barrier, <phi^2> inside the
// barrier, negligible top-of-basis occupancy).
struct TruncatedSpectrum {
  std::vector<double> physical_energies;  // ascending
  std::vector<double> raw_energies;       // everything the solver returned
  double barrier_energy = 0.0;            // quartic-model barrier, units E_C
  int n_fock = 0;
};

TruncatedSpectrum solve_truncated(const TransmonParams& params, int n_fock);

struct EtaInterval {
  double lo = 0.0;
  double hi = 0.0;
};

struct TwoLevelSweep {
  std::vector<double> etas;
  std::vector<int> bound_counts;
  std::vector<EtaInterval> two_level_windows;  // maximal runs of count == 2
};

/// Bound-state count per eta at fixed E_J/E_C; eta_grid ascending in (0, 1).
/// Grid points are independent work items; results are identical for any
/// n_threads.
TwoLevelSweep sweep_two_level_window(double e_j_over_e_c,
                                     const std::vector<double>& eta_grid,
                                     const PhaseGrid& grid = {},
                                     int n_threads = 1);

}  // namespace qdiode

#endif  // QDIODE_TRANSMON_HPP
