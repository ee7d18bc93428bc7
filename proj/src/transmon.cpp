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

#include "qdiode/transmon.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "qdiode/cpr.hpp"
#include "qdiode/errors.hpp"

namespace qdiode {

namespace {

using complexd = std::complex<double>;

struct WellGeometry {
  double left, right, min_phi, barrier;
};

// Parabolic vertex through three equispaced samples; offset clamped to the
// bracketing cell.
double refine_extremum(double phi_mid, double h, double pm, double p0, double pp,
                       double* value) {
  const double denom = pp - 2.0 * p0 + pm;
  double offset = 0.0;
  if (denom != 0.0) offset = 0.5 * h * (pm - pp) / denom;
  offset = std::clamp(offset, -h, h);
  // Quadratic model value at the vertex.
  const double d1 = (pp - pm) / (2.0 * h);
  const double d2 = denom / (h * h);
  *value = p0 + d1 * offset + 0.5 * d2 * offset * offset;
  return phi_mid + offset;
}

WellGeometry locate_central_well(const TransmonParams& params,
                                 const PhaseGrid& grid) {
  const DiodeCPR cpr{params.eta, 1.0};
  const std::size_t n = grid.n_points;
  std::vector<double> pot(n);
  for (std::size_t i = 0; i < n; ++i) {
    pot[i] = params.e_j * cpr_potential(cpr, grid.point(i));
  }

  // Interior sample-level minimum nearest phi = 0.
  std::size_t i_min = 0;
  bool found = false;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (pot[i] < pot[i - 1] && pot[i] <= pot[i + 1]) {
      if (!found || std::abs(grid.point(i)) < std::abs(grid.point(i_min))) {
        i_min = i;
        found = true;
      }
    }
  }
  if (!found) {
    throw DataError("no central well: potential has no interior local minimum");
  }

  auto find_flank = [&](std::size_t start, int step) -> std::size_t {
    for (std::size_t i = start; i >= 1 && i + 1 < n;
         i = static_cast<std::size_t>(static_cast<long>(i) + step)) {
      if (pot[i] > pot[i - 1] && pot[i] >= pot[i + 1]) return i;
    }
    throw DataError("no central well: missing flanking barrier inside the grid");
  };
  const std::size_t i_left = find_flank(i_min - 1, -1);
  const std::size_t i_right = find_flank(i_min + 1, +1);

  const double h = grid.spacing();
  WellGeometry geo{};
  double v_left, v_right, v_min;
  geo.left = refine_extremum(grid.point(i_left), h, pot[i_left - 1], pot[i_left],
                             pot[i_left + 1], &v_left);
  geo.right = refine_extremum(grid.point(i_right), h, pot[i_right - 1],
                              pot[i_right], pot[i_right + 1], &v_right);
  geo.min_phi = refine_extremum(grid.point(i_min), h, pot[i_min - 1], pot[i_min],
                                pot[i_min + 1], &v_min);
  geo.barrier = std::min(v_left, v_right);
  return geo;
}

}  // namespace

void validate(const TransmonParams& params) {
  if (!(params.e_j > 0.0) || !std::isfinite(params.e_j)) {
    throw std::invalid_argument("TransmonParams: e_j must be finite and > 0");
  }
  if (!(params.e_c > 0.0) || !std::isfinite(params.e_c)) {
    throw std::invalid_argument("TransmonParams: e_c must be finite and > 0");
  }
  if (!std::isfinite(params.n_g)) {
    throw std::invalid_argument("TransmonParams: n_g must be finite");
  }
  if (!(std::abs(params.eta) < 1.0)) {
    throw std::domain_error("TransmonParams: |eta| must be < 1");
  }
}

void validate(const PhaseGrid& grid) {
  if (grid.n_points < 3 || grid.n_points % 2 == 0) {
    throw std::invalid_argument("PhaseGrid: n_points must be odd and >= 3");
  }
  if (!(grid.phi_min < 0.0 && 0.0 < grid.phi_max)) {
    throw std::invalid_argument("PhaseGrid: need phi_min < 0 < phi_max");
  }
  if (!std::isfinite(grid.phi_min) || !std::isfinite(grid.phi_max)) {
    throw std::invalid_argument("PhaseGrid: non-finite bounds");
  }
}

TridiagonalMatrix build_grid_hamiltonian(const TransmonParams& params,
                                         const PhaseGrid& grid) {
  validate(params);
  const DiodeCPR cpr{params.eta, 1.0};
  const double e_j = params.e_j;
  return build_grid_hamiltonian(
      params.e_c,
      [&cpr, e_j](double phi) { return e_j * cpr_potential(cpr, phi); }, grid);
}

TridiagonalMatrix build_grid_hamiltonian(
    double e_c, const std::function<double(double)>& potential,
    const PhaseGrid& grid) {
  validate(grid);
  if (!(e_c > 0.0) || !std::isfinite(e_c)) {
    throw std::invalid_argument("build_grid_hamiltonian: bad e_c");
  }
  const double h = grid.spacing();
  const double kin = 4.0 * e_c / (h * h);
  const std::size_t m = grid.interior_size();

  TridiagonalMatrix t;
  t.diag.resize(m);
  t.off.assign(m - 1, -kin);
  for (std::size_t i = 0; i < m; ++i) {
    const double v = potential(grid.point(i + 1));
    if (!std::isfinite(v)) {
      throw std::invalid_argument("build_grid_hamiltonian: non-finite potential");
    }
    t.diag[i] = 2.0 * kin + v;
  }
  return t;
}

Spectrum solve_spectrum(const TridiagonalMatrix& h_matrix, std::size_t k,
                        const PhaseGrid& grid, const SolveOptions& opts) {
  validate(grid);
  if (h_matrix.size() != grid.interior_size()) {
    throw std::invalid_argument("solve_spectrum: matrix does not match grid");
  }
  if (k == 0 || k > h_matrix.size()) {
    throw std::invalid_argument("solve_spectrum: need 1 <= k <= dimension");
  }

  TridiagonalEigen eig = lowest_eigenpairs(h_matrix, k, opts.seed);

  // Richardson refinement: the three-point stencil carries an O(h^2)
  // eigenvalue bias. Re-solving on the stride-2 subgrid (reconstructable
  // from the matrix itself when the off-diagonal is uniform) and
  // extrapolating cancels it.
  bool uniform = true;
  for (double e : h_matrix.off) {
    if (std::abs(e - h_matrix.off[0]) >
        1e-12 * std::max(1.0, std::abs(h_matrix.off[0]))) {
      uniform = false;
      break;
    }
  }
  const std::size_t m = h_matrix.size();
  const std::size_t m_coarse = (m >= 3) ? (m - 1) / 2 : 0;
  if (opts.richardson && uniform && m_coarse >= k) {
    const double kin = -h_matrix.off[0];
    TridiagonalMatrix coarse;
    coarse.diag.resize(m_coarse);
    coarse.off.assign(m_coarse - 1, -kin / 4.0);
    for (std::size_t j = 0; j < m_coarse; ++j) {
      const double v = h_matrix.diag[2 * j + 1] - 2.0 * kin;
      coarse.diag[j] = v + 2.0 * kin / 4.0;
    }
    const std::vector<double> coarse_vals = lowest_eigenvalues(coarse, k);
    for (std::size_t i = 0; i < k; ++i) {
      eig.values[i] += (eig.values[i] - coarse_vals[i]) / 3.0;
    }
  }

  Spectrum spec;
  spec.grid = grid;
  spec.energies = std::move(eig.values);
  spec.wavefunctions.resize(k);
  const double inv_sqrt_h = 1.0 / std::sqrt(grid.spacing());
  for (std::size_t j = 0; j < k; ++j) {
    auto& w = spec.wavefunctions[j];
    w.assign(grid.n_points, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      w[i + 1] = eig.vectors[j][i] * inv_sqrt_h;
    }
  }
  return spec;
}

WellAnalysis analyze_wells(const TransmonParams& params, const PhaseGrid& grid,
                           const Spectrum& spectrum) {
  validate(params);
  validate(grid);
  if (spectrum.grid.n_points != grid.n_points ||
      spectrum.grid.phi_min != grid.phi_min ||
      spectrum.grid.phi_max != grid.phi_max) {
    throw std::invalid_argument("analyze_wells: spectrum computed on another grid");
  }

  const WellGeometry geo = locate_central_well(params, grid);
  WellAnalysis out;
  out.well_left = geo.left;
  out.well_right = geo.right;
  out.well_min_phi = geo.min_phi;
  out.barrier_energy = geo.barrier;

  const double h = grid.spacing();
  const std::size_t n_states = spectrum.energies.size();
  out.well_weights.resize(n_states);
  for (std::size_t s = 0; s < n_states; ++s) {
    const auto& psi = spectrum.wavefunctions[s];
    double w = 0.0;
    for (std::size_t i = 0; i < grid.n_points; ++i) {
      const double phi = grid.point(i);
      if (phi >= geo.left && phi <= geo.right) w += psi[i] * psi[i] * h;
    }
    out.well_weights[s] = w;
  }

  // Bound: below the barrier with >= 90% weight in the well. When the tilt
  // accidentally aligns neighbor-well levels with a central one, the
  // eigenstates hybridize and share the central weight across a
  // near-degenerate cluster; the cluster then carries round(total weight)
  // well levels, attributed to its dominant members.
  const double gap_tol =
      0.3 * std::sqrt(8.0 * params.e_j * params.e_c);  // ~harmonic spacing/3
  std::vector<std::size_t> below;
  for (std::size_t s = 0; s < n_states; ++s) {
    if (spectrum.energies[s] < geo.barrier) below.push_back(s);
  }
  for (std::size_t c = 0; c < below.size();) {
    std::size_t end = c;
    while (end + 1 < below.size() &&
           below[end + 1] == below[end] + 1 &&
           spectrum.energies[below[end + 1]] -
                   spectrum.energies[below[end]] < gap_tol) {
      ++end;
    }
    double total = 0.0;
    std::vector<std::size_t> members;
    for (std::size_t k = c; k <= end; ++k) {
      total += out.well_weights[below[k]];
      members.push_back(below[k]);
    }
    // Isolated states use the plain 90% rule; only genuine hybridized
    // clusters fall back to total-occupancy rounding.
    int quota;
    if (members.size() == 1) {
      quota = out.well_weights[members.front()] >= 0.90 ? 1 : 0;
    } else {
      quota = static_cast<int>(std::lround(total));
    }
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return out.well_weights[a] > out.well_weights[b];
    });
    for (std::size_t m : members) {
      if (quota <= 0) break;
      if (out.well_weights[m] < 0.05) break;  // never tag a pure outside state
      out.bound_state_indices.push_back(m);
      --quota;
    }
    c = end + 1;
  }
  std::sort(out.bound_state_indices.begin(), out.bound_state_indices.end());
  return out;
}

WellResult solve_wells(const TransmonParams& params, const PhaseGrid& grid,
                       std::size_t extra_states, const SolveOptions& opts) {
  validate(params);
  validate(grid);
  const WellGeometry geo = locate_central_well(params, grid);
  const TridiagonalMatrix h = build_grid_hamiltonian(params, grid);
  const int below = eigenvalue_count_below(h, geo.barrier);
  std::size_t k = static_cast<std::size_t>(std::max(below, 1)) + extra_states;
  k = std::min(k, h.size());

  WellResult res;
  res.spectrum = solve_spectrum(h, k, grid, opts);
  res.analysis = analyze_wells(params, grid, res.spectrum);
  return res;
}

QubitFrequencies qubit_frequencies(const std::vector<double>& energies) {
  if (energies.size() < 3) {
    throw std::invalid_argument("qubit_frequencies: need at least 3 energies");
  }
  QubitFrequencies f;
  f.omega01 = energies[1] - energies[0];
  f.omega12 = energies[2] - energies[1];
  f.anharmonicity = f.omega12 - f.omega01;
  return f;
}

PotentialTaylor cpr_potential_taylor(double eta) {
  if (!(std::abs(eta) < 1.0)) {
    throw std::domain_error("cpr_potential_taylor: |eta| must be < 1");
  }
  const double s = std::sqrt(1.0 - eta * eta);
  return {0.5 * s, eta / 6.0, -s / 24.0};
}

Eigen::MatrixXcd phase_operator(const TransmonParams& params, int n_fock) {
  validate(params);
  const double zpf = std::pow(2.0 * params.e_c / params.e_j, 0.25);
  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(n_fock, n_fock);
  for (int m = 0; m + 1 < n_fock; ++m) {
    const double v = zpf * std::sqrt(double(m + 1));
    phi(m, m + 1) = v;
    phi(m + 1, m) = v;
  }
  return phi;
}

Eigen::MatrixXcd number_operator(const TransmonParams& params, int n_fock) {
  validate(params);
  const double zpf = 0.5 * std::pow(params.e_j / (2.0 * params.e_c), 0.25);
  Eigen::MatrixXcd n_op = Eigen::MatrixXcd::Zero(n_fock, n_fock);
  for (int m = 0; m + 1 < n_fock; ++m) {
    const double v = zpf * std::sqrt(double(m + 1));
    n_op(m, m + 1) = complexd(0.0, -v);
    n_op(m + 1, m) = complexd(0.0, v);
  }
  return n_op;
}

Eigen::MatrixXcd build_truncated_hamiltonian(const TransmonParams& params,
                                             int n_fock) {
  validate(params);
  if (n_fock < 10) {
    throw std::invalid_argument("build_truncated_hamiltonian: n_fock must be >= 10");
  }
  const PotentialTaylor c = cpr_potential_taylor(params.eta);
  const Eigen::MatrixXcd phi = phase_operator(params, n_fock);
  const Eigen::MatrixXcd n_op = number_operator(params, n_fock);
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n_fock, n_fock);

  const Eigen::MatrixXcd n_shift = n_op - params.n_g * eye;
  const Eigen::MatrixXcd phi2 = phi * phi;
  const Eigen::MatrixXcd phi3 = phi2 * phi;
  const Eigen::MatrixXcd phi4 = phi2 * phi2;

  Eigen::MatrixXcd h = 4.0 * params.e_c * (n_shift * n_shift) +
                       params.e_j * (c.c2 * phi2 + c.c3 * phi3 + c.c4 * phi4);
  // Matrix products pick up ~eps asymmetry; pin Hermiticity exactly.
  h = 0.5 * (h + h.adjoint()).eval();
  return h;
}

TruncatedSpectrum solve_truncated(const TransmonParams& params, int n_fock) {
  const Eigen::MatrixXcd h = build_truncated_hamiltonian(params, n_fock);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("solve_truncated: dense eigensolver failed");
  }

  const PotentialTaylor c = cpr_potential_taylor(params.eta);
  // Stationary points of the quartic model away from phi = 0:
  // 4 c4 phi^2 + 3 c3 phi + 2 c2 = 0 (c4 < 0 makes both maxima).
  const double disc = 9.0 * c.c3 * c.c3 - 32.0 * c.c4 * c.c2;
  const double root = std::sqrt(disc);
  const double phi_a = (-3.0 * c.c3 + root) / (8.0 * c.c4);
  const double phi_b = (-3.0 * c.c3 - root) / (8.0 * c.c4);
  auto vq = [&](double p) {
    return params.e_j * (c.c2 * p * p + c.c3 * p * p * p + c.c4 * p * p * p * p);
  };
  const double barrier = std::min(vq(phi_a), vq(phi_b));
  const double phi_inner2 = std::pow(std::min(std::abs(phi_a), std::abs(phi_b)), 2);

  const Eigen::MatrixXcd phi2 =
      phase_operator(params, n_fock) * phase_operator(params, n_fock);

  TruncatedSpectrum out;
  out.n_fock = n_fock;
  out.barrier_energy = barrier;
  out.raw_energies.assign(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + n_fock);

  // Well states acquire a weak admixture of outside-the-barrier states, so
  // the basis-edge occupancy is small but not zero; the <phi^2> test is the
  // sharp discriminator.
  const int tail_start = (3 * n_fock) / 4;
  for (int j = 0; j < n_fock; ++j) {
    const double e = solver.eigenvalues()(j);
    if (e < -1e-9 * params.e_j || e >= barrier) continue;
    const Eigen::VectorXcd v = solver.eigenvectors().col(j);
    double tail = 0.0;
    for (int q = tail_start; q < n_fock; ++q) tail += std::norm(v(q));
    if (tail > 1e-2) continue;
    const double x2 = std::real(complexd(v.adjoint() * (phi2 * v)));
    if (x2 >= phi_inner2) continue;
    out.physical_energies.push_back(e);
  }
  std::sort(out.physical_energies.begin(), out.physical_energies.end());
  return out;
}

TwoLevelSweep sweep_two_level_window(double e_j_over_e_c,
                                     const std::vector<double>& eta_grid,
                                     const PhaseGrid& grid, int n_threads) {
  if (eta_grid.empty()) {
    throw std::invalid_argument("sweep_two_level_window: empty eta grid");
  }
  for (std::size_t i = 0; i < eta_grid.size(); ++i) {
    if (!(eta_grid[i] > 0.0 && eta_grid[i] < 1.0)) {
      throw std::domain_error("sweep_two_level_window: eta grid must lie in (0, 1)");
    }
    if (i > 0 && eta_grid[i] <= eta_grid[i - 1]) {
      throw std::invalid_argument("sweep_two_level_window: eta grid must ascend");
    }
  }

  TwoLevelSweep sweep;
  sweep.etas = eta_grid;
  sweep.bound_counts.assign(eta_grid.size(), -1);

  auto solve_point = [&](std::size_t i) {
    TransmonParams p;
    p.e_j = e_j_over_e_c;
    p.e_c = 1.0;
    p.eta = eta_grid[i];
    try {
      const WellResult res = solve_wells(p, grid);
      sweep.bound_counts[i] =
          static_cast<int>(res.analysis.bound_state_indices.size());
    } catch (const std::exception& ex) {
      throw ConvergenceError("sweep failed at eta=" +
                             std::to_string(eta_grid[i]) + ": " + ex.what());
    }
  };

  n_threads = std::clamp<int>(n_threads, 1, static_cast<int>(eta_grid.size()));
  if (n_threads == 1) {
    for (std::size_t i = 0; i < eta_grid.size(); ++i) solve_point(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (std::size_t i = static_cast<std::size_t>(w); i < eta_grid.size();
               i += static_cast<std::size_t>(n_threads)) {
            solve_point(i);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }

  for (std::size_t i = 0; i < sweep.bound_counts.size();) {
    if (sweep.bound_counts[i] == 2) {
      std::size_t j = i;
      while (j + 1 < sweep.bound_counts.size() && sweep.bound_counts[j + 1] == 2) {
        ++j;
      }
      sweep.two_level_windows.push_back({eta_grid[i], eta_grid[j]});
      i = j + 1;
    } else {
      ++i;
    }
  }
  return sweep;
}

}  // namespace qdiode
