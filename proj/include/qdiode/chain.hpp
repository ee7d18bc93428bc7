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

#ifndef QDIODE_CHAIN_HPP
#define QDIODE_CHAIN_HPP

#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace qdiode {

// Chain of two-level qubits coupled through nonreciprocal junctions,
// restricted to the single-excitation sector (state dimension = n_qubits).
// Hopping is directional: amplitude g*(1+eta) along the chain and g*(1-eta)
// against it, which reduces to plain exchange coupling at eta = 0.
// Units: hbar = 1, time in ns, rates in rad/ns (2*pi*GHz).
struct ChainConfig {
  int n_qubits = 3;
  double coupling_g = 0.05 * 2.0 * std::numbers::pi;  // two-site swap ~5 ns
  double eta = 0.0;
  double qubit_frequency = 5.0 * 2.0 * std::numbers::pi;
};

void validate(const ChainConfig& config);

// Quasi-static noise model: E_J jitter and charge noise enter as on-site
// frequency shifts (in units of g), phase noise jitters the junction phase
// and with it the link asymmetry, dissipation is a uniform excitation-loss
// rate (in units of g), measurement uncertainty is additive on the final
// fidelity. One parameter draw per trajectory.
struct NoiseConfig {
  double ej_fluctuation = 0.5;
  double charge_noise = 0.03;
  double phase_noise = 0.02;
  double dissipation_rate = 0.01;
  double measurement_uncertainty = 0.002;
  int n_trajectories = 100;
  std::uint64_t seed = 0x51ab1eULL;
};

void validate(const NoiseConfig& noise);

/// Directional hopping amplitudes (forward, backward) = g*(1 +/- eta).
/// Accepts |eta| <= 1 so the perfect-diode limit can be probed.
std::pair<double, double> hopping_amplitudes(double g, double eta);

// Single-excitation evolution generator. The uniform qubit frequency only
// contributes a global phase and is gauged out of the diagonal; uniform
// excitation loss factorizes exactly as exp(-decay_rate*t) and is kept as
// a scalar rather than folded into the matrix.
struct ChainGenerator {
  std::vector<double> onsite;    // per-site detuning, rad/ns (0 noiseless)
  std::vector<double> hop_fwd;   // site l -> l+1 amplitude, length n-1
  std::vector<double> hop_bwd;   // site l+1 -> l amplitude, length n-1
  double decay_rate = 0.0;       // uniform excitation loss, 1/ns

  int size() const { return static_cast<int>(onsite.size()); }
  bool hermitian(double tol = 1e-12) const;
};

ChainGenerator build_chain_generator(const ChainConfig& config);

/// Per-trajectory quasi-static parameter draw.
struct NoiseDraw {
  std::vector<double> onsite_shift;  // rad/ns
  std::vector<double> link_phase;    // rad, one per junction
};

class RngStream;
NoiseDraw draw_noise(const ChainConfig& config, const NoiseConfig& noise,
                     RngStream& rng);

ChainGenerator build_chain_generator(const ChainConfig& config,
                                     const NoiseConfig& noise,
                                     const NoiseDraw& draw);

using State = std::vector<std::complex<double>>;

/// |<psi|phi>|^2 for normalized states; throws on dimension mismatch or
/// unnormalized input (tolerance 1e-10 on the norm).
double state_fidelity(const State& psi, const State& phi);

struct EvolveOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  std::size_t max_steps = 10'000'000;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double min_step = 0.0;
};

struct EvolveResult {
  State state;  // renormalized at readout
  double raw_norm = 1.0;  // norm before readout renormalization
  StepStats stats;
};

/// Propagates d psi/dt = -i H psi by adaptive Dormand-Prince RK45 and
/// renormalizes at readout. Throws ConvergenceError (with step statistics)
/// if the controller stalls.
EvolveResult evolve(const State& initial, const ChainGenerator& generator,
                    double t_ns, const EvolveOptions& opts = {});

/// Same integration recording the renormalized state at each requested time
/// (ascending, first may be 0).
std::vector<State> evolve_record(const State& initial,
                                 const ChainGenerator& generator,
                                 const std::vector<double>& times,
                                 StepStats* stats = nullptr,
                                 const EvolveOptions& opts = {});

enum class Direction { forward, reverse };

/// Excitation-transfer fidelity: forward sends site 0 -> site n-1, reverse
/// the opposite. With noise: trajectory average of survival-weighted
/// fidelities plus additive measurement noise, clamped to [0, 1].
double transfer_fidelity(const ChainConfig& config, Direction direction,
                         double t_ns,
                         const std::optional<NoiseConfig>& noise = {});

struct FidelityMap {
  std::vector<double> eta_axis;
  std::vector<double> time_axis;
  // Row-major n_eta x n_time.
  std::vector<double> forward;
  std::vector<double> reverse;
  std::vector<double> difference;
  std::vector<double> difference_se;  // trajectory standard error (0 noiseless)
  bool noise_applied = false;

  std::size_t index(std::size_t i_eta, std::size_t i_time) const {
    return i_eta * time_axis.size() + i_time;
  }
};

/// Fills the forward/reverse/difference maps over (eta, time). config.eta is
/// overridden row by row; deterministic for a fixed noise seed regardless of
/// n_threads.
FidelityMap fidelity_map(const ChainConfig& config,
                         const std::vector<double>& eta_grid,
                         const std::vector<double>& t_grid,
                         const std::optional<NoiseConfig>& noise = {},
                         int n_threads = 1);

struct PeakCell {
  double value = 0.0;
  std::size_t eta_index = 0;
  std::size_t time_index = 0;
};

PeakCell peak_difference(const FidelityMap& map);

struct EtaRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Maximal eta intervals where max over t of (forward - reverse) >= threshold.
std::vector<EtaRange> asymmetry_regions(const FidelityMap& map, double threshold);

}  // namespace qdiode

#endif  // QDIODE_CHAIN_HPP
