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

#include "qdiode/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "qdiode/errors.hpp"
#include "qdiode/rng.hpp"

namespace qdiode {

namespace {

using complexd = std::complex<double>;

constexpr std::uint64_t kTagTrajectory = 0x7261aULL;
constexpr std::uint64_t kTagMeasurement = 0x3ea5ULL;

// y = H * psi for the tridiagonal generator. Term order is fixed so that
// mirror-image problems evaluate to mirror-image results bit for bit.
void apply_hamiltonian(const ChainGenerator& g, const State& psi, State& y) {
  const int n = g.size();
  for (int i = 0; i < n; ++i) {
    complexd acc = g.onsite[i] * psi[i];
    if (i > 0) acc += g.hop_fwd[i - 1] * psi[i - 1];
    if (i + 1 < n) acc += g.hop_bwd[i] * psi[i + 1];
    y[i] = acc;
  }
}

// RHS of the Schroedinger equation, f = -i H psi.
void rhs(const ChainGenerator& g, const State& psi, State& f) {
  apply_hamiltonian(g, psi, f);
  for (auto& v : f) v = complexd(v.imag(), -v.real());
}

// Dormand-Prince 5(4) coefficients.
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                 kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                 kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                 kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0,
                 kE4 = 71.0 / 1920.0, kE5 = -17253.0 / 339200.0,
                 kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;

struct Stepper {
  const ChainGenerator& gen;
  EvolveOptions opts;
  State k1, k2, k3, k4, k5, k6, k7, tmp, y_new, err;
  StepStats stats;

  explicit Stepper(const ChainGenerator& g, const EvolveOptions& o)
      : gen(g), opts(o) {
    const std::size_t n = g.onsite.size();
    for (State* s : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &tmp, &y_new, &err}) {
      s->assign(n, complexd(0.0, 0.0));
    }
    stats.min_step = std::numeric_limits<double>::infinity();
  }

  void combine(const State& y, double h, State& out,
               std::initializer_list<std::pair<double, const State*>> terms) {
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < n; ++i) {
      complexd acc = y[i];
      for (const auto& [c, k] : terms) acc += (h * c) * (*k)[i];
      out[i] = acc;
    }
  }

  // One attempted step; returns the error ratio (<= 1 means accept) and
  // fills y_new. k1 must hold f(y) on entry (FSAL).
  double attempt(const State& y, double h) {
    combine(y, h, tmp, {{kA21, &k1}});
    rhs(gen, tmp, k2);
    combine(y, h, tmp, {{kA31, &k1}, {kA32, &k2}});
    rhs(gen, tmp, k3);
    combine(y, h, tmp, {{kA41, &k1}, {kA42, &k2}, {kA43, &k3}});
    rhs(gen, tmp, k4);
    combine(y, h, tmp, {{kA51, &k1}, {kA52, &k2}, {kA53, &k3}, {kA54, &k4}});
    rhs(gen, tmp, k5);
    combine(y, h, tmp,
            {{kA61, &k1}, {kA62, &k2}, {kA63, &k3}, {kA64, &k4}, {kA65, &k5}});
    rhs(gen, tmp, k6);
    combine(y, h, y_new,
            {{kB1, &k1}, {kB3, &k3}, {kB4, &k4}, {kB5, &k5}, {kB6, &k6}});
    rhs(gen, y_new, k7);

    // Infinity-norm error ratio: max-reduction is order-independent, so
    // mirrored problems take identical step sequences. The requested
    // tolerances bound the accumulated error, hence the 10x per-step margin.
    constexpr double kBudget = 0.1;
    double ratio = 0.0;
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < n; ++i) {
      const complexd e = h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] +
                              kE5 * k5[i] + kE6 * k6[i] + kE7 * k7[i]);
      const double scale =
          kBudget * (opts.abs_tol +
                     opts.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i])));
      ratio = std::max(ratio, std::abs(e) / scale);
    }
    return ratio;
  }

  // Integrate y from t=0 through each requested time, invoking on_sample.
  template <typename Callback>
  void run(State& y, const std::vector<double>& times, Callback on_sample) {
    double t = 0.0;
    std::size_t next = 0;
    while (next < times.size() && times[next] <= 0.0) {
      on_sample(next, y);
      ++next;
    }
    if (next >= times.size()) return;

    rhs(gen, y, k1);
    const double t_end = times.back();
    double h = std::min(t_end / 100.0, 0.05);

    while (next < times.size()) {
      if (stats.accepted + stats.rejected > opts.max_steps) {
        throw ConvergenceError(
            "evolve: step budget exhausted (accepted=" +
            std::to_string(stats.accepted) +
            ", rejected=" + std::to_string(stats.rejected) + ")");
      }
      const double target = times[next];
      bool clipped = false;
      double h_try = h;
      if (t + h_try >= target) {
        h_try = target - t;
        clipped = true;
      }
      if (h_try <= t_end * 1e-15) {
        // Step collapsed onto the output point.
        on_sample(next, y);
        ++next;
        continue;
      }

      const double ratio = attempt(y, h_try);
      const double factor =
          (ratio == 0.0) ? 5.0
                         : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
      if (ratio <= 1.0) {
        t = clipped ? target : t + h_try;
        y.swap(y_new);
        k1.swap(k7);  // FSAL
        ++stats.accepted;
        stats.min_step = std::min(stats.min_step, h_try);
        if (clipped) {
          on_sample(next, y);
          ++next;
          // A clipped step says nothing about the natural step size; do not
          // let it shrink the controller estimate.
          h = std::max(h, h_try * factor);
        } else {
          h = h_try * factor;
        }
      } else {
        ++stats.rejected;
        h = h_try * std::min(factor, 0.9);
        if (h < t_end * 1e-14) {
          throw ConvergenceError(
              "evolve: step size underflow at t=" + std::to_string(t) +
              " (accepted=" + std::to_string(stats.accepted) +
              ", rejected=" + std::to_string(stats.rejected) +
              ", h=" + std::to_string(h) + ")");
        }
      }
    }
  }
};

State normalized(const State& y) {
  double n2 = 0.0;
  for (const auto& v : y) n2 += std::norm(v);
  State out = y;
  if (n2 > 0.0) {
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& v : out) v *= inv;
  }
  return out;
}

State basis_state(int n, int site) {
  State s(n, complexd(0.0, 0.0));
  s[site] = complexd(1.0, 0.0);
  return s;
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

struct CellAccumulator {
  double sum_f = 0.0, sum_r = 0.0;
  double sum_d = 0.0, sum_d2 = 0.0;
};

}  // namespace

void validate(const ChainConfig& config) {
  if (config.n_qubits < 2) {
    throw std::invalid_argument("ChainConfig: n_qubits must be >= 2");
  }
  if (!(config.coupling_g > 0.0) || !std::isfinite(config.coupling_g)) {
    throw std::invalid_argument("ChainConfig: coupling_g must be finite and > 0");
  }
  if (!(std::abs(config.eta) < 1.0)) {
    throw std::domain_error("ChainConfig: |eta| must be < 1");
  }
  if (!std::isfinite(config.qubit_frequency)) {
    throw std::invalid_argument("ChainConfig: qubit_frequency must be finite");
  }
}

void validate(const NoiseConfig& noise) {
  const double amps[] = {noise.ej_fluctuation, noise.charge_noise,
                         noise.phase_noise, noise.dissipation_rate,
                         noise.measurement_uncertainty};
  for (double a : amps) {
    if (a < 0.0 || !std::isfinite(a)) {
      throw std::invalid_argument("NoiseConfig: amplitudes must be >= 0");
    }
  }
  if (noise.n_trajectories < 1) {
    throw std::invalid_argument("NoiseConfig: n_trajectories must be >= 1");
  }
}

std::pair<double, double> hopping_amplitudes(double g, double eta) {
  if (!(std::abs(eta) <= 1.0)) {
    throw std::domain_error("hopping_amplitudes: |eta| must be <= 1");
  }
  return {g * (1.0 + eta), g * (1.0 - eta)};
}

bool ChainGenerator::hermitian(double tol) const {
  // The diagonal is real by construction; only the hopping can break it.
  for (std::size_t l = 0; l < hop_fwd.size(); ++l) {
    if (std::abs(hop_fwd[l] - hop_bwd[l]) > tol) return false;
  }
  return true;
}

ChainGenerator build_chain_generator(const ChainConfig& config) {
  validate(config);
  ChainGenerator g;
  g.onsite.assign(config.n_qubits, 0.0);
  const auto [fwd, bwd] = hopping_amplitudes(config.coupling_g, config.eta);
  g.hop_fwd.assign(config.n_qubits - 1, fwd);
  g.hop_bwd.assign(config.n_qubits - 1, bwd);
  g.decay_rate = 0.0;
  return g;
}

NoiseDraw draw_noise(const ChainConfig& config, const NoiseConfig& noise,
                     RngStream& rng) {
  NoiseDraw d;
  d.onsite_shift.resize(config.n_qubits);
  d.link_phase.resize(config.n_qubits - 1);
  // Fixed draw order: E_J shifts, then charge shifts, then link phases.
  for (int i = 0; i < config.n_qubits; ++i) {
    d.onsite_shift[i] = config.coupling_g *
                        rng.uniform(-noise.ej_fluctuation, noise.ej_fluctuation);
  }
  for (int i = 0; i < config.n_qubits; ++i) {
    d.onsite_shift[i] +=
        config.coupling_g * rng.uniform(-noise.charge_noise, noise.charge_noise);
  }
  for (int l = 0; l + 1 < config.n_qubits; ++l) {
    d.link_phase[l] = rng.uniform(-noise.phase_noise, noise.phase_noise);
  }
  return d;
}

ChainGenerator build_chain_generator(const ChainConfig& config,
                                     const NoiseConfig& noise,
                                     const NoiseDraw& draw) {
  validate(config);
  validate(noise);
  ChainGenerator g;
  g.onsite = draw.onsite_shift;
  g.hop_fwd.resize(config.n_qubits - 1);
  g.hop_bwd.resize(config.n_qubits - 1);
  const double phi0 = std::asin(config.eta);
  for (int l = 0; l + 1 < config.n_qubits; ++l) {
    // Junction-phase jitter shifts the anomalous phase, i.e. the link
    // asymmetry; a common phase on a chain link is pure gauge.
    const double eta_l = std::sin(phi0 + draw.link_phase[l]);
    const auto [fwd, bwd] = hopping_amplitudes(config.coupling_g, eta_l);
    g.hop_fwd[l] = fwd;
    g.hop_bwd[l] = bwd;
  }
  g.decay_rate = noise.dissipation_rate * config.coupling_g;
  return g;
}

double state_fidelity(const State& psi, const State& phi) {
  if (psi.size() != phi.size()) {
    throw std::invalid_argument("state_fidelity: dimension mismatch");
  }
  auto norm2 = [](const State& s) {
    double n = 0.0;
    for (const auto& v : s) n += std::norm(v);
    return n;
  };
  if (std::abs(norm2(psi) - 1.0) > 1e-10 || std::abs(norm2(phi) - 1.0) > 1e-10) {
    throw std::invalid_argument("state_fidelity: states must be normalized");
  }
  complexd dot(0.0, 0.0);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    dot += std::conj(psi[i]) * phi[i];
  }
  return std::norm(dot);
}

EvolveResult evolve(const State& initial, const ChainGenerator& generator,
                    double t_ns, const EvolveOptions& opts) {
  if (t_ns < 0.0) throw std::invalid_argument("evolve: t must be >= 0");
  if (initial.size() != generator.onsite.size()) {
    throw std::invalid_argument("evolve: state does not match generator");
  }
  Stepper stepper(generator, opts);
  State y = initial;
  EvolveResult out;
  stepper.run(y, {t_ns}, [&](std::size_t, const State& s) {
    double n2 = 0.0;
    for (const auto& v : s) n2 += std::norm(v);
    out.raw_norm = std::sqrt(n2);
    out.state = normalized(s);
  });
  out.stats = stepper.stats;
  return out;
}

std::vector<State> evolve_record(const State& initial,
                                 const ChainGenerator& generator,
                                 const std::vector<double>& times,
                                 StepStats* stats, const EvolveOptions& opts) {
  if (initial.size() != generator.onsite.size()) {
    throw std::invalid_argument("evolve: state does not match generator");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1])) {
      throw std::invalid_argument("evolve: times must be ascending and >= 0");
    }
  }

  std::vector<State> out(times.size());
  if (times.empty()) return out;

  Stepper stepper(generator, opts);
  State y = initial;
  stepper.run(y, times, [&](std::size_t idx, const State& s) {
    out[idx] = normalized(s);
  });
  if (stats) *stats = stepper.stats;
  return out;
}

double transfer_fidelity(const ChainConfig& config, Direction direction,
                         double t_ns, const std::optional<NoiseConfig>& noise) {
  std::vector<double> etas = {config.eta};
  std::vector<double> times = {t_ns};
  const FidelityMap map = fidelity_map(config, etas, times, noise);
  return direction == Direction::forward ? map.forward[0] : map.reverse[0];
}

FidelityMap fidelity_map(const ChainConfig& config,
                         const std::vector<double>& eta_grid,
                         const std::vector<double>& t_grid,
                         const std::optional<NoiseConfig>& noise,
                         int n_threads) {
  validate(config);
  if (noise) validate(*noise);
  if (eta_grid.empty() || t_grid.empty()) {
    throw std::invalid_argument("fidelity_map: empty grid");
  }
  for (std::size_t i = 1; i < eta_grid.size(); ++i) {
    if (eta_grid[i] <= eta_grid[i - 1]) {
      throw std::invalid_argument("fidelity_map: eta grid must ascend");
    }
  }
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (t_grid[i] <= t_grid[i - 1]) {
      throw std::invalid_argument("fidelity_map: time grid must ascend");
    }
  }

  FidelityMap map;
  map.eta_axis = eta_grid;
  map.time_axis = t_grid;
  map.noise_applied = noise.has_value();
  const std::size_t n_cells = eta_grid.size() * t_grid.size();
  map.forward.assign(n_cells, 0.0);
  map.reverse.assign(n_cells, 0.0);
  map.difference.assign(n_cells, 0.0);
  map.difference_se.assign(n_cells, 0.0);

  const int n = config.n_qubits;
  const int n_traj = noise ? noise->n_trajectories : 1;
  const std::uint64_t seed = noise ? noise->seed : 0;

  auto process_row = [&](std::size_t row) {
    ChainConfig row_config = config;
    row_config.eta = eta_grid[row];
    const std::size_t nt = t_grid.size();
    std::vector<CellAccumulator> acc(nt);

    for (int traj = 0; traj < n_traj; ++traj) {
      ChainGenerator gen;
      if (noise) {
        RngStream rng(stream_key(seed, kTagTrajectory, row, traj));
        const NoiseDraw draw = draw_noise(row_config, *noise, rng);
        gen = build_chain_generator(row_config, *noise, draw);
      } else {
        gen = build_chain_generator(row_config);
      }

      const auto fwd_states =
          evolve_record(basis_state(n, 0), gen, t_grid, nullptr);
      const auto rev_states =
          evolve_record(basis_state(n, n - 1), gen, t_grid, nullptr);

      for (std::size_t j = 0; j < nt; ++j) {
        const double survival = std::exp(-gen.decay_rate * t_grid[j]);
        const double f = survival * std::norm(fwd_states[j][n - 1]);
        const double r = survival * std::norm(rev_states[j][0]);
        acc[j].sum_f += f;
        acc[j].sum_r += r;
        acc[j].sum_d += f - r;
        acc[j].sum_d2 += (f - r) * (f - r);
      }
    }

    for (std::size_t j = 0; j < nt; ++j) {
      const std::size_t cell = map.index(row, j);
      double f = acc[j].sum_f / n_traj;
      double r = acc[j].sum_r / n_traj;
      double se = 0.0;
      if (n_traj > 1) {
        const double mean_d = acc[j].sum_d / n_traj;
        const double var =
            std::max(0.0, (acc[j].sum_d2 - n_traj * mean_d * mean_d) /
                              (n_traj - 1.0));
        se = std::sqrt(var / n_traj);
      }
      if (noise && noise->measurement_uncertainty > 0.0) {
        RngStream meas(stream_key(seed, kTagMeasurement, row, j));
        f = clamp01(f + meas.uniform(-noise->measurement_uncertainty,
                                     noise->measurement_uncertainty));
        r = clamp01(r + meas.uniform(-noise->measurement_uncertainty,
                                     noise->measurement_uncertainty));
      } else {
        f = clamp01(f);
        r = clamp01(r);
      }
      map.forward[cell] = f;
      map.reverse[cell] = r;
      map.difference[cell] = f - r;
      map.difference_se[cell] = se;
    }
  };

  const std::size_t n_rows = eta_grid.size();
  n_threads = std::clamp(n_threads, 1, static_cast<int>(n_rows));
  if (n_threads == 1) {
    for (std::size_t row = 0; row < n_rows; ++row) process_row(row);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n_threads);
    for (int w = 0; w < n_threads; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (std::size_t row = w; row < n_rows; row += n_threads) {
            process_row(row);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  return map;
}

PeakCell peak_difference(const FidelityMap& map) {
  PeakCell peak;
  peak.value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < map.eta_axis.size(); ++i) {
    for (std::size_t j = 0; j < map.time_axis.size(); ++j) {
      const double d = map.difference[map.index(i, j)];
      if (d > peak.value) {
        peak.value = d;
        peak.eta_index = i;
        peak.time_index = j;
      }
    }
  }
  return peak;
}

std::vector<EtaRange> asymmetry_regions(const FidelityMap& map,
                                        double threshold) {
  std::vector<EtaRange> regions;
  std::vector<bool> hot(map.eta_axis.size(), false);
  for (std::size_t i = 0; i < map.eta_axis.size(); ++i) {
    double row_max = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < map.time_axis.size(); ++j) {
      row_max = std::max(row_max, map.difference[map.index(i, j)]);
    }
    hot[i] = row_max >= threshold;
  }
  for (std::size_t i = 0; i < hot.size();) {
    if (hot[i]) {
      std::size_t j = i;
      while (j + 1 < hot.size() && hot[j + 1]) ++j;
      regions.push_back({map.eta_axis[i], map.eta_axis[j]});
      i = j + 1;
    } else {
      ++i;
    }
  }
  return regions;
}

}  // namespace qdiode
