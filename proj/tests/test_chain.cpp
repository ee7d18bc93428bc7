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
#include <complex>
#include <numbers>

#include <doctest.h>

#include "qdiode/chain.hpp"
#include "qdiode/errors.hpp"
#include "qdiode/rng.hpp"

using namespace qdiode;

namespace {

constexpr double kPi = std::numbers::pi;

State basis(int n, int site) {
  State s(n, {0.0, 0.0});
  s[site] = {1.0, 0.0};
  return s;
}

std::vector<double> linspace(double lo, double hi, double step) {
  std::vector<double> v;
  for (double x = lo; x <= hi + 1e-12; x += step) v.push_back(x);
  return v;
}

}  // namespace

TEST_CASE("state fidelity basics") {
  const State a = basis(3, 0);
  const State b = basis(3, 1);
  CHECK(state_fidelity(a, a) == doctest::Approx(1.0));
  CHECK(state_fidelity(a, b) == doctest::Approx(0.0));
  const double r = 1.0 / std::sqrt(2.0);
  const State super = {{r, 0.0}, {r, 0.0}, {0.0, 0.0}};
  CHECK(state_fidelity(super, a) == doctest::Approx(0.5));
  CHECK_THROWS_AS(state_fidelity(a, basis(4, 0)), std::invalid_argument);
  State unnorm = a;
  unnorm[0] = {0.9, 0.0};
  CHECK_THROWS_AS(state_fidelity(unnorm, a), std::invalid_argument);
}

TEST_CASE("hopping amplitudes and limits") {
  const auto [fwd, bwd] = hopping_amplitudes(1.0, 0.276);
  CHECK(fwd == doctest::Approx(1.276));
  CHECK(bwd == doctest::Approx(0.724));
  CHECK(fwd / bwd == doctest::Approx(1.276 / 0.724).epsilon(1e-12));
  // Perfect-diode limit: the backward amplitude closes completely.
  const auto [f1, b1] = hopping_amplitudes(1.0, 1.0);
  CHECK(f1 == doctest::Approx(2.0));
  CHECK(b1 == 0.0);
  CHECK_THROWS_AS(hopping_amplitudes(1.0, 1.5), std::domain_error);
}

TEST_CASE("generator is hermitian exactly at eta = 0") {
  ChainConfig cfg;
  cfg.eta = 0.0;
  const ChainGenerator g = build_chain_generator(cfg);
  CHECK(g.hermitian(1e-12));
  for (double d : g.onsite) CHECK(d == 0.0);

  cfg.eta = 0.3;
  CHECK_FALSE(build_chain_generator(cfg).hermitian(1e-12));
}

TEST_CASE("config validation") {
  ChainConfig cfg;
  cfg.n_qubits = 1;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg.n_qubits = 3;
  cfg.eta = 1.0;
  CHECK_THROWS_AS(validate(cfg), std::domain_error);
  cfg.eta = 0.0;
  cfg.coupling_g = 0.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

  NoiseConfig noise;
  noise.n_trajectories = 0;
  CHECK_THROWS_AS(validate(noise), std::invalid_argument);
  noise = NoiseConfig{};
  noise.charge_noise = -0.1;
  CHECK_THROWS_AS(validate(noise), std::invalid_argument);
}

TEST_CASE("evolution at t = 0 returns the initial state") {
  ChainConfig cfg;
  cfg.eta = 0.4;
  const ChainGenerator g = build_chain_generator(cfg);
  const State init = basis(3, 0);
  const EvolveResult res = evolve(init, g, 0.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(res.state[i] - init[i]) < 1e-15);
  }
}

TEST_CASE("two-site exchange swaps the excitation at t = pi/(2g)") {
  ChainConfig cfg;
  cfg.n_qubits = 2;
  cfg.eta = 0.0;
  const ChainGenerator g = build_chain_generator(cfg);
  const double t_swap = kPi / (2.0 * cfg.coupling_g);
  const EvolveResult res = evolve(basis(2, 0), g, t_swap);
  CHECK(std::norm(res.state[1]) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.stats.accepted > 0);
}

TEST_CASE("readout state is renormalized") {
  ChainConfig cfg;
  cfg.eta = 0.7;
  const ChainGenerator g = build_chain_generator(cfg);
  const EvolveResult res = evolve(basis(3, 0), g, 6.0);
  double norm = 0.0;
  for (const auto& v : res.state) norm += std::norm(v);
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("noiseless reciprocal evolution is unitary before readout") {
  ChainConfig cfg;
  cfg.eta = 0.0;
  const ChainGenerator g = build_chain_generator(cfg);
  for (double t : {2.0, 5.0, 9.0}) {
    const EvolveResult res = evolve(basis(3, 0), g, t);
    CHECK(std::abs(res.raw_norm - 1.0) < 1e-9);
  }
  // Directional hopping does not conserve the norm.
  ChainConfig diode = cfg;
  diode.eta = 0.5;
  const EvolveResult res = evolve(basis(3, 0), build_chain_generator(diode), 5.0);
  CHECK(std::abs(res.raw_norm - 1.0) > 1e-3);
}

TEST_CASE("reciprocal chain: forward equals reverse to double precision") {
  ChainConfig cfg;
  cfg.eta = 0.0;
  const auto t_grid = linspace(1.0, 10.0, 0.5);
  const FidelityMap map = fidelity_map(cfg, {0.0}, t_grid);
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    CHECK(std::abs(map.difference[j]) < 1e-10);
  }
}

TEST_CASE("transfer fidelity matches the map cell") {
  ChainConfig cfg;
  cfg.eta = 0.276;
  const double direct = transfer_fidelity(cfg, Direction::forward, 4.5);
  const FidelityMap map = fidelity_map(cfg, {0.276}, {4.5});
  CHECK(direct == map.forward[0]);
}

TEST_CASE("noiseless diode asymmetry at the measured efficiency") {
  ChainConfig cfg;
  cfg.eta = 0.276;
  double best = -1.0;
  for (double t = 1.0; t <= 10.0; t += 0.05) {
    best = std::max(best, transfer_fidelity(cfg, Direction::forward, t) -
                              transfer_fidelity(cfg, Direction::reverse, t));
  }
  // Dense-scan value for the renormalized directional-hopping model.
  CHECK(best > 0.30);
  CHECK(best < 0.36);
}

TEST_CASE("fidelities stay within [0, 1] across the map") {
  ChainConfig cfg;
  NoiseConfig noise;
  noise.n_trajectories = 20;
  noise.seed = 9;
  const FidelityMap map =
      fidelity_map(cfg, linspace(0.0, 0.9, 0.15), linspace(1.0, 10.0, 1.5), noise);
  for (std::size_t i = 0; i < map.forward.size(); ++i) {
    CHECK(map.forward[i] >= 0.0);
    CHECK(map.forward[i] <= 1.0);
    CHECK(map.reverse[i] >= 0.0);
    CHECK(map.reverse[i] <= 1.0);
    CHECK(map.difference[i] >= -1.0);
    CHECK(map.difference[i] <= 1.0);
  }
}

TEST_CASE("degenerate noise config reproduces the noiseless value") {
  ChainConfig cfg;
  cfg.eta = 0.276;
  NoiseConfig mute;
  mute.ej_fluctuation = 0.0;
  mute.charge_noise = 0.0;
  mute.phase_noise = 0.0;
  mute.dissipation_rate = 0.0;
  mute.measurement_uncertainty = 0.0;
  mute.n_trajectories = 1;
  const double noisy = transfer_fidelity(cfg, Direction::forward, 5.0, mute);
  const double clean = transfer_fidelity(cfg, Direction::forward, 5.0);
  CHECK(std::abs(noisy - clean) < 1e-10);
}

TEST_CASE("same seed gives bit-identical maps, different seeds stay close") {
  ChainConfig cfg;
  NoiseConfig noise;
  noise.n_trajectories = 40;
  noise.seed = 1234;
  const auto etas = linspace(0.1, 0.5, 0.2);
  const auto times = linspace(2.0, 8.0, 2.0);
  const FidelityMap a = fidelity_map(cfg, etas, times, noise);
  const FidelityMap b = fidelity_map(cfg, etas, times, noise);
  REQUIRE(a.forward.size() == b.forward.size());
  for (std::size_t i = 0; i < a.forward.size(); ++i) {
    CHECK(a.forward[i] == b.forward[i]);
    CHECK(a.reverse[i] == b.reverse[i]);
  }

  noise.seed = 4321;
  const FidelityMap c = fidelity_map(cfg, etas, times, noise);
  double mean_diff = 0.0, mean_se = 0.0;
  for (std::size_t i = 0; i < a.forward.size(); ++i) {
    mean_diff += std::abs(a.difference[i] - c.difference[i]);
    mean_se += a.difference_se[i];
  }
  mean_diff /= a.forward.size();
  mean_se /= a.forward.size();
  CHECK(mean_diff < 3.0 * mean_se + 3.0 * 0.002);
}

TEST_CASE("thread count does not change the map") {
  ChainConfig cfg;
  NoiseConfig noise;
  noise.n_trajectories = 10;
  const auto etas = linspace(0.0, 0.8, 0.2);
  const auto times = linspace(1.0, 9.0, 2.0);
  const FidelityMap serial = fidelity_map(cfg, etas, times, noise, 1);
  const FidelityMap parallel = fidelity_map(cfg, etas, times, noise, 4);
  for (std::size_t i = 0; i < serial.forward.size(); ++i) {
    CHECK(serial.forward[i] == parallel.forward[i]);
    CHECK(serial.reverse[i] == parallel.reverse[i]);
  }
}

TEST_CASE("dissipation never raises the peak forward fidelity") {
  ChainConfig cfg;
  double last_peak = 2.0;
  for (double rate : {0.0, 0.01, 0.05}) {
    NoiseConfig noise;
    noise.ej_fluctuation = 0.0;
    noise.charge_noise = 0.0;
    noise.phase_noise = 0.0;
    noise.measurement_uncertainty = 0.0;
    noise.dissipation_rate = rate;
    noise.n_trajectories = 1;
    const FidelityMap map = fidelity_map(cfg, linspace(0.0, 0.9, 0.1),
                                         linspace(1.0, 10.0, 0.5), noise);
    double peak = 0.0;
    for (double f : map.forward) peak = std::max(peak, f);
    CHECK(peak <= last_peak + 1e-12);
    last_peak = peak;
  }
}

TEST_CASE("doubling trajectories moves the mean map value within noise") {
  ChainConfig cfg;
  NoiseConfig base;
  base.n_trajectories = 100;
  NoiseConfig doubled = base;
  doubled.n_trajectories = 200;
  const auto etas = linspace(0.1, 0.7, 0.3);
  const auto times = linspace(2.0, 8.0, 3.0);
  const FidelityMap a = fidelity_map(cfg, etas, times, base);
  const FidelityMap b = fidelity_map(cfg, etas, times, doubled);
  double mean_a = 0.0, mean_b = 0.0, mean_se = 0.0;
  for (std::size_t i = 0; i < a.forward.size(); ++i) {
    mean_a += a.difference[i];
    mean_b += b.difference[i];
    mean_se += a.difference_se[i];
  }
  mean_a /= a.forward.size();
  mean_b /= a.forward.size();
  mean_se /= a.forward.size();
  CHECK(std::abs(mean_a - mean_b) < 2.0 * mean_se + 2.0 * 0.002);
}

TEST_CASE("asymmetry regions follow the threshold") {
  ChainConfig cfg;
  const FidelityMap map =
      fidelity_map(cfg, linspace(0.0, 0.9, 0.1), linspace(1.0, 10.0, 0.5));
  CHECK(asymmetry_regions(map, 1.1).empty());
  const auto all = asymmetry_regions(map, 0.0);
  REQUIRE(!all.empty());
  // Every eta row has some nonnegative difference, so one region spans
  // the full grid.
  CHECK(all.front().lo == doctest::Approx(0.0));
  CHECK(all.back().hi == doctest::Approx(0.9));

  const auto strong = asymmetry_regions(map, 0.5);
  for (const EtaRange& r : strong) {
    CHECK(r.lo > 0.2);  // weak-asymmetry rows cannot reach 0.5
  }
}

TEST_CASE("map rejects malformed grids") {
  ChainConfig cfg;
  CHECK_THROWS_AS(fidelity_map(cfg, {}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(fidelity_map(cfg, {0.3, 0.2}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(fidelity_map(cfg, {0.2}, {2.0, 1.0}), std::invalid_argument);
}

TEST_CASE("evolve validates input") {
  ChainConfig cfg;
  const ChainGenerator g = build_chain_generator(cfg);
  CHECK_THROWS_AS(evolve(basis(2, 0), g, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(evolve(basis(3, 0), g, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(evolve_record(basis(3, 0), g, {2.0, 1.0}, nullptr),
                  std::invalid_argument);
}

TEST_CASE("exhausted step budget reports diagnostics") {
  ChainConfig cfg;
  const ChainGenerator g = build_chain_generator(cfg);
  EvolveOptions opts;
  opts.max_steps = 3;
  CHECK_THROWS_AS(evolve(basis(3, 0), g, 10.0, opts), ConvergenceError);
  try {
    evolve(basis(3, 0), g, 10.0, opts);
  } catch (const ConvergenceError& ex) {
    CHECK(std::string(ex.what()).find("accepted=") != std::string::npos);
  }
}

TEST_CASE("noise draw order and scaling are stable") {
  ChainConfig cfg;
  NoiseConfig noise;
  RngStream rng(stream_key(noise.seed, 0x7261aULL, 0, 0));
  const NoiseDraw draw = draw_noise(cfg, noise, rng);
  REQUIRE(draw.onsite_shift.size() == 3);
  REQUIRE(draw.link_phase.size() == 2);
  for (double s : draw.onsite_shift) {
    CHECK(std::abs(s) <=
          cfg.coupling_g * (noise.ej_fluctuation + noise.charge_noise));
  }
  for (double p : draw.link_phase) {
    CHECK(std::abs(p) <= noise.phase_noise);
  }
  // The same stream key reproduces the draw bit for bit.
  RngStream rng2(stream_key(noise.seed, 0x7261aULL, 0, 0));
  const NoiseDraw again = draw_noise(cfg, noise, rng2);
  for (int i = 0; i < 3; ++i) CHECK(draw.onsite_shift[i] == again.onsite_shift[i]);
}
