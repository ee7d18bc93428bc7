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

#ifndef QDIODE_TESTS_SYNTHETIC_IV_HPP
#define QDIODE_TESTS_SYNTHETIC_IV_HPP

// Synthetic I-V corpus used as the independent oracle for the reduction
// pipeline: traces are generated from known critical currents, so every
// downstream quantity has a ground truth.

#include <cmath>
#include <vector>

#include "qdiode/ivlab.hpp"
#include "qdiode/rng.hpp"

namespace qdiode::testing {

struct SyntheticIvOptions {
  double ic_scale = 1.0e-3;        // A
  double normal_resistance = 1.0;  // Ohm
  double current_span = 2.0;       // sweep to +-span*ic_scale
  std::size_t n_samples = 241;     // odd keeps a zero-bias sample
  double voltage_floor = 5.0e-8;   // V rms, amplifier floor (everywhere)
  double voltage_frac = 0.01;      // relative noise on the resistive branch
  std::uint64_t seed = 0x5eedcafeULL;
};

/// Piecewise-linear diode trace: V = 0 inside (ic_minus, ic_plus), ohmic
/// beyond. Noise follows a four-probe setup: a nanovolt floor on the
/// superconducting branch plus percent-level noise once resistive.
inline IVTrace make_trace(double ic_plus, double ic_minus, double b_field,
                          const SyntheticIvOptions& opts = {},
                          std::uint64_t stream_tag = 0) {
  IVTrace t;
  t.b_field = b_field;
  t.source = "synthetic";
  RngStream rng(stream_key(opts.seed, 0x51f7ULL, stream_tag));
  const double lo = -opts.current_span * opts.ic_scale;
  const double hi = opts.current_span * opts.ic_scale;
  for (std::size_t i = 0; i < opts.n_samples; ++i) {
    const double cur = lo + (hi - lo) * double(i) / double(opts.n_samples - 1);
    double v = 0.0;
    if (cur > ic_plus) v = opts.normal_resistance * (cur - ic_plus);
    if (cur < ic_minus) v = opts.normal_resistance * (cur - ic_minus);
    const double sigma = opts.voltage_floor + opts.voltage_frac * std::abs(v);
    if (sigma > 0.0) v += sigma * rng.normal();
    t.current.push_back(cur);
    t.voltage.push_back(v);
  }
  return t;
}

/// Trace whose critical-current asymmetry realizes a target efficiency.
inline IVTrace make_trace_for_eta(double eta, double b_field,
                                  const SyntheticIvOptions& opts = {},
                                  std::uint64_t stream_tag = 0) {
  return make_trace(opts.ic_scale * (1.0 + eta), -opts.ic_scale * (1.0 - eta),
                    b_field, opts, stream_tag);
}

struct SyntheticSeries {
  std::vector<IVTrace> traces;
  double a, b, c;  // generator parameters of eta(B) = a*sin(b*B + c)
};

/// Field sweep whose per-field efficiency follows a known sinusoid.
inline SyntheticSeries make_series(double a, double b, double c, double b_lo,
                                   double b_hi, std::size_t n_fields,
                                   const SyntheticIvOptions& opts = {}) {
  SyntheticSeries s;
  s.a = a;
  s.b = b;
  s.c = c;
  for (std::size_t i = 0; i < n_fields; ++i) {
    const double field =
        b_lo + (b_hi - b_lo) * double(i) / double(n_fields - 1);
    const double eta = a * std::sin(b * field + c);
    s.traces.push_back(make_trace_for_eta(eta, field, opts, i + 1));
  }
  return s;
}

}  // namespace qdiode::testing

#endif  // QDIODE_TESTS_SYNTHETIC_IV_HPP
