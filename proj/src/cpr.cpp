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

#include "qdiode/cpr.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qdiode {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Golden-section search for the minimum of fn on [a, b].
double golden_min(const std::function<double(double)>& fn, double a, double b) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = fn(x1);
  double f2 = fn(x2);
  // ~75 shrinks by inv_phi brings any period-sized bracket to ~1e-16.
  for (int it = 0; it < 120 && (b - a) > 1e-14; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = fn(x2);
    }
  }
  return fn(0.5 * (a + b));
}

}  // namespace

double DiodeCPR::phi0() const { return std::asin(eta); }

void validate(const DiodeCPR& cpr) {
  if (!(std::abs(cpr.eta) < 1.0)) {
    throw std::domain_error("DiodeCPR: |eta| must be < 1, got " +
                            std::to_string(cpr.eta));
  }
  if (!(cpr.i_j > 0.0) || !std::isfinite(cpr.i_j)) {
    throw std::domain_error("DiodeCPR: i_j must be finite and positive");
  }
}

double cpr_current(const DiodeCPR& cpr, double phi) {
  validate(cpr);
  return cpr.i_j * (std::sin(phi - cpr.phi0()) + cpr.eta);
}

double cpr_potential(const DiodeCPR& cpr, double phi) {
  validate(cpr);
  return -std::cos(phi - cpr.phi0()) + cpr.eta * phi;
}

CriticalCurrentPair critical_currents(const DiodeCPR& cpr) {
  validate(cpr);
  return {cpr.i_j * (1.0 + cpr.eta), -cpr.i_j * (1.0 - cpr.eta)};
}

CriticalCurrentPair critical_currents_numeric(
    const std::function<double(double)>& current_fn) {
  constexpr int kCoarse = 1024;
  const double h = kTwoPi / kCoarse;

  int i_max = 0;
  int i_min = 0;
  double v_max = current_fn(0.0);
  double v_min = v_max;
  for (int i = 1; i < kCoarse; ++i) {
    const double v = current_fn(i * h);
    if (v > v_max) {
      v_max = v;
      i_max = i;
    }
    if (v < v_min) {
      v_min = v;
      i_min = i;
    }
  }

  // Refine each extremum inside its bracketing coarse cells. The scan is
  // periodic, so brackets may wrap past [0, 2*pi).
  const double max_val = -golden_min(
      [&](double x) { return -current_fn(x); }, (i_max - 1) * h, (i_max + 1) * h);
  const double min_val =
      golden_min(current_fn, (i_min - 1) * h, (i_min + 1) * h);
  return {max_val, min_val};
}

CriticalCurrentPair critical_currents_numeric(const DiodeCPR& cpr) {
  validate(cpr);
  return critical_currents_numeric(
      [&cpr](double phi) { return cpr_current(cpr, phi); });
}

double efficiency(const CriticalCurrentPair& ic) {
  const double plus = std::abs(ic.ic_plus);
  const double minus = std::abs(ic.ic_minus);
  if (plus + minus == 0.0) {
    throw std::domain_error("efficiency: both critical currents are zero");
  }
  return (plus - minus) / (plus + minus);
}

}  // namespace qdiode
