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

#ifndef QDIODE_CPR_HPP
#define QDIODE_CPR_HPP

#include <functional>

namespace qdiode {

// Minimally skewed current-phase relation of a nonreciprocal junction:
//
//   I(phi) = I_J * [ sin(phi - asin(eta)) + eta ]
//   U(phi) = -cos(phi - asin(eta)) + eta * phi      (dU/dphi = I/I_J)
//
// eta is the diode efficiency stored as a fraction in (-1, 1); percent only
// appears at I/O boundaries. The linear tilt makes U quasi-periodic:
// U(phi + 2*pi) = U(phi) + 2*pi*eta.
struct DiodeCPR {
  double eta = 0.0;  ///< diode efficiency, |eta| < 1
  double i_j = 1.0;  ///< junction critical-current scale

  /// Anomalous phase asin(eta) at which the supercurrent vanishes.
  double phi0() const;
};

/// Forward/reverse critical currents. ic_minus is negative by convention.
struct CriticalCurrentPair {
  double ic_plus = 0.0;
  double ic_minus = 0.0;
};

/// Throws std::domain_error unless |eta| < 1 and i_j is finite and positive.
void validate(const DiodeCPR& cpr);

/// Supercurrent I(phi); 2*pi-periodic in phi.
double cpr_current(const DiodeCPR& cpr, double phi);

/// Junction potential U(phi) (dimensionless; multiply by E_J for energy).
double cpr_potential(const DiodeCPR& cpr, double phi);

/// Analytic extrema of the skewed CPR: ( I_J*(1+eta), -I_J*(1-eta) ).
CriticalCurrentPair critical_currents(const DiodeCPR& cpr);

/// Extremum search over one period [0, 2*pi) for an arbitrary CPR.
/// 1024-point coarse scan plus golden-section refinement; use for current
/// functions (e.g. multi-harmonic) that have no closed-form extrema.
CriticalCurrentPair critical_currents_numeric(
    const std::function<double(double)>& current_fn);

/// Numeric-path overload for the built-in CPR.
CriticalCurrentPair critical_currents_numeric(const DiodeCPR& cpr);

/// Diode efficiency (|I+| - |I-|) / (|I+| + |I-|), as a fraction.
/// Throws std::domain_error when both currents vanish.
double efficiency(const CriticalCurrentPair& ic);

}  // namespace qdiode

#endif  // QDIODE_CPR_HPP
