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

#ifndef QDIODE_IVLAB_HPP
#define QDIODE_IVLAB_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qdiode {

enum class Orientation {
  in_plane_parallel,
  in_plane_perpendicular,
  in_plane_arbitrary,
  out_of_plane,
};

std::string to_string(Orientation o);
Orientation orientation_from_string(const std::string& s);

/// One measured I-V sweep at a fixed applied field.
struct IVTrace {
  std::vector<double> current;   // A
  std::vector<double> voltage;   // V
  std::vector<int> sweep_dir;    // +1 up, -1 down; empty when unmetered
  double b_field = 0.0;          // Oe
  Orientation orientation = Orientation::out_of_plane;
  std::optional<double> thickness_nm;
  std::string source;            // file name or synthetic tag
};

/// Throws std::invalid_argument unless arrays match, length >= 20, and the
/// current spans both signs.
void validate(const IVTrace& trace);

struct DetectionInfo {
  std::size_t trace_index = 0;  // index into the trace arrays
  double threshold = 0.0;       // |dV/dI| threshold actually used
  bool used_fallback = false;   // max-gradient fallback engaged
};

struct CriticalCurrentEstimate {
  double ic_plus = 0.0;   // A, > 0
  double ic_minus = 0.0;  // A, < 0
  double sigma_plus = 0.0;
  double sigma_minus = 0.0;
  DetectionInfo plus_info, minus_info;
};

struct ExtractionOptions {
  double gradient_threshold_factor = 5.0;
  int n_resamples = 100;
  int window_halfwidth = 5;
  std::uint64_t seed = 0xb00f5ULL;
};

// Voltage-gradient transition detection per branch: |dV/dI| (central
// differences) must exceed factor * median(|dV/dI|) over the low-bias
// region, scanning from zero bias outward; falls back to the gradient
// maximum when nothing crosses. Throws DataError("no transition detected")
// for a flat branch and DataError("non-monotonic sweep") for duplicate
// currents within a branch.
CriticalCurrentEstimate extract_critical_currents(
    const IVTrace& trace, const ExtractionOptions& opts = {});

struct BootstrapResult {
  double sigma = 0.0;    // A
  bool degenerate = false;  // fewer than 3 distinct points in the window
};

/// Bootstrap uncertainty of one detected critical point: resamples the
/// <= 2*window_halfwidth+1 surrounding points with replacement, re-runs the
/// gradient detection per resample, returns the standard deviation.
/// critical_index addresses the trace arrays; the branch is inferred from
/// the sign of current[critical_index].
BootstrapResult bootstrap_uncertainty(const IVTrace& trace,
                                      std::size_t critical_index,
                                      const ExtractionOptions& opts = {});

struct EfficiencyPoint {
  double b_field = 0.0;  // Oe
  double eta = 0.0;      // fraction
  double sigma_eta = 0.0;
};

struct SeriesResult {
  std::vector<EfficiencyPoint> points;  // ascending in b_field
  std::vector<std::string> warnings;    // skipped fields, degenerate windows
};

/// Per-field critical currents -> efficiency with first-order error
/// propagation. Fields whose extraction fails are skipped and reported.
SeriesResult efficiency_series(const std::vector<IVTrace>& traces,
                               const ExtractionOptions& opts = {});

/// Weighted sinusoid fit eta(B) = a*sin(b*B + c) [+ offset when enabled].
struct EfficiencyFit {
  double a = 0.0;       // amplitude, fraction
  double b = 0.0;       // angular frequency, 1/Oe
  double c = 0.0;       // phase, rad, wrapped to (-pi, pi]
  double offset = 0.0;  // additive offset, only fit when requested
  double r_squared = 0.0;            // weighted coefficient of determination
  std::array<double, 9> covariance{};  // row-major 3x3 for (a, b, c)
  int n_points = 0;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;  // amplitude ~ 0, (b, c) unidentifiable
};

struct FitOptions {
  std::optional<std::array<double, 3>> initial_guess;  // (a, b, c)
  bool with_offset = false;
  int max_iterations = 200;
};

/// Levenberg-Marquardt weighted least squares; weights 1/sigma^2, zero
/// sigmas receive the median weight. Initial frequency from a dominant-
/// frequency scan of the series unless a guess is supplied. Throws
/// InsufficientDataError below 4 points.
EfficiencyFit fit_sinusoid(const std::vector<EfficiencyPoint>& points,
                           const FitOptions& opts = {});

/// Model evaluation helper shared by the fit, exports, and tests.
double sinusoid_model(const EfficiencyFit& fit, double b_field);

}  // namespace qdiode

#endif  // QDIODE_IVLAB_HPP
