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

#include "qdiode/ivlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "qdiode/errors.hpp"
#include "qdiode/rng.hpp"

namespace qdiode {

namespace {

constexpr std::uint64_t kTagBootstrap = 0xb0075ULL;
constexpr std::uint64_t kTagTrace = 0x7aceULL;

struct Branch {
  std::vector<double> current;           // ordered by |I| ascending
  std::vector<double> voltage;
  std::vector<std::size_t> orig_index;   // back-references into the trace
  bool positive = true;
};

Branch select_branch(const IVTrace& trace, bool positive) {
  Branch b;
  b.positive = positive;
  const bool has_dir = !trace.sweep_dir.empty();
  const int wanted_dir = positive ? +1 : -1;
  for (std::size_t i = 0; i < trace.current.size(); ++i) {
    const double cur = trace.current[i];
    if ((positive && cur <= 0.0) || (!positive && cur >= 0.0)) continue;
    if (has_dir && trace.sweep_dir[i] != wanted_dir) continue;
    b.current.push_back(cur);
    b.voltage.push_back(trace.voltage[i]);
    b.orig_index.push_back(i);
  }
  std::vector<std::size_t> order(b.current.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(b.current[x]) < std::abs(b.current[y]);
  });
  Branch sorted;
  sorted.positive = positive;
  for (std::size_t idx : order) {
    sorted.current.push_back(b.current[idx]);
    sorted.voltage.push_back(b.voltage[idx]);
    sorted.orig_index.push_back(b.orig_index[idx]);
  }
  return sorted;
}

// Central-difference |dV/dI| per interior branch point, low-bias noise
// floor, and the threshold crossing nearest zero bias.
struct BranchDetection {
  std::size_t pos = 0;   // index into the branch arrays
  double threshold = 0.0;
  bool fallback = false;
};

std::vector<double> branch_gradients(const Branch& b) {
  const std::size_t m = b.current.size();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (b.current[i + 1] == b.current[i]) {
      throw DataError("non-monotonic sweep: duplicate currents within a branch");
    }
  }
  std::vector<double> g(m, 0.0);
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double di = b.current[i + 1] - b.current[i - 1];
    g[i] = std::abs((b.voltage[i + 1] - b.voltage[i - 1]) / di);
  }
  return g;
}

double low_bias_floor(const std::vector<double>& grad) {
  const std::size_t m = grad.size();
  const std::size_t interior = m - 2;
  const std::size_t n_low =
      std::clamp<std::size_t>(std::max<std::size_t>(5, interior / 4), 1, interior);
  std::vector<double> window(grad.begin() + 1, grad.begin() + 1 + n_low);
  std::sort(window.begin(), window.end());
  const std::size_t mid = window.size() / 2;
  return window.size() % 2 == 1 ? window[mid]
                                : 0.5 * (window[mid - 1] + window[mid]);
}

BranchDetection detect_transition(const Branch& b, double factor) {
  const std::size_t m = b.current.size();
  if (m < 7) {
    throw DataError(std::string("branch too short for detection (") +
                    (b.positive ? "positive" : "negative") + " side)");
  }
  const std::vector<double> grad = branch_gradients(b);
  const double gmax = *std::max_element(grad.begin(), grad.end());
  if (gmax == 0.0) {
    throw DataError(std::string("no transition detected: ") +
                    (b.positive ? "positive" : "negative") +
                    " branch voltage is flat");
  }

  BranchDetection det;
  det.threshold = factor * low_bias_floor(grad);
  // A transition is sustained (the branch stays resistive past it) while a
  // noise excursion is isolated: accept a crossing only when the mean
  // gradient over the next few samples also clears the threshold.
  for (std::size_t i = 1; i + 1 < m; ++i) {
    if (grad[i] <= det.threshold) continue;
    double mean = 0.0;
    std::size_t count = 0;
    for (std::size_t j = i; j + 1 < m && count < 5; ++j, ++count) mean += grad[j];
    mean /= double(count);
    if (mean > det.threshold) {
      det.pos = i;
      return det;
    }
  }
  det.fallback = true;
  det.pos = static_cast<std::size_t>(
      std::max_element(grad.begin(), grad.end()) - grad.begin());
  return det;
}

// Re-detection on a resampled point set: slopes between consecutive
// distinct currents, attributed to the inner (lower |I|) point to match
// the central-difference convention of flagging the kink sample.
double redetect_from_sample(std::vector<std::pair<double, double>> pts,
                            double threshold, double fallback_current) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return std::abs(a.first) < std::abs(b.first);
  });
  double best_slope = -1.0;
  double best_current = fallback_current;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double di = pts[i + 1].first - pts[i].first;
    if (di == 0.0) continue;
    const double slope = std::abs((pts[i + 1].second - pts[i].second) / di);
    if (slope > threshold) return pts[i].first;
    if (slope > best_slope) {
      best_slope = slope;
      best_current = pts[i].first;
    }
  }
  return best_current;
}

std::vector<std::pair<double, double>> bootstrap_window(
    const Branch& b, std::size_t pos, int halfwidth) {
  const std::size_t m = b.current.size();
  const std::size_t w = static_cast<std::size_t>(halfwidth);
  const std::size_t lo = pos >= w ? pos - w : 0;
  const std::size_t hi = std::min(pos + w, m - 1);
  std::vector<std::pair<double, double>> window(hi - lo + 1);
  for (std::size_t i = 0; i < window.size(); ++i) {
    window[i] = {b.current[lo + i], b.voltage[lo + i]};
  }
  return window;
}

bool window_degenerate(const std::vector<std::pair<double, double>>& window) {
  std::vector<double> distinct;
  for (const auto& p : window) distinct.push_back(p.first);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  return distinct.size() < 3;
}

BootstrapResult bootstrap_branch(const Branch& b, const BranchDetection& det,
                                 const ExtractionOptions& opts,
                                 std::uint64_t stream) {
  const auto window = bootstrap_window(b, det.pos, opts.window_halfwidth);
  const std::size_t width = window.size();

  BootstrapResult out;
  if (window_degenerate(window)) {
    out.degenerate = true;
    out.sigma = 0.0;
    return out;
  }

  RngStream rng(stream);
  std::vector<double> values(static_cast<std::size_t>(opts.n_resamples));
  std::vector<std::pair<double, double>> sample(width);
  const double center_current = b.current[det.pos];
  for (int r = 0; r < opts.n_resamples; ++r) {
    for (std::size_t i = 0; i < width; ++i) {
      sample[i] = window[rng.below(width)];
    }
    values[static_cast<std::size_t>(r)] =
        redetect_from_sample(sample, det.threshold, center_current);
  }

  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  out.sigma = values.size() > 1 ? std::sqrt(var / (values.size() - 1.0)) : 0.0;
  return out;
}

// Small dense solver (partial pivoting); a is n x n row-major, b is n
// right-hand sides of length n each (row-major). Returns false on a
// numerically singular pivot.
bool solve_dense(std::vector<double> a, std::vector<double>& b, int n, int nrhs) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    if (std::abs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      for (int c = 0; c < nrhs; ++c) {
        std::swap(b[col * nrhs + c], b[piv * nrhs + c]);
      }
    }
    const double d = a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / d;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      for (int c = 0; c < nrhs; ++c) b[r * nrhs + c] -= f * b[col * nrhs + c];
    }
  }
  for (int col = n - 1; col >= 0; --col) {
    const double d = a[col * n + col];
    for (int c = 0; c < nrhs; ++c) {
      double acc = b[col * nrhs + c];
      for (int k = col + 1; k < n; ++k) acc -= a[col * n + k] * b[k * nrhs + c];
      b[col * nrhs + c] = acc / d;
    }
  }
  return true;
}

double wrap_phase(double c) {
  const double two_pi = 2.0 * std::numbers::pi;
  c = std::fmod(c, two_pi);
  if (c <= -std::numbers::pi) c += two_pi;
  if (c > std::numbers::pi) c -= two_pi;
  return c;
}

}  // namespace

std::string to_string(Orientation o) {
  switch (o) {
    case Orientation::in_plane_parallel: return "in-plane-parallel";
    case Orientation::in_plane_perpendicular: return "in-plane-perpendicular";
    case Orientation::in_plane_arbitrary: return "in-plane-arbitrary";
    case Orientation::out_of_plane: return "out-of-plane";
  }
  return "out-of-plane";
}

Orientation orientation_from_string(const std::string& s) {
  if (s == "in-plane-parallel") return Orientation::in_plane_parallel;
  if (s == "in-plane-perpendicular") return Orientation::in_plane_perpendicular;
  if (s == "in-plane-arbitrary") return Orientation::in_plane_arbitrary;
  if (s == "out-of-plane") return Orientation::out_of_plane;
  throw std::invalid_argument("unknown orientation: " + s);
}

void validate(const IVTrace& trace) {
  if (trace.current.size() != trace.voltage.size()) {
    throw std::invalid_argument("IVTrace: current/voltage size mismatch");
  }
  if (!trace.sweep_dir.empty() &&
      trace.sweep_dir.size() != trace.current.size()) {
    throw std::invalid_argument("IVTrace: sweep_dir size mismatch");
  }
  if (trace.current.size() < 20) {
    throw std::invalid_argument("IVTrace: need at least 20 samples");
  }
  bool has_pos = false, has_neg = false;
  for (double c : trace.current) {
    if (!std::isfinite(c)) throw std::invalid_argument("IVTrace: non-finite current");
    has_pos = has_pos || c > 0.0;
    has_neg = has_neg || c < 0.0;
  }
  for (double v : trace.voltage) {
    if (!std::isfinite(v)) throw std::invalid_argument("IVTrace: non-finite voltage");
  }
  if (!has_pos || !has_neg) {
    throw std::invalid_argument("IVTrace: current must span both signs");
  }
}

CriticalCurrentEstimate extract_critical_currents(const IVTrace& trace,
                                                  const ExtractionOptions& opts) {
  validate(trace);
  if (!(opts.gradient_threshold_factor > 0.0)) {
    throw std::invalid_argument("gradient_threshold_factor must be > 0");
  }

  CriticalCurrentEstimate est;
  for (bool positive : {true, false}) {
    const Branch branch = select_branch(trace, positive);
    const BranchDetection det =
        detect_transition(branch, opts.gradient_threshold_factor);
    const BootstrapResult boot = bootstrap_branch(
        branch, det, opts,
        stream_key(opts.seed, kTagBootstrap, positive ? 1 : 0));

    DetectionInfo info;
    info.trace_index = branch.orig_index[det.pos];
    info.threshold = det.threshold;
    info.used_fallback = det.fallback;
    if (positive) {
      est.ic_plus = branch.current[det.pos];
      est.sigma_plus = boot.sigma;
      est.plus_info = info;
    } else {
      est.ic_minus = branch.current[det.pos];
      est.sigma_minus = boot.sigma;
      est.minus_info = info;
    }
  }
  return est;
}

BootstrapResult bootstrap_uncertainty(const IVTrace& trace,
                                      std::size_t critical_index,
                                      const ExtractionOptions& opts) {
  validate(trace);
  if (critical_index >= trace.current.size()) {
    throw std::invalid_argument("bootstrap_uncertainty: index out of range");
  }
  const double cur = trace.current[critical_index];
  if (cur == 0.0) {
    throw std::invalid_argument("bootstrap_uncertainty: zero-bias index has no branch");
  }
  const Branch branch = select_branch(trace, cur > 0.0);
  std::size_t pos = branch.current.size();
  for (std::size_t i = 0; i < branch.orig_index.size(); ++i) {
    if (branch.orig_index[i] == critical_index) {
      pos = i;
      break;
    }
  }
  if (pos == branch.current.size()) {
    throw std::invalid_argument(
        "bootstrap_uncertainty: index not part of the detected branch");
  }

  BranchDetection det;
  det.pos = pos;
  // Degenerate windows are reported without touching the gradients, which would
  // reject the duplicated currents first.
  if (window_degenerate(bootstrap_window(branch, pos, opts.window_halfwidth))) {
    BootstrapResult out;
    out.degenerate = true;
    return out;
  }
  const std::vector<double> grad = branch_gradients(branch);
  det.threshold = opts.gradient_threshold_factor * low_bias_floor(grad);
  return bootstrap_branch(branch, det, opts,
                          stream_key(opts.seed, kTagBootstrap, cur > 0.0 ? 1 : 0));
}

SeriesResult efficiency_series(const std::vector<IVTrace>& traces,
                               const ExtractionOptions& opts) {
  if (traces.empty()) {
    throw InsufficientDataError("efficiency_series: no traces supplied");
  }

  struct FieldAccum {
    double b_field;
    double sum_w_eta = 0.0, sum_w = 0.0;
    double plain_sum = 0.0;
    int count = 0;
  };

  SeriesResult out;
  std::vector<FieldAccum> fields;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const IVTrace& trace = traces[i];
    ExtractionOptions per_trace = opts;
    per_trace.seed = stream_key(opts.seed, kTagTrace, i);
    CriticalCurrentEstimate est;
    try {
      est = extract_critical_currents(trace, per_trace);
    } catch (const std::exception& ex) {
      out.warnings.push_back("skipped field B=" + std::to_string(trace.b_field) +
                             " Oe (" + trace.source + "): " + ex.what());
      continue;
    }

    const double plus = std::abs(est.ic_plus);
    const double minus = std::abs(est.ic_minus);
    const double eta = (plus - minus) / (plus + minus);
    // First-order propagation of Eq-style efficiency in (|I+|, |I-|).
    const double denom2 = (plus + minus) * (plus + minus);
    const double sigma_eta =
        2.0 / denom2 *
        std::hypot(minus * est.sigma_plus, plus * est.sigma_minus);

    auto it = std::find_if(fields.begin(), fields.end(), [&](const FieldAccum& f) {
      return f.b_field == trace.b_field;
    });
    if (it == fields.end()) {
      fields.push_back({trace.b_field});
      it = fields.end() - 1;
    }
    it->count += 1;
    it->plain_sum += eta;
    if (sigma_eta > 0.0) {
      const double w = 1.0 / (sigma_eta * sigma_eta);
      it->sum_w_eta += w * eta;
      it->sum_w += w;
    }
  }

  for (const FieldAccum& f : fields) {
    EfficiencyPoint p;
    p.b_field = f.b_field;
    if (f.sum_w > 0.0) {
      p.eta = f.sum_w_eta / f.sum_w;
      p.sigma_eta = std::sqrt(1.0 / f.sum_w);
    } else {
      p.eta = f.plain_sum / f.count;
      p.sigma_eta = 0.0;
    }
    out.points.push_back(p);
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const EfficiencyPoint& a, const EfficiencyPoint& b) {
              return a.b_field < b.b_field;
            });
  return out;
}

double sinusoid_model(const EfficiencyFit& fit, double b_field) {
  return fit.a * std::sin(fit.b * b_field + fit.c) + fit.offset;
}

EfficiencyFit fit_sinusoid(const std::vector<EfficiencyPoint>& points,
                           const FitOptions& opts) {
  const std::size_t n = points.size();
  if (n < 4) {
    throw InsufficientDataError("fit_sinusoid: need at least 4 points");
  }

  std::vector<double> bf(n), y(n), w(n, 0.0);
  double b_lo = points[0].b_field, b_hi = points[0].b_field;
  for (std::size_t i = 0; i < n; ++i) {
    bf[i] = points[i].b_field;
    y[i] = points[i].eta;
    b_lo = std::min(b_lo, bf[i]);
    b_hi = std::max(b_hi, bf[i]);
  }
  if (b_hi <= b_lo) {
    throw std::invalid_argument("fit_sinusoid: all points share one field value");
  }

  // Weights 1/sigma^2; zero-sigma points get the median finite weight.
  std::vector<double> finite_w;
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].sigma_eta > 0.0) {
      w[i] = 1.0 / (points[i].sigma_eta * points[i].sigma_eta);
      finite_w.push_back(w[i]);
    }
  }
  double fill = 1.0;
  if (!finite_w.empty()) {
    std::sort(finite_w.begin(), finite_w.end());
    const std::size_t mid = finite_w.size() / 2;
    fill = finite_w.size() % 2 == 1
               ? finite_w[mid]
               : 0.5 * (finite_w[mid - 1] + finite_w[mid]);
  }
  for (double& wi : w) {
    if (wi == 0.0) wi = fill;
  }

  const int n_par = opts.with_offset ? 4 : 3;
  std::vector<double> p(static_cast<std::size_t>(n_par), 0.0);

  if (opts.initial_guess) {
    p[0] = (*opts.initial_guess)[0];
    p[1] = (*opts.initial_guess)[1];
    p[2] = (*opts.initial_guess)[2];
  } else {
    // Dominant-frequency probe: weighted linear fit of p*sin + q*cos over a
    // frequency scan (reduces to the discrete Fourier peak for uniform B).
    double d0 = 0.0;
    if (opts.with_offset) {
      double sw = 0.0, swy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        swy += w[i] * y[i];
      }
      d0 = swy / sw;
    }
    const double span = b_hi - b_lo;
    std::vector<double> sorted_b = bf;
    std::sort(sorted_b.begin(), sorted_b.end());
    double min_gap = span;
    for (std::size_t i = 1; i < sorted_b.size(); ++i) {
      const double gap = sorted_b[i] - sorted_b[i - 1];
      if (gap > 0.0) min_gap = std::min(min_gap, gap);
    }
    const double b_min = 0.1 * 2.0 * std::numbers::pi / span;
    const double b_max = std::numbers::pi / min_gap;
    const int n_cand = 600;
    double best_sse = std::numeric_limits<double>::infinity();
    double best_b = b_min, best_p = 0.0, best_q = 0.0;
    for (int k = 0; k < n_cand; ++k) {
      const double cand = b_min + (b_max - b_min) * k / double(n_cand - 1);
      double sss = 0.0, ssc = 0.0, scc = 0.0, sys = 0.0, syc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = std::sin(cand * bf[i]);
        const double c = std::cos(cand * bf[i]);
        const double yy = y[i] - d0;
        sss += w[i] * s * s;
        ssc += w[i] * s * c;
        scc += w[i] * c * c;
        sys += w[i] * yy * s;
        syc += w[i] * yy * c;
      }
      const double det = sss * scc - ssc * ssc;
      if (std::abs(det) < 1e-300) continue;
      const double pp = (sys * scc - syc * ssc) / det;
      const double qq = (syc * sss - sys * ssc) / det;
      double sse = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double fi =
            pp * std::sin(cand * bf[i]) + qq * std::cos(cand * bf[i]) + d0;
        sse += w[i] * (y[i] - fi) * (y[i] - fi);
      }
      if (sse < best_sse) {
        best_sse = sse;
        best_b = cand;
        best_p = pp;
        best_q = qq;
      }
    }
    p[0] = std::hypot(best_p, best_q);
    p[1] = best_b;
    p[2] = std::atan2(best_q, best_p);
    if (opts.with_offset) p[3] = d0;
  }

  auto sse_of = [&](const std::vector<double>& par) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = par[0] * std::sin(par[1] * bf[i] + par[2]) +
                       (n_par == 4 ? par[3] : 0.0);
      sse += w[i] * (y[i] - f) * (y[i] - f);
    }
    return sse;
  };

  // Weighted normal equations JtJ, Jtr at par.
  auto build_normal = [&](const std::vector<double>& par,
                          std::vector<double>& jtj, std::vector<double>& jtr) {
    jtj.assign(static_cast<std::size_t>(n_par * n_par), 0.0);
    jtr.assign(static_cast<std::size_t>(n_par), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = par[1] * bf[i] + par[2];
      const double s = std::sin(arg);
      const double c = std::cos(arg);
      const double f = par[0] * s + (n_par == 4 ? par[3] : 0.0);
      const double res = y[i] - f;
      double grad[4] = {s, par[0] * bf[i] * c, par[0] * c, 1.0};
      for (int a = 0; a < n_par; ++a) {
        jtr[a] += w[i] * grad[a] * res;
        for (int b = 0; b < n_par; ++b) {
          jtj[a * n_par + b] += w[i] * grad[a] * grad[b];
        }
      }
    }
  };

  double sse = sse_of(p);
  double lambda = 1e-3;
  int iter = 0;
  bool converged = false;
  std::vector<double> jtj, jtr;
  for (; iter < opts.max_iterations && !converged; ++iter) {
    build_normal(p, jtj, jtr);
    bool stepped = false;
    for (int tries = 0; tries < 40; ++tries) {
      std::vector<double> a = jtj;
      for (int d = 0; d < n_par; ++d) {
        a[d * n_par + d] += lambda * std::max(jtj[d * n_par + d], 1e-30);
      }
      std::vector<double> delta = jtr;
      if (!solve_dense(a, delta, n_par, 1)) {
        lambda *= 11.0;
        continue;
      }
      std::vector<double> trial = p;
      for (int d = 0; d < n_par; ++d) trial[d] += delta[d];
      const double trial_sse = sse_of(trial);
      if (trial_sse <= sse) {
        double max_rel = 0.0;
        for (int d = 0; d < n_par; ++d) {
          max_rel = std::max(max_rel,
                             std::abs(delta[d]) / (1.0 + std::abs(p[d])));
        }
        const double improvement = sse - trial_sse;
        p = std::move(trial);
        sse = trial_sse;
        lambda = std::max(lambda / 9.0, 1e-14);
        stepped = true;
        if (max_rel < 1e-13 || improvement <= 1e-15 * (sse + 1e-30)) {
          converged = true;
        }
        break;
      }
      lambda *= 11.0;
      if (lambda > 1e12) break;
    }
    if (!stepped) break;
  }

  EfficiencyFit fit;
  fit.a = p[0];
  fit.b = p[1];
  fit.c = p[2];
  fit.offset = n_par == 4 ? p[3] : 0.0;
  fit.n_points = static_cast<int>(n);
  fit.iterations = iter;
  fit.converged = converged;

  // Canonical form: a >= 0, b >= 0, phase in (-pi, pi].
  if (fit.a < 0.0) {
    fit.a = -fit.a;
    fit.c += std::numbers::pi;
  }
  if (fit.b < 0.0) {
    fit.b = -fit.b;
    fit.c = std::numbers::pi - fit.c;
  }
  fit.c = wrap_phase(fit.c);

  // Scale-aware degeneracy: amplitude indistinguishable from zero makes
  // (b, c) unidentifiable.
  double y_rms = 0.0;
  for (std::size_t i = 0; i < n; ++i) y_rms += y[i] * y[i];
  y_rms = std::sqrt(y_rms / n);
  fit.degenerate = fit.a < 1e-9 * std::max(y_rms, 1e-6);

  // Covariance and weighted R^2 at the canonical parameters.
  std::vector<double> par = {fit.a, fit.b, fit.c};
  if (n_par == 4) par.push_back(fit.offset);
  build_normal(par, jtj, jtr);
  std::vector<double> inv(static_cast<std::size_t>(n_par * n_par), 0.0);
  for (int d = 0; d < n_par; ++d) inv[d * n_par + d] = 1.0;
  if (solve_dense(jtj, inv, n_par, n_par)) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        fit.covariance[r * 3 + c] =
            0.5 * (inv[r * n_par + c] + inv[c * n_par + r]);
      }
    }
  } else {
    fit.degenerate = true;
    fit.covariance.fill(0.0);
  }

  double sw = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    swy += w[i] * y[i];
  }
  const double ybar = swy / sw;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ss_tot += w[i] * (y[i] - ybar) * (y[i] - ybar);
  }
  const double ss_res = sse_of(par);
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  return fit;
}

}  // namespace qdiode
