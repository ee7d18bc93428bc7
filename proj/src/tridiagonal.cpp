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

#include "qdiode/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qdiode/errors.hpp"
#include "qdiode/rng.hpp"

namespace qdiode {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double norm_inf(const TridiagonalMatrix& t) {
  const std::size_t n = t.size();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = std::abs(t.diag[i]);
    if (i > 0) row += std::abs(t.off[i - 1]);
    if (i + 1 < n) row += std::abs(t.off[i]);
    best = std::max(best, row);
  }
  return best;
}

double pivot_floor(const TridiagonalMatrix& t) {
  double max_off2 = 1.0;
  for (double e : t.off) max_off2 = std::max(max_off2, e * e);
  return std::numeric_limits<double>::min() * max_off2;
}

// LU factorization of (T - lambda I) with partial pivoting, LAPACK dgttrf
// style: dl holds multipliers, du2 the second superdiagonal fill-in.
struct ShiftedLU {
  std::vector<double> dl, d, du, du2;
  std::vector<int> swapped;  // 1 where rows i, i+1 were interchanged
};

ShiftedLU factor_shifted(const TridiagonalMatrix& t, double lambda,
                         double pivmin) {
  const std::size_t n = t.size();
  ShiftedLU lu;
  lu.d.resize(n);
  lu.dl.assign(n > 0 ? n - 1 : 0, 0.0);
  lu.du.assign(n > 0 ? n - 1 : 0, 0.0);
  lu.du2.assign(n > 1 ? n - 2 : 0, 0.0);
  lu.swapped.assign(n > 0 ? n - 1 : 0, 0);
  for (std::size_t i = 0; i < n; ++i) lu.d[i] = t.diag[i] - lambda;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    lu.dl[i] = t.off[i];
    lu.du[i] = t.off[i];
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(lu.d[i]) >= std::abs(lu.dl[i])) {
      if (std::abs(lu.d[i]) < pivmin) {
        lu.d[i] = (lu.d[i] < 0.0 ? -pivmin : pivmin);
      }
      const double fact = lu.dl[i] / lu.d[i];
      lu.dl[i] = fact;
      lu.d[i + 1] -= fact * lu.du[i];
      if (i + 2 < n) lu.du2[i] = 0.0;
    } else {
      const double fact = lu.d[i] / lu.dl[i];
      lu.d[i] = lu.dl[i];
      lu.dl[i] = fact;
      const double temp = lu.du[i];
      lu.du[i] = lu.d[i + 1];
      lu.d[i + 1] = temp - fact * lu.d[i + 1];
      if (i + 2 < n) {
        lu.du2[i] = lu.du[i + 1];
        lu.du[i + 1] = -fact * lu.du[i + 1];
      }
      lu.swapped[i] = 1;
    }
  }
  if (!lu.d.empty() && std::abs(lu.d[n - 1]) < pivmin) {
    lu.d[n - 1] = (lu.d[n - 1] < 0.0 ? -pivmin : pivmin);
  }
  return lu;
}

void solve_in_place(const ShiftedLU& lu, std::vector<double>& b) {
  const std::size_t n = lu.d.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!lu.swapped[i]) {
      b[i + 1] -= lu.dl[i] * b[i];
    } else {
      const double temp = b[i];
      b[i] = b[i + 1];
      b[i + 1] = temp - lu.dl[i] * b[i];
    }
  }
  b[n - 1] /= lu.d[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - lu.du[n - 2] * b[n - 1]) / lu.d[n - 2];
  for (std::size_t ip = n; ip >= 3; --ip) {
    const std::size_t i = ip - 3;
    b[i] = (b[i] - lu.du[i] * b[i + 1] - lu.du2[i] * b[i + 2]) / lu.d[i];
  }
}

double vec_norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

void validate(const TridiagonalMatrix& t) {
  if (t.size() == 0) throw std::invalid_argument("tridiagonal: empty matrix");
  if (t.off.size() + 1 != t.diag.size()) {
    throw std::invalid_argument("tridiagonal: off-diagonal size must be n-1");
  }
  for (double x : t.diag) {
    if (!std::isfinite(x)) throw std::invalid_argument("tridiagonal: non-finite diagonal");
  }
  for (double x : t.off) {
    if (!std::isfinite(x)) throw std::invalid_argument("tridiagonal: non-finite off-diagonal");
  }
}

int eigenvalue_count_below(const TridiagonalMatrix& t, double x) {
  const std::size_t n = t.size();
  const double pivmin = pivot_floor(t);
  int count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e2 = (i == 0) ? 0.0 : t.off[i - 1] * t.off[i - 1];
    q = t.diag[i] - x - (i == 0 ? 0.0 : e2 / q);
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

std::vector<double> lowest_eigenvalues(const TridiagonalMatrix& t, std::size_t k) {
  validate(t);
  const std::size_t n = t.size();
  if (k == 0 || k > n) {
    throw std::invalid_argument("lowest_eigenvalues: need 1 <= k <= n");
  }

  // Gershgorin interval containing the whole spectrum.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(t.off[i - 1]);
    if (i + 1 < n) r += std::abs(t.off[i]);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  const double span = std::max(hi - lo, 1.0);
  lo -= kEps * span;
  hi += kEps * span;

  std::vector<double> values(k);
  double prev = lo;
  for (std::size_t j = 0; j < k; ++j) {
    double a = prev;  // eigenvalues come out ascending, reuse left edge
    double b = hi;
    for (int it = 0; it < 200 && (b - a) > 2.0 * kEps * std::max(std::abs(a), std::abs(b)); ++it) {
      const double mid = 0.5 * (a + b);
      if (eigenvalue_count_below(t, mid) > static_cast<int>(j)) {
        b = mid;
      } else {
        a = mid;
      }
    }
    values[j] = 0.5 * (a + b);
    prev = a;
  }
  return values;
}

TridiagonalEigen lowest_eigenpairs(const TridiagonalMatrix& t, std::size_t k,
                                   std::uint64_t seed) {
  TridiagonalEigen out;
  out.values = lowest_eigenvalues(t, k);
  out.vectors.resize(k);

  const std::size_t n = t.size();
  const double tnorm = norm_inf(t);
  const double pivmin = pivot_floor(t);
  // Orthogonalize inverse-iteration vectors whose eigenvalues sit closer
  // than this; generous grouping costs little at these sizes.
  const double cluster_tol = 1e-3 * std::max(tnorm, 1.0);
  const double res_tol = 1e3 * kEps * std::max(tnorm, 1.0);

  for (std::size_t j = 0; j < k; ++j) {
    // The pivot floor keeps the nearly singular factorization benign.
    const ShiftedLU lu = factor_shifted(t, out.values[j], pivmin);

    std::size_t first_in_cluster = j;
    while (first_in_cluster > 0 &&
           out.values[j] - out.values[first_in_cluster - 1] < cluster_tol) {
      --first_in_cluster;
    }

    bool ok = false;
    std::string diag_msg;
    for (int attempt = 0; attempt < 4 && !ok; ++attempt) {
      RngStream rng(stream_key(seed, 0x1e9e4u, j, attempt));
      std::vector<double> v(n);
      for (auto& x : v) x = rng.uniform(-1.0, 1.0);
      double nrm = vec_norm2(v);
      for (auto& x : v) x /= nrm;

      for (int iter = 0; iter < 5; ++iter) {
        solve_in_place(lu, v);
        for (std::size_t p = first_in_cluster; p < j; ++p) {
          const auto& w = out.vectors[p];
          double dot = 0.0;
          for (std::size_t q = 0; q < n; ++q) dot += w[q] * v[q];
          for (std::size_t q = 0; q < n; ++q) v[q] -= dot * w[q];
        }
        nrm = vec_norm2(v);
        if (nrm == 0.0) break;
        for (auto& x : v) x /= nrm;
      }
      if (nrm == 0.0) {
        diag_msg = "orthogonalization annihilated iterate";
        continue;
      }

      // Residual ||T v - lambda v||_inf.
      double res = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double y = t.diag[i] * v[i];
        if (i > 0) y += t.off[i - 1] * v[i - 1];
        if (i + 1 < n) y += t.off[i] * v[i + 1];
        res = std::max(res, std::abs(y - out.values[j] * v[i]));
      }
      if (res <= res_tol) {
        out.vectors[j] = std::move(v);
        ok = true;
      } else {
        diag_msg = "residual " + std::to_string(res) + " > tol " +
                   std::to_string(res_tol);
      }
    }
    if (!ok) {
      throw ConvergenceError(
          "inverse iteration failed for eigenvalue index " + std::to_string(j) +
          " (" + diag_msg + ", 4 restarts of 5 iterations)");
    }

    // Sign convention: first component of appreciable size is positive.
    auto& v = out.vectors[j];
    double vmax = 0.0;
    for (double x : v) vmax = std::max(vmax, std::abs(x));
    for (double x : v) {
      if (std::abs(x) > 1e-6 * vmax) {
        if (x < 0.0) {
          for (auto& y : v) y = -y;
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace qdiode
