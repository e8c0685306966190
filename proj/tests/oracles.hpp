#pragma once

// Test-only reference computations. These deliberately avoid the library's
// code paths (no repeated squaring, no Gray-code search, no lag collapse).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat naive_power(const Mat& p, std::size_t n) {
  const std::size_t k = p.size();
  Mat r(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) r[i][i] = 1.0;
  for (std::size_t step = 0; step < n; ++step) {
    Mat next(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        for (std::size_t l = 0; l < k; ++l) next[i][j] += r[i][l] * p[l][j];
    r = next;
  }
  return r;
}

/// sup over all event pairs (A, B) of |P(X0 in A, Xn in B) - P(A) P(B)|.
inline double alpha_brute(const Mat& p, const std::vector<double>& pi, std::size_t n) {
  const std::size_t k = p.size();
  const Mat pn = naive_power(p, n);
  double best = 0.0;
  for (std::size_t a = 0; a < (1u << k); ++a)
    for (std::size_t b = 0; b < (1u << k); ++b) {
      double joint = 0.0, pa = 0.0, pb = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        if ((a >> i) & 1u) pa += pi[i];
        if ((b >> i) & 1u) pb += pi[i];
        for (std::size_t j = 0; j < k; ++j)
          if (((a >> i) & 1u) && ((b >> j) & 1u)) joint += pi[i] * pn[i][j];
      }
      best = std::max(best, std::abs(joint - pa * pb));
    }
  return best;
}

/// (1/2) sum_{i,j} |P(X0=i, Xn=j) - pi_i pi_j|, the finest-partition beta.
inline double beta_tv(const Mat& p, const std::vector<double>& pi, std::size_t n) {
  const Mat pn = naive_power(p, n);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j) s += std::abs(pi[i] * pn[i][j] - pi[i] * pi[j]);
  return 0.5 * s;
}

inline double cov_direct(const Mat& p, const std::vector<double>& pi, const std::vector<double>& f,
                         const std::vector<double>& g, std::size_t lag) {
  const Mat pn = naive_power(p, lag);
  double ef = 0.0, eg = 0.0, joint = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    ef += pi[i] * f[i];
    eg += pi[i] * g[i];
    for (std::size_t j = 0; j < p.size(); ++j) joint += pi[i] * pn[i][j] * f[i] * g[j];
  }
  return joint - ef * eg;
}

/// Var(sum_{i=1}^m f(X_i)) as the full double sum of pairwise covariances.
inline double var_sum_direct(const Mat& p, const std::vector<double>& pi,
                             const std::vector<double>& f, std::size_t m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) s += cov_direct(p, pi, f, f, i > j ? i - j : j - i);
  return s;
}

/// max over a uniform grid of |F_n(x) - F(x)|, also probing left limits at
/// the grid points.
inline double sup_deviation_grid(std::vector<double> values, const std::function<double(double)>& cdf,
                                 double lo, double hi, std::size_t points) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double best = 0.0;
  for (std::size_t g = 0; g < points; ++g) {
    const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(points - 1);
    const double fn = static_cast<double>(std::upper_bound(values.begin(), values.end(), x) -
                                          values.begin()) / n;
    best = std::max(best, std::abs(fn - cdf(x)));
  }
  return best;
}

}  // namespace oracle
