#pragma once

// Empirical measures and exact sup-norm deviations of the empirical CDF.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gclab/error.hpp"
#include "gclab/numeric.hpp"
#include "gclab/parallel.hpp"
#include "gclab/procgen.hpp"

namespace gclab {

/// Right-continuous empirical CDF with steps of 1/n.
class Ecdf {
 public:
  explicit Ecdf(std::span<const double> values) : sorted_(values.begin(), values.end()) {
    detail::require(!sorted_.empty(), "Ecdf: need at least one value");
    std::sort(sorted_.begin(), sorted_.end());
  }

  double operator()(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

  std::size_t n() const noexcept { return sorted_.size(); }
  const std::vector<double>& sorted_values() const noexcept { return sorted_; }

 private:
  std::vector<double> sorted_;
};

/// P_n(f) = (1/n) sum f(X_i).
template <class Fn>
double pn_f(const SamplePath& path, Fn&& f) {
  detail::require(!path.values.empty(), "pn_f: empty path");
  double s = 0.0;
  for (double v : path.values) s += f(v);
  return s / static_cast<double>(path.values.size());
}

/// P_n(C) = (1/n) #{i : X_i in C}.
template <class Pred>
double pn_set(const SamplePath& path, Pred&& contains) {
  return pn_f(path, [&](double v) { return contains(v) ? 1.0 : 0.0; });
}

/// sup_x |F_n(x) - F(x)| evaluated exactly. Between consecutive distinct
/// sample values F_n is constant and F monotone, so the sup over each gap is
/// reached at F(left) or at the left limit F(right-); atoms of F are handled
/// through the left limits.
inline double ecdf_sup_deviation(std::span<const double> values, const MarginalLaw& law) {
  detail::require(!values.empty(), "ecdf_sup_deviation: need at least one value");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = law.cdf_left(v.front());
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const double fn = static_cast<double>(j) / n;
    const double f_here = law.cdf(v[i]);
    d = std::max(d, std::abs(fn - f_here));
    const double f_next = j < v.size() ? law.cdf_left(v[j]) : 1.0;
    d = std::max(d, std::abs(fn - f_next));
    i = j;
  }
  return std::clamp(d, 0.0, 1.0);
}

inline double ecdf_sup_deviation(const SamplePath& path, const MarginalLaw& law) {
  return ecdf_sup_deviation(path.values, law);
}

struct PowerFit {
  double c = 0.0;
  double b = 0.0;  // mean ~ c * n^{-b}
  double rms_residual = 0.0;
};

struct ConvergenceSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
};

struct ConvergenceStudy {
  std::string spec_label;
  bool iid = false;
  std::uint64_t seed = 0;
  std::vector<std::size_t> n_grid;
  std::size_t reps = 0;
  std::vector<std::vector<double>> deviations;  // [n index][rep]
  std::vector<ConvergenceSummary> summary;
  std::optional<PowerFit> fit;
  std::string note =
      "decay fitted on the mean deviation (median also reported); replication r uses "
      "stream r and evaluates nested prefixes of one path";
};

namespace detail {

inline double sorted_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.size() == 1) return sorted[0];
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - w) + sorted[hi] * w;
}

}  // namespace detail

inline ConvergenceStudy convergence_study(const ProcessSpec& spec, std::vector<std::size_t> n_grid,
                                          std::size_t reps, std::uint64_t seed,
                                          unsigned threads = 1) {
  detail::require(reps >= 1, "convergence_study: reps must be >= 1");
  detail::require(!n_grid.empty(), "convergence_study: n_grid must not be empty");
  for (std::size_t j = 0; j < n_grid.size(); ++j)
    detail::require(n_grid[j] >= 1 && (j == 0 || n_grid[j - 1] < n_grid[j]),
                    "convergence_study: n_grid must be positive and strictly ascending");
  const MarginalLaw law = marginal_law(spec);
  ConvergenceStudy study;
  study.spec_label = spec.label;
  study.iid = spec.is_iid();
  study.seed = seed;
  study.reps = reps;
  study.n_grid = std::move(n_grid);
  const std::size_t n_max = study.n_grid.back();
  study.deviations.assign(study.n_grid.size(), std::vector<double>(reps, 0.0));

  parallel_for(reps, threads, [&](std::size_t r) {
    const SamplePath path = generate(spec, n_max, seed, r);
    for (std::size_t j = 0; j < study.n_grid.size(); ++j)
      study.deviations[j][r] = ecdf_sup_deviation(
          std::span<const double>(path.values.data(), study.n_grid[j]), law);
  });

  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < study.n_grid.size(); ++j) {
    std::vector<double> d = study.deviations[j];
    std::sort(d.begin(), d.end());
    ConvergenceSummary s;
    s.n = study.n_grid[j];
    for (double v : d) s.mean += v;
    s.mean /= static_cast<double>(d.size());
    s.median = detail::sorted_quantile(d, 0.5);
    s.q10 = detail::sorted_quantile(d, 0.1);
    s.q90 = detail::sorted_quantile(d, 0.9);
    s.max = d.back();
    study.summary.push_back(s);
    if (s.mean > 0.0) {
      lx.push_back(std::log(static_cast<double>(s.n)));
      ly.push_back(std::log(s.mean));
    }
  }
  if (lx.size() >= 2) {
    const LinearFit f = ols(lx, ly);
    study.fit = PowerFit{std::exp(f.intercept), -f.slope, f.rms_residual};
  }
  return study;
}

struct DkwRow {
  std::size_t n = 0;
  double epsilon = 0.0;
  double bound = 0.0;
  double observed = 0.0;
  double allowance = 0.0;  // bound + 3 binomial standard errors
  bool pass = true;
};

struct DkwReport {
  std::vector<DkwRow> rows;
  bool pass = true;
};

/// Frequency of {deviation > eps} against 2 exp(-2 n eps^2) plus three
/// binomial standard errors at the bound. Only meaningful for iid data.
inline DkwReport dkw_tail_check(const ConvergenceStudy& study,
                                std::vector<double> epsilons = {0.05, 0.1}) {
  if (!study.iid)
    throw ValidationError("dkw_tail_check: the DKW bound applies to iid studies only");
  DkwReport rep;
  const double reps = static_cast<double>(study.reps);
  for (std::size_t j = 0; j < study.n_grid.size(); ++j) {
    for (double eps : epsilons) {
      DkwRow row;
      row.n = study.n_grid[j];
      row.epsilon = eps;
      row.bound = 2.0 * std::exp(-2.0 * static_cast<double>(row.n) * eps * eps);
      std::size_t hits = 0;
      for (double d : study.deviations[j]) hits += d > eps ? 1 : 0;
      row.observed = static_cast<double>(hits) / reps;
      const double p = std::min(row.bound, 1.0);
      row.allowance = row.bound + 3.0 * std::sqrt(p * (1.0 - p) / reps);
      row.pass = row.bound >= 1.0 || row.observed <= row.allowance;
      rep.pass = rep.pass && row.pass;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

}  // namespace gclab
