#pragma once

// Strong mixing (alpha) and absolute regularity (beta) coefficients: exact
// values for finite-state chains, per-event modulus estimates from paths,
// and polynomial decay fits against the (1+delta)/(1-delta) threshold.
//
// For a Markov chain the coefficients between the full past and future
// sigma-algebras reduce to the pair (sigma(X_0), sigma(X_n)). Every exact
// profile records this reduction in its note.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gclab/error.hpp"
#include "gclab/matrix.hpp"
#include "gclab/numeric.hpp"
#include "gclab/procgen.hpp"

namespace gclab {

enum class MixingKind { kAlpha, kBeta };

inline const char* to_string(MixingKind k) { return k == MixingKind::kAlpha ? "ALPHA" : "BETA"; }

inline constexpr double kAlphaUpperBound = 0.25;
inline constexpr std::size_t kMaxExactAlphaStates = 20;

struct Provenance {
  bool exact = true;
  std::size_t reps = 0;         // ESTIMATED only
  std::size_t path_length = 0;  // ESTIMATED only

  static Provenance exact_value() { return {}; }
  static Provenance estimated(std::size_t reps, std::size_t path_length) {
    return {false, reps, path_length};
  }
  std::string label() const { return exact ? "EXACT" : "ESTIMATED"; }
};

/// Least-squares fit value ~ c * lag^(-a) in log-log space.
struct DecayFit {
  double c = 0.0;
  double a = 0.0;
  double rms_residual = 0.0;     // log units
  std::size_t used_points = 0;
  std::size_t dropped_zeros = 0;
  /// Set when a log-linear (geometric) model fits markedly better than any power law.
  bool super_polynomial = false;
  double geometric_rate = 0.0;   // r in value ~ exp(-r * lag), when super_polynomial
  std::string note;
};

struct MixingProfile {
  MixingKind kind = MixingKind::kAlpha;
  std::vector<std::size_t> lags;
  std::vector<double> values;
  Provenance provenance;
  std::optional<DecayFit> fit;
  std::string note;

  void validate() const {
    detail::require(lags.size() == values.size(), "profile: lags and values differ in length");
    const double hi = kind == MixingKind::kAlpha ? kAlphaUpperBound : 1.0;
    for (std::size_t i = 0; i < lags.size(); ++i) {
      detail::require(lags[i] >= 1, "profile: lags must be positive");
      detail::require(i == 0 || lags[i - 1] < lags[i], "profile: lags must strictly increase");
      detail::require(values[i] >= 0.0 && values[i] <= hi + 1e-12,
                      "profile: coefficient outside its admissible range");
    }
  }
};

namespace detail {

/// D_ij = P(X_0 = i, X_n = j) - P(X_0 = i) P(X_n = j).
inline Matrix dependence_matrix(const TransitionModel& model, std::size_t n) {
  const auto& pi = model.stationary();
  Matrix pn = stochastic_power(model.transition(), n);
  const std::size_t k = model.size();
  Matrix d(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) d(i, j) = pi[i] * pn(i, j) - pi[i] * pi[j];
  return d;
}

}  // namespace detail

/// Exact alpha(sigma(X_0), sigma(X_n)) for a stationary finite chain.
///
/// Enumerates the 2^k events A for X_0 in Gray-code order; for each A the
/// best event B is the set of states with positive column sum, so the inner
/// maximization is linear in k.
inline double alpha_markov_exact(const TransitionModel& model, std::size_t n) {
  detail::require(n >= 1, "alpha_markov_exact: lag must be >= 1");
  const std::size_t k = model.size();
  if (k > kMaxExactAlphaStates)
    throw FeasibilityError("alpha_markov_exact: " + std::to_string(k) +
                           " states exceeds the enumeration cap of 20; use beta_markov_exact "
                           "(alpha <= beta) or alpha_modulus_estimate");
  const Matrix d = detail::dependence_matrix(model, n);
  std::vector<double> col(k, 0.0);
  double best = 0.0;
  const std::size_t subsets = std::size_t{1} << k;
  std::size_t gray_prev = 0;
  for (std::size_t step = 1; step < subsets; ++step) {
    const std::size_t gray = step ^ (step >> 1);
    const std::size_t flipped = gray ^ gray_prev;
    const auto bit = static_cast<std::size_t>(__builtin_ctzll(flipped));
    const double sign = (gray & flipped) ? 1.0 : -1.0;
    double pos = 0.0, neg = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      col[j] += sign * d(bit, j);
      if (col[j] > 0.0) pos += col[j]; else neg -= col[j];
    }
    best = std::max({best, pos, neg});
    gray_prev = gray;
  }
  return std::clamp(best, 0.0, kAlphaUpperBound);
}

/// Exact beta(sigma(X_0), sigma(X_n)) = sum_i pi_i * TV(P^n(i, .), pi).
inline double beta_markov_exact(const TransitionModel& model, std::size_t n) {
  detail::require(n >= 1, "beta_markov_exact: lag must be >= 1");
  const auto& pi = model.stationary();
  const Matrix pn = stochastic_power(model.transition(), n);
  double total = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    double tv = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j) tv += std::abs(pn(i, j) - pi[j]);
    total += pi[i] * 0.5 * tv;
  }
  return std::clamp(total, 0.0, 1.0);
}

/// Exact profile over the given lags.
inline MixingProfile exact_profile(const TransitionModel& model, MixingKind kind,
                                   std::vector<std::size_t> lags) {
  MixingProfile prof;
  prof.kind = kind;
  prof.provenance = Provenance::exact_value();
  prof.note = "Markov reduction: coefficient computed for the pair (sigma(X_0), sigma(X_n))";
  prof.values.reserve(lags.size());
  for (std::size_t lag : lags)
    prof.values.push_back(kind == MixingKind::kAlpha ? alpha_markov_exact(model, lag)
                                                     : beta_markov_exact(model, lag));
  prof.lags = std::move(lags);
  prof.validate();
  return prof;
}

inline constexpr std::size_t kMinModulusOverlap = 30;

/// Estimate of alpha(x, n): the absolute lag-n autocovariance of the
/// indicator series 1{X_t <= x}. For two binary sigma-algebras the sup over
/// events equals this single covariance magnitude.
inline double alpha_modulus_estimate(const SamplePath& path, double x, std::size_t n) {
  const auto& v = path.values;
  detail::require(n >= 1, "alpha_modulus_estimate: lag must be >= 1");
  if (v.size() <= n + kMinModulusOverlap)
    throw InsufficientDataError("alpha_modulus_estimate: path of length " +
                                std::to_string(v.size()) + " too short for lag " +
                                std::to_string(n) + " (need > lag + 30)");
  double mean = 0.0;
  for (double xv : v) mean += (xv <= x) ? 1.0 : 0.0;
  mean /= static_cast<double>(v.size());
  double joint = 0.0;
  const std::size_t pairs = v.size() - n;
  for (std::size_t t = 0; t < pairs; ++t)
    joint += (v[t] <= x && v[t + n] <= x) ? 1.0 : 0.0;
  joint /= static_cast<double>(pairs);
  return std::min(std::abs(joint - mean * mean), kAlphaUpperBound);
}

/// Fits value ~ c * lag^(-a) by OLS on log-log values, dropping exact zeros.
inline DecayFit fit_decay(const MixingProfile& profile) {
  std::vector<double> log_lag, log_val, lag_lin;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < profile.values.size(); ++i) {
    if (profile.values[i] > 0.0) {
      log_lag.push_back(std::log(static_cast<double>(profile.lags[i])));
      lag_lin.push_back(static_cast<double>(profile.lags[i]));
      log_val.push_back(std::log(profile.values[i]));
    } else {
      ++dropped;
    }
  }
  if (log_val.size() < 3)
    throw FitUndefinedError("fit_decay: need at least 3 strictly positive values, got " +
                            std::to_string(log_val.size()));
  const LinearFit power = ols(log_lag, log_val);
  const LinearFit geometric = ols(lag_lin, log_val);
  DecayFit fit;
  fit.c = std::exp(power.intercept);
  fit.a = -power.slope;
  fit.rms_residual = power.rms_residual;
  fit.used_points = log_val.size();
  fit.dropped_zeros = dropped;
  fit.super_polynomial = geometric.slope < 0.0 &&
                         geometric.rms_residual <= 0.5 * power.rms_residual &&
                         geometric.rms_residual <= 0.1;
  if (fit.super_polynomial) {
    fit.geometric_rate = -geometric.slope;
    fit.note = "super-polynomial";
  }
  if (dropped > 0) {
    if (!fit.note.empty()) fit.note += "; ";
    fit.note += std::to_string(dropped) + " zero value(s) excluded";
  }
  return fit;
}

/// Decay exponent (1+delta)/(1-delta) sufficient for the GC conclusion.
struct RateThreshold {
  double delta;
  double exponent;

  explicit RateThreshold(double d) : delta(d), exponent(0.0) {
    detail::require(d > 0.0 && d < 1.0, "threshold: delta must lie in (0, 1)");
    exponent = (1.0 + d) / (1.0 - d);
  }
};

enum class ThresholdVerdict { kSatisfied, kViolated, kInconclusive };

inline const char* to_string(ThresholdVerdict v) {
  switch (v) {
    case ThresholdVerdict::kSatisfied: return "SATISFIED";
    case ThresholdVerdict::kViolated: return "VIOLATED";
    case ThresholdVerdict::kInconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

struct ThresholdResult {
  ThresholdVerdict verdict = ThresholdVerdict::kInconclusive;
  double required_exponent = 0.0;
  std::optional<DecayFit> fit;
  std::string reason;
};

/// Log-residual above which a power-law fit is not trusted.
inline constexpr double kFitResidualTolerance = 0.1;
/// Slack on the exponent comparison; absorbs rounding in (1+d)/(1-d) and the fit.
inline constexpr double kExponentSlack = 1e-9;

inline ThresholdResult threshold_check(const MixingProfile& profile, double delta) {
  const RateThreshold thr(delta);
  detail::require(!profile.values.empty(), "threshold_check: profile is empty");
  profile.validate();
  ThresholdResult out;
  out.required_exponent = thr.exponent;
  if (profile.values.back() == 0.0) {
    out.verdict = ThresholdVerdict::kSatisfied;
    out.reason = "coefficients vanish identically beyond some lag";
    return out;
  }
  try {
    out.fit = fit_decay(profile);
  } catch (const FitUndefinedError& e) {
    out.reason = e.what();
    return out;
  }
  const DecayFit& f = *out.fit;
  if (f.super_polynomial) {
    out.verdict = ThresholdVerdict::kSatisfied;
    out.reason = "geometric decay beats every polynomial rate";
  } else if (f.rms_residual > kFitResidualTolerance) {
    out.reason = "power-law fit residual too large";
  } else if (f.a >= thr.exponent - kExponentSlack) {
    out.verdict = ThresholdVerdict::kSatisfied;
    out.reason = "fitted exponent meets the required rate";
  } else {
    out.verdict = ThresholdVerdict::kViolated;
    out.reason = "fitted exponent below the required rate";
  }
  return out;
}

}  // namespace gclab
