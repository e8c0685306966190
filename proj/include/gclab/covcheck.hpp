#pragma once

// Numerical certification of mixing covariance inequalities on finite chains:
//   |Cov(f(X_0), g(X_n))| <= 8 alpha^{1/r} ||f||_p ||g||_q   (1/p + 1/q + 1/r = 1)
//   |Cov(f(X_0), g(X_n))| <= 4 alpha ||f||_inf ||g||_inf
//   |Cov(f(X_0), g(X_n))| <= 2 beta  ||f||_inf ||g||_inf

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gclab/error.hpp"
#include "gclab/matrix.hpp"
#include "gclab/mixing.hpp"
#include "gclab/numeric.hpp"
#include "gclab/procgen.hpp"

namespace gclab {

/// Values of a real function at each state of a TransitionModel.
using StateFunction = std::vector<double>;

template <class Fn>
StateFunction on_states(const TransitionModel& model, Fn&& fn) {
  StateFunction out;
  out.reserve(model.size());
  for (double s : model.states()) out.push_back(fn(s));
  return out;
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct HolderTriple {
  double p = 2.0;
  double q = 2.0;
  double r = kInf;

  static double inverse(double e) { return std::isinf(e) ? 0.0 : 1.0 / e; }

  void validate() const {
    for (double e : {p, q, r})
      detail::require(!std::isnan(e) && e >= 1.0, "Holder exponents must be >= 1 or infinity");
    detail::require(std::abs(inverse(p) + inverse(q) + inverse(r) - 1.0) <= 1e-12,
                    "Holder exponents must satisfy 1/p + 1/q + 1/r = 1");
  }
};

enum class InequalityId { kAlpha8, kAlpha4Sup, kBeta2Sup };

inline const char* to_string(InequalityId id) {
  switch (id) {
    case InequalityId::kAlpha8: return "ALPHA_8";
    case InequalityId::kAlpha4Sup: return "ALPHA_4_SUP";
    case InequalityId::kBeta2Sup: return "BETA_2_SUP";
  }
  return "?";
}

inline constexpr double kSlackTolerance = -1e-10;

struct BoundCertificate {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  InequalityId inequality_id = InequalityId::kAlpha8;
  std::string inputs_digest;

  bool pass() const { return slack >= kSlackTolerance; }
};

namespace detail {

inline void check_function(const TransitionModel& model, const StateFunction& f) {
  require(f.size() == model.size(), "state function size must match the number of states");
  for (double v : f) require(std::isfinite(v), "state function values must be finite");
}

inline std::string digest_inputs(const TransitionModel& model, const StateFunction& f,
                                 const StateFunction& g, std::size_t lag,
                                 const std::string& extra) {
  std::string s;
  auto put = [&s](double v) {
    s += format_double(v);
    s += ',';
  };
  for (double v : model.states()) put(v);
  s += '|';
  for (std::size_t i = 0; i < model.size(); ++i)
    for (std::size_t j = 0; j < model.size(); ++j) put(model.transition()(i, j));
  s += '|';
  for (double v : f) put(v);
  s += '|';
  for (double v : g) put(v);
  s += '|' + std::to_string(lag) + '|' + extra;
  return fnv1a_hex(s);
}

inline BoundCertificate make_certificate(InequalityId id, double lhs, double rhs,
                                         std::string digest) {
  BoundCertificate c;
  c.inequality_id = id;
  c.lhs = lhs;
  c.rhs = rhs;
  c.slack = rhs - lhs;
  c.inputs_digest = std::move(digest);
  return c;
}

}  // namespace detail

/// (sum_i pi_i |f_i|^p)^{1/p}; p = inf gives the max over states with positive mass.
inline double norm_p(const TransitionModel& model, const StateFunction& f, double p) {
  detail::check_function(model, f);
  detail::require(!std::isnan(p) && p >= 1.0, "norm_p: p must be >= 1 or infinity");
  const auto& pi = model.stationary();
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (pi[i] > 0.0) m = std::max(m, std::abs(f[i]));
  if (std::isinf(p) || m == 0.0) return m;
  // Scaled by the essential max so large p neither underflows nor overflows.
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (pi[i] > 0.0) s += pi[i] * std::pow(std::abs(f[i]) / m, p);
  return m * std::pow(s, 1.0 / p);
}

/// Cov(f(X_0), g(X_lag)) under the stationary chain.
inline double cov_exact(const TransitionModel& model, const StateFunction& f,
                        const StateFunction& g, std::size_t lag) {
  detail::check_function(model, f);
  detail::check_function(model, g);
  const auto& pi = model.stationary();
  const std::size_t k = model.size();
  double ef = 0.0, eg = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    ef += pi[i] * f[i];
    eg += pi[i] * g[i];
  }
  double joint = 0.0;
  if (lag == 0) {
    for (std::size_t i = 0; i < k; ++i) joint += pi[i] * f[i] * g[i];
  } else {
    const Matrix pn = stochastic_power(model.transition(), lag);
    for (std::size_t i = 0; i < k; ++i) {
      double cond = 0.0;
      for (std::size_t j = 0; j < k; ++j) cond += pn(i, j) * g[j];
      joint += pi[i] * f[i] * cond;
    }
  }
  return joint - ef * eg;
}

inline BoundCertificate check_alpha_holder(const TransitionModel& model, const StateFunction& f,
                                           const StateFunction& g, std::size_t lag,
                                           const HolderTriple& triple) {
  triple.validate();
  const double lhs = std::abs(cov_exact(model, f, g, lag));
  const double alpha = alpha_markov_exact(model, lag);
  const double rhs = 8.0 * std::pow(alpha, HolderTriple::inverse(triple.r)) *
                     norm_p(model, f, triple.p) * norm_p(model, g, triple.q);
  const std::string extra = format_double(triple.p) + ',' + format_double(triple.q) + ',' +
                            format_double(triple.r);
  return detail::make_certificate(InequalityId::kAlpha8, lhs, rhs,
                                  detail::digest_inputs(model, f, g, lag, extra));
}

inline BoundCertificate check_alpha_sup(const TransitionModel& model, const StateFunction& f,
                                        const StateFunction& g, std::size_t lag) {
  const double lhs = std::abs(cov_exact(model, f, g, lag));
  const double rhs =
      4.0 * alpha_markov_exact(model, lag) * norm_p(model, f, kInf) * norm_p(model, g, kInf);
  return detail::make_certificate(InequalityId::kAlpha4Sup, lhs, rhs,
                                  detail::digest_inputs(model, f, g, lag, "sup"));
}

inline BoundCertificate check_beta_sup(const TransitionModel& model, const StateFunction& f,
                                       const StateFunction& g, std::size_t lag) {
  const double lhs = std::abs(cov_exact(model, f, g, lag));
  const double rhs =
      2.0 * beta_markov_exact(model, lag) * norm_p(model, f, kInf) * norm_p(model, g, kInf);
  return detail::make_certificate(InequalityId::kBeta2Sup, lhs, rhs,
                                  detail::digest_inputs(model, f, g, lag, "beta"));
}

/// Random row-stochastic chain with k states 0..k-1 (entries from U(0,1), normalized).
inline TransitionModel random_model(CounterRng& rng, std::size_t k) {
  Matrix p(k);
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      p(i, j) = rng.uniform() + 1e-3;
      s += p(i, j);
    }
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < k; ++j) {
      p(i, j) /= s;
      acc += p(i, j);
    }
    p(i, k - 1) = 1.0 - acc;
  }
  std::vector<double> states(k);
  for (std::size_t i = 0; i < k; ++i) states[i] = static_cast<double>(i);
  return TransitionModel::from_matrix(std::move(states), std::move(p));
}

struct SweepSummary {
  std::size_t cases = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
  double min_slack = kInf;
  std::vector<BoundCertificate> certificates;
};

/// Randomized sweep: each case draws a model (k in [k_min, k_max]), bounded
/// f and g, a lag in [1, max_lag] and a Holder triple, and runs all three checks.
inline SweepSummary covariance_sweep(std::uint64_t seed, std::size_t cases, std::size_t k_min = 2,
                                     std::size_t k_max = 6, std::size_t max_lag = 5,
                                     bool keep_certificates = false) {
  detail::require(k_min >= 1 && k_min <= k_max, "sweep: need 1 <= k_min <= k_max");
  detail::require(k_max <= kMaxExactAlphaStates, "sweep: k_max exceeds the exact alpha cap");
  detail::require(max_lag >= 1, "sweep: max_lag must be >= 1");
  SweepSummary out;
  out.cases = cases;
  for (std::size_t c = 0; c < cases; ++c) {
    CounterRng rng(seed, c);
    const std::size_t k = k_min + static_cast<std::size_t>(rng.uniform() * (k_max - k_min + 1));
    const TransitionModel model = random_model(rng, k);
    StateFunction f(k), g(k);
    for (auto& v : f) v = 4.0 * rng.uniform() - 2.0;
    for (auto& v : g) v = 4.0 * rng.uniform() - 2.0;
    const std::size_t lag = 1 + static_cast<std::size_t>(rng.uniform() * max_lag);
    // p, q drawn from [1, 8] with 1/p + 1/q <= 1, r closes the triple.
    double p = 1.0 + 7.0 * rng.uniform();
    double q_inv_max = 1.0 - 1.0 / p;
    double q_inv = q_inv_max * rng.uniform();
    HolderTriple triple;
    triple.p = p;
    triple.q = q_inv > 0.0 ? 1.0 / q_inv : kInf;
    const double r_inv = 1.0 - 1.0 / p - q_inv;
    triple.r = r_inv > 0.0 ? 1.0 / r_inv : kInf;
    if (triple.q < 1.0) triple.q = 1.0;
    for (const auto& cert : {check_alpha_holder(model, f, g, lag, triple),
                             check_alpha_sup(model, f, g, lag), check_beta_sup(model, f, g, lag)}) {
      ++out.checks;
      if (!cert.pass()) ++out.violations;
      out.min_slack = std::min(out.min_slack, cert.slack);
      if (keep_certificates) out.certificates.push_back(cert);
    }
  }
  return out;
}

}  // namespace gclab
