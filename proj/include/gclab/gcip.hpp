#pragma once

// Normalized partial-sum variances behind the GC verdicts:
//   s1(q) = q^{-(3-delta)/2} Var(sum_{i=1}^{q} f(X_i))
//   s2(q) = q^{-(3-delta)}   Var(sum_{i=q^2+1}^{(q+1)^2} f(X_i))
// Under stationarity the s2 block is any run of 2q+1 consecutive terms.
// Boundedness over q is judged by a log-log slope on the top half of a
// finite q range; this is a diagnostic, not a proof of the sup over all q.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gclab/covcheck.hpp"
#include "gclab/error.hpp"
#include "gclab/numeric.hpp"
#include "gclab/parallel.hpp"
#include "gclab/procgen.hpp"

namespace gclab {

using RealFunction = std::function<double(double)>;

/// Synthetic stationary autocovariance: Var = gamma0, Cov at lag h >= 1 = gamma(h).
struct CovarianceSequence {
  double gamma0 = 0.25;
  std::function<double(std::size_t)> gamma;
  std::string label = "synthetic";
};

/// gamma(h) = scale * h^{-exponent}, a long-memory surrogate.
inline CovarianceSequence power_law_covariance(double gamma0, double scale, double exponent) {
  detail::require(gamma0 >= 0.0, "covariance injection: gamma0 must be >= 0");
  CovarianceSequence seq;
  seq.gamma0 = gamma0;
  seq.gamma = [scale, exponent](std::size_t h) {
    return scale * std::pow(static_cast<double>(h), -exponent);
  };
  seq.label = "synthetic power-law covariance " + format_double(scale) + "*h^-" +
              format_double(exponent);
  return seq;
}

/// Exact evaluation for IID and MARKOV specifications.
struct ExactSource {
  ProcessSpec spec;
};

/// Replicated-path estimation; replication r uses stream r of `seed`.
struct MonteCarloSource {
  ProcessSpec spec;
  std::size_t reps = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

using GcipSource = std::variant<ExactSource, MonteCarloSource, CovarianceSequence>;

enum class GcipCondition { kS1, kS2 };

/// One member of a function class: an indicator 1{X <= x} or a general f.
struct ClassMember {
  std::string label;
  double x = std::numeric_limits<double>::quiet_NaN();
  RealFunction f;
  std::optional<double> envelope;

  static ClassMember indicator(double x) {
    ClassMember m;
    m.label = "x=" + format_double(x);
    m.x = x;
    m.f = [x](double v) { return v <= x ? 1.0 : 0.0; };
    m.envelope = 1.0;
    return m;
  }
};

/// Var(sum of first m terms) for m = 0..M, with standard errors when estimated.
struct SumVariances {
  std::vector<double> var;
  std::vector<double> se;
};

namespace detail {

inline SumVariances sum_variances_from_autocov(const std::vector<double>& gamma) {
  SumVariances out;
  out.var.assign(gamma.size() + 1, 0.0);
  out.se.assign(gamma.size() + 1, 0.0);
  double lag_sum = 0.0;  // sum_{h=1}^{m-1} gamma_h
  for (std::size_t m = 1; m <= gamma.size(); ++m) {
    if (m >= 2) lag_sum += gamma[m - 1];
    out.var[m] = std::max(0.0, out.var[m - 1] + gamma[0] + 2.0 * lag_sum);
  }
  return out;
}

/// gamma(h) = Cov(f(X_0), f(X_h)) for h = 0..max_lag, via v_h = P v_{h-1}.
inline std::vector<double> markov_autocovariance(const TransitionModel& model,
                                                 const StateFunction& f, std::size_t max_lag) {
  const auto& pi = model.stationary();
  const auto& p = model.transition();
  const std::size_t k = model.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < k; ++i) mean += pi[i] * f[i];
  std::vector<double> gamma(max_lag + 1);
  std::vector<double> v = f, next(k);
  for (std::size_t h = 0; h <= max_lag; ++h) {
    if (h > 0) {
      for (std::size_t i = 0; i < k; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += p(i, j) * v[j];
        next[i] = s;
      }
      std::swap(v, next);
    }
    double joint = 0.0;
    for (std::size_t i = 0; i < k; ++i) joint += pi[i] * f[i] * v[i];
    gamma[h] = joint - mean * mean;
  }
  return gamma;
}

inline double iid_variance(const MarginalLaw& law, const ClassMember& member) {
  if (!std::isnan(member.x)) {
    const double fx = law.cdf(member.x);
    return fx * (1.0 - fx);
  }
  double m1 = 0.0, m2 = 0.0;
  if (!law.is_continuous()) {
    const auto atoms = law.atoms();
    for (double a : atoms) {
      const double w = law.cdf(a) - law.cdf_left(a);
      const double v = member.f(a);
      m1 += w * v;
      m2 += w * v * v;
    }
  } else {
    // Midpoint rule in probability space.
    constexpr std::size_t nodes = std::size_t{1} << 16;
    for (std::size_t i = 0; i < nodes; ++i) {
      const double v = member.f(law.quantile((i + 0.5) / nodes));
      m1 += v;
      m2 += v * v;
    }
    m1 /= nodes;
    m2 /= nodes;
  }
  return std::max(0.0, m2 - m1 * m1);
}

/// Streaming central moments up to order four, mergeable.
struct Moments {
  double n = 0.0, mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;

  void add(double x) {
    const double n1 = n;
    n += 1.0;
    const double delta = x - mean;
    const double dn = delta / n;
    const double dn2 = dn * dn;
    const double term1 = delta * dn * n1;
    mean += dn;
    m4 += term1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * m2 - 4.0 * dn * m3;
    m3 += term1 * dn * (n - 2.0) - 3.0 * dn * m2;
    m2 += term1;
  }

  void merge(const Moments& b) {
    if (b.n == 0.0) return;
    if (n == 0.0) {
      *this = b;
      return;
    }
    const double na = n, nb = b.n, nt = na + nb;
    const double d = b.mean - mean, d2 = d * d, d3 = d2 * d, d4 = d2 * d2;
    const double m2n = m2 + b.m2 + d2 * na * nb / nt;
    const double m3n = m3 + b.m3 + d3 * na * nb * (na - nb) / (nt * nt) +
                       3.0 * d * (na * b.m2 - nb * m2) / nt;
    const double m4n = m4 + b.m4 + d4 * na * nb * (na * na - na * nb + nb * nb) / (nt * nt * nt) +
                       6.0 * d2 * (na * na * b.m2 + nb * nb * m2) / (nt * nt) +
                       4.0 * d * (na * b.m3 - nb * m3) / nt;
    mean += d * nb / nt;
    m2 = m2n;
    m3 = m3n;
    m4 = m4n;
    n = nt;
  }

  double variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }

  /// Standard error of the unbiased sample variance.
  double variance_se() const {
    if (n < 4.0) return std::numeric_limits<double>::infinity();
    const double s2 = variance();
    const double mu4 = m4 / n;
    return std::sqrt(std::max(0.0, (mu4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n));
  }
};

inline std::vector<SumVariances> monte_carlo_sum_variances(const MonteCarloSource& src,
                                                           const std::vector<ClassMember>& members,
                                                           std::size_t max_len) {
  require(src.reps >= 4, "MONTE_CARLO mode needs at least 4 replications");
  for (const auto& m : members)
    require(m.envelope.has_value(),
            "MONTE_CARLO mode needs an envelope bound for member " + m.label);
  const std::size_t blocks = std::min<std::size_t>(src.reps, 32);
  const std::size_t width = members.size() * (max_len + 1);
  std::vector<std::vector<Moments>> partial(blocks, std::vector<Moments>(width));
  parallel_for(blocks, src.threads, [&](std::size_t b) {
    auto& acc = partial[b];
    const std::size_t lo = b * src.reps / blocks, hi = (b + 1) * src.reps / blocks;
    for (std::size_t r = lo; r < hi; ++r) {
      const SamplePath path = generate(src.spec, max_len, src.seed, r);
      for (std::size_t mi = 0; mi < members.size(); ++mi) {
        const auto& mem = members[mi];
        double s = 0.0;
        for (std::size_t t = 0; t < max_len; ++t) {
          const double v = mem.f(path.values[t]);
          if (!(std::abs(v) <= *mem.envelope))
            throw NumericError("member " + mem.label + " exceeds its envelope bound");
          s += v;
          acc[mi * (max_len + 1) + t + 1].add(s);
        }
      }
    }
  });
  for (std::size_t b = 1; b < blocks; ++b)
    for (std::size_t c = 0; c < width; ++c) partial[0][c].merge(partial[b][c]);
  std::vector<SumVariances> out(members.size());
  for (std::size_t mi = 0; mi < members.size(); ++mi) {
    out[mi].var.assign(max_len + 1, 0.0);
    out[mi].se.assign(max_len + 1, 0.0);
    for (std::size_t m = 1; m <= max_len; ++m) {
      const auto& mo = partial[0][mi * (max_len + 1) + m];
      out[mi].var[m] = mo.variance();
      out[mi].se[m] = mo.variance_se();
    }
  }
  return out;
}

inline std::vector<SumVariances> sum_variances(const GcipSource& source,
                                               const std::vector<ClassMember>& members,
                                               std::size_t max_len) {
  if (const auto* mc = std::get_if<MonteCarloSource>(&source)) {
    validate(mc->spec);
    return monte_carlo_sum_variances(*mc, members, max_len);
  }
  if (const auto* seq = std::get_if<CovarianceSequence>(&source)) {
    require(static_cast<bool>(seq->gamma), "covariance injection needs a covariance function");
    std::vector<double> gamma(max_len);
    gamma[0] = seq->gamma0;
    for (std::size_t h = 1; h < max_len; ++h) gamma[h] = seq->gamma(h);
    return std::vector<SumVariances>(members.size(), sum_variances_from_autocov(gamma));
  }
  const auto& spec = std::get<ExactSource>(source).spec;
  validate(spec);
  std::vector<SumVariances> out;
  out.reserve(members.size());
  if (const auto* model = spec.markov_model()) {
    for (const auto& m : members)
      out.push_back(sum_variances_from_autocov(
          markov_autocovariance(*model, on_states(*model, m.f), max_len - 1)));
  } else if (spec.is_iid()) {
    const MarginalLaw law = marginal_law(spec);
    for (const auto& m : members) {
      std::vector<double> gamma(max_len, 0.0);
      gamma[0] = iid_variance(law, m);
      out.push_back(sum_variances_from_autocov(gamma));
    }
  } else {
    throw ValidationError("exact GCIP evaluation needs an IID or MARKOV spec; use MONTE_CARLO");
  }
  return out;
}

inline double s1_exponent(double delta) { return (3.0 - delta) / 2.0; }
inline double s2_exponent(double delta) { return 3.0 - delta; }

inline void check_delta_q(double delta, std::size_t q) {
  require(delta > 0.0 && delta < 3.0, "delta must lie in (0, 3)");
  require(q >= 1, "q must be >= 1");
}

inline std::size_t s2_block(std::size_t q) { return 2 * q + 1; }

}  // namespace detail

/// Normalized s-value for one member.
inline double s_functional(const GcipSource& source, const ClassMember& member, std::size_t q,
                           double delta, GcipCondition which) {
  detail::check_delta_q(delta, q);
  const std::size_t len = which == GcipCondition::kS1 ? q : detail::s2_block(q);
  const auto vars = detail::sum_variances(source, {member}, len);
  const double qd = static_cast<double>(q);
  return which == GcipCondition::kS1
             ? vars[0].var[len] / std::pow(qd, detail::s1_exponent(delta))
             : vars[0].var[len] / std::pow(qd, detail::s2_exponent(delta));
}

inline double s_functional(const GcipSource& source, RealFunction f, std::size_t q, double delta,
                           GcipCondition which, std::optional<double> envelope = std::nullopt) {
  ClassMember m;
  m.label = "f";
  m.f = std::move(f);
  m.envelope = envelope;
  return s_functional(source, m, q, delta, which);
}

inline double s1_indicator(const GcipSource& source, double x, std::size_t q, double delta) {
  return s_functional(source, ClassMember::indicator(x), q, delta, GcipCondition::kS1);
}

inline double s2_indicator(const GcipSource& source, double x, std::size_t q, double delta) {
  return s_functional(source, ClassMember::indicator(x), q, delta, GcipCondition::kS2);
}

/// Var((1/q^{(3-delta)/4}) sum_{i=1}^q f(X_i)) as an explicit double sum of
/// pairwise covariances of the scaled terms, without the stationarity collapse.
inline double s1_scaled_double_sum(const TransitionModel& model, const StateFunction& f,
                                   std::size_t q, double delta) {
  detail::check_delta_q(delta, q);
  const double c = std::pow(static_cast<double>(q), -(3.0 - delta) / 4.0);
  StateFunction scaled(f);
  for (auto& v : scaled) v *= c;
  double total = 0.0;
  for (std::size_t i = 1; i <= q; ++i)
    for (std::size_t j = 1; j <= q; ++j)
      total += cov_exact(model, scaled, scaled, i > j ? i - j : j - i);
  return total;
}

enum class BoundedVerdict { kBounded, kGrowing, kInconclusive };

inline const char* to_string(BoundedVerdict v) {
  switch (v) {
    case BoundedVerdict::kBounded: return "BOUNDED";
    case BoundedVerdict::kGrowing: return "GROWING";
    case BoundedVerdict::kInconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

enum class GcipMode { kExactMarkov, kMonteCarlo };

struct GcipParams {
  double delta = 1.0;
  std::size_t q_max = 128;
  std::vector<double> x_grid;
  double slope_tol = 0.05;
  double growth_tol = 0.25;

  void validate() const {
    detail::require(delta > 0.0 && delta < 3.0, "GCIP delta must lie in (0, 3)");
    detail::require(q_max >= 2, "GCIP q_max must be >= 2");
    detail::require(!x_grid.empty(), "GCIP x_grid must not be empty");
    detail::require(std::is_sorted(x_grid.begin(), x_grid.end()), "GCIP x_grid must be ascending");
    detail::require(slope_tol < growth_tol, "GCIP slope_tol must be below growth_tol");
  }
};

struct GcipReport {
  std::string class_id;
  std::string source_label;
  bool synthetic = false;
  bool estimated = false;
  double delta = 1.0;
  std::size_t q_max = 0;
  std::vector<std::string> rows;
  std::vector<double> row_x;
  std::vector<std::vector<double>> s1, s2;        // [row][q-1]
  std::vector<std::vector<double>> s1_se, s2_se;  // estimated mode only
  double c1_hat = 0.0;
  double c2_hat = 0.0;
  BoundedVerdict bounded_verdict = BoundedVerdict::kInconclusive;
  double s1_slope = 0.0;
  BoundedVerdict s2_verdict = BoundedVerdict::kInconclusive;
  double s2_slope = 0.0;
  double slope_tol = 0.05;
  double growth_tol = 0.25;
  std::string note =
      "finite-q diagnostic: boundedness judged by the log-log slope of max_row s(q) over "
      "q in [q_max/2, q_max]; not a proof of the sup over all q";
};

namespace detail {

struct SlopeVerdict {
  double slope = 0.0;
  BoundedVerdict verdict = BoundedVerdict::kBounded;
};

inline SlopeVerdict judge_growth(const std::vector<std::vector<double>>& table, std::size_t q_max,
                                 double slope_tol, double growth_tol) {
  std::vector<double> lx, ly;
  for (std::size_t q = (q_max + 1) / 2; q <= q_max; ++q) {
    double m = 0.0;
    for (const auto& row : table) m = std::max(m, row[q - 1]);
    if (m > 0.0) {
      lx.push_back(std::log(static_cast<double>(q)));
      ly.push_back(std::log(m));
    }
  }
  SlopeVerdict out;
  if (lx.size() < 2) return out;  // identically zero
  out.slope = ols(lx, ly).slope;
  if (out.slope <= slope_tol) out.verdict = BoundedVerdict::kBounded;
  else if (out.slope >= growth_tol) out.verdict = BoundedVerdict::kGrowing;
  else out.verdict = BoundedVerdict::kInconclusive;
  return out;
}

inline std::string describe_source(const GcipSource& source) {
  if (const auto* e = std::get_if<ExactSource>(&source)) return "exact:" + e->spec.label;
  if (const auto* m = std::get_if<MonteCarloSource>(&source))
    return "monte-carlo(" + std::to_string(m->reps) + " reps):" + m->spec.label;
  return std::get<CovarianceSequence>(source).label;
}

}  // namespace detail

inline constexpr const char* kHalfLineClassId = "half-lines";

/// Tabulates s1/s2 over the class members and q = 1..q_max. Without an
/// explicit family the class is the half-line indicators at params.x_grid.
/// A covariance-injection source yields a single synthetic row.
inline GcipReport gcip_scan(const GcipSource& source, const GcipParams& params,
                            std::optional<std::vector<ClassMember>> family = std::nullopt,
                            std::string class_id = kHalfLineClassId) {
  params.validate();
  GcipReport rep;
  rep.class_id = std::move(class_id);
  rep.source_label = detail::describe_source(source);
  rep.synthetic = std::holds_alternative<CovarianceSequence>(source);
  rep.estimated = std::holds_alternative<MonteCarloSource>(source);
  rep.delta = params.delta;
  rep.q_max = params.q_max;
  rep.slope_tol = params.slope_tol;
  rep.growth_tol = params.growth_tol;

  std::vector<ClassMember> members;
  if (family) {
    detail::require(!family->empty(), "GCIP family must not be empty");
    members = std::move(*family);
  } else if (rep.synthetic) {
    ClassMember m;
    m.label = "synthetic";
    m.f = [](double) { return 0.0; };
    members.push_back(std::move(m));
  } else {
    for (double x : params.x_grid) members.push_back(ClassMember::indicator(x));
  }

  const std::size_t max_len = detail::s2_block(params.q_max);
  const auto vars = detail::sum_variances(source, members, max_len);
  const double e1 = detail::s1_exponent(params.delta), e2 = detail::s2_exponent(params.delta);
  for (std::size_t r = 0; r < members.size(); ++r) {
    rep.rows.push_back(members[r].label);
    rep.row_x.push_back(members[r].x);
    std::vector<double> a(params.q_max), b(params.q_max), ase(params.q_max), bse(params.q_max);
    for (std::size_t q = 1; q <= params.q_max; ++q) {
      const double qd = static_cast<double>(q);
      const double d1 = std::pow(qd, e1), d2 = std::pow(qd, e2);
      a[q - 1] = vars[r].var[q] / d1;
      b[q - 1] = vars[r].var[detail::s2_block(q)] / d2;
      ase[q - 1] = vars[r].se[q] / d1;
      bse[q - 1] = vars[r].se[detail::s2_block(q)] / d2;
      rep.c1_hat = std::max(rep.c1_hat, a[q - 1]);
      rep.c2_hat = std::max(rep.c2_hat, b[q - 1]);
    }
    rep.s1.push_back(std::move(a));
    rep.s2.push_back(std::move(b));
    if (rep.estimated) {
      rep.s1_se.push_back(std::move(ase));
      rep.s2_se.push_back(std::move(bse));
    }
  }
  const auto g1 = detail::judge_growth(rep.s1, rep.q_max, rep.slope_tol, rep.growth_tol);
  const auto g2 = detail::judge_growth(rep.s2, rep.q_max, rep.slope_tol, rep.growth_tol);
  rep.bounded_verdict = g1.verdict;
  rep.s1_slope = g1.slope;
  rep.s2_verdict = g2.verdict;
  rep.s2_slope = g2.slope;
  return rep;
}

/// Checks that the s1 condition implies the s2 condition on this table: no
/// report may have s1 BOUNDED while s2 is GROWING.
inline bool implication_check(const GcipReport& report) {
  return !(report.bounded_verdict == BoundedVerdict::kBounded &&
           report.s2_verdict == BoundedVerdict::kGrowing);
}

}  // namespace gclab
