#pragma once

// Stationary sequences with known dependence structure and known marginal law.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "gclab/error.hpp"
#include "gclab/matrix.hpp"
#include "gclab/numeric.hpp"
#include "gclab/random.hpp"

namespace gclab {

// ---------------------------------------------------------------------------
// Marginal families
// ---------------------------------------------------------------------------

struct UniformMarginal {
  double lower = 0.0;
  double upper = 1.0;
  friend bool operator==(const UniformMarginal&, const UniformMarginal&) = default;
};

struct NormalMarginal {
  double mean = 0.0;
  double sd = 1.0;
  friend bool operator==(const NormalMarginal&, const NormalMarginal&) = default;
};

/// Finitely many atoms; values strictly ascending, probabilities summing to 1.
struct DiscreteMarginal {
  std::vector<double> values;
  std::vector<double> probs;
  friend bool operator==(const DiscreteMarginal&, const DiscreteMarginal&) = default;
};

using Marginal = std::variant<UniformMarginal, NormalMarginal, DiscreteMarginal>;

inline void validate(const Marginal& m) {
  std::visit(
      [](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, UniformMarginal>) {
          detail::require(std::isfinite(law.lower) && std::isfinite(law.upper) &&
                              law.lower < law.upper,
                          "uniform marginal requires finite lower < upper");
        } else if constexpr (std::is_same_v<T, NormalMarginal>) {
          detail::require(std::isfinite(law.mean) && std::isfinite(law.sd) && law.sd > 0.0,
                          "normal marginal requires finite mean and sd > 0");
        } else {
          detail::require(!law.values.empty() && law.values.size() == law.probs.size(),
                          "discrete marginal requires matching non-empty values/probs");
          double total = 0.0;
          for (std::size_t i = 0; i < law.values.size(); ++i) {
            detail::require(std::isfinite(law.values[i]), "discrete marginal: non-finite atom");
            detail::require(i == 0 || law.values[i - 1] < law.values[i],
                            "discrete marginal: atoms must be strictly ascending");
            detail::require(law.probs[i] >= 0.0, "discrete marginal: negative probability");
            total += law.probs[i];
          }
          detail::require(std::abs(total - 1.0) <= 1e-10,
                          "discrete marginal: probabilities must sum to 1");
        }
      },
      m);
}

// ---------------------------------------------------------------------------
// Marginal laws: cdf, left limit, generalized inverse
// ---------------------------------------------------------------------------

namespace detail {

/// Law of (S - n/2) / sqrt(n/12) where S is a sum of n iid U(0,1).
struct StandardIrwinHall {
  unsigned terms = 1;

  double sum_cdf(double s) const {
    const double n = terms;
    if (s <= 0.0) return 0.0;
    if (s >= n) return 1.0;
    if (s > n / 2.0) return 1.0 - sum_cdf(n - s);
    // Alternating series; evaluated on the lower half where cancellation is mild.
    double total = 0.0;
    double binom = 1.0;
    const auto top = static_cast<unsigned>(std::floor(s));
    for (unsigned k = 0; k <= top; ++k) {
      if (k > 0) binom *= static_cast<double>(terms - k + 1) / k;
      const double term = binom * std::pow(s - k, n);
      total += (k % 2 == 0) ? term : -term;
    }
    return std::clamp(total / std::tgamma(n + 1.0), 0.0, 1.0);
  }

  double cdf(double x) const {
    const double n = terms;
    return sum_cdf(n / 2.0 + x * std::sqrt(n / 12.0));
  }
};

}  // namespace detail

/// Marginal law of a stationary process: F, F(x-), and F^{-1}.
class MarginalLaw {
 public:
  explicit MarginalLaw(Marginal m)
      : law_(std::visit([](auto&& l) -> Law { return std::forward<decltype(l)>(l); }, std::move(m))) {}
  explicit MarginalLaw(detail::StandardIrwinHall ih) : law_(ih) {}

  /// F(x) = P(X <= x).
  double cdf(double x) const {
    if (std::isnan(x)) throw ValidationError("cdf evaluated at NaN");
    return std::visit(
        [x](const auto& law) -> double {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, UniformMarginal>) {
            return std::clamp((x - law.lower) / (law.upper - law.lower), 0.0, 1.0);
          } else if constexpr (std::is_same_v<T, NormalMarginal>) {
            return normal_cdf((x - law.mean) / law.sd);
          } else if constexpr (std::is_same_v<T, DiscreteMarginal>) {
            double s = 0.0;
            for (std::size_t i = 0; i < law.values.size() && law.values[i] <= x; ++i)
              s += law.probs[i];
            return std::min(s, 1.0);
          } else {
            return law.cdf(x);
          }
        },
        law_);
  }

  /// F(x-) = P(X < x).
  double cdf_left(double x) const {
    if (const auto* disc = std::get_if<DiscreteMarginal>(&law_)) {
      double s = 0.0;
      for (std::size_t i = 0; i < disc->values.size() && disc->values[i] < x; ++i)
        s += disc->probs[i];
      return std::min(s, 1.0);
    }
    return cdf(x);
  }

  /// Generalized inverse inf{x : F(x) >= u}; -inf for u <= 0, +inf for u > 1.
  double quantile(double u) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (u <= 0.0) return -inf;
    if (u > 1.0) return inf;
    if (const auto* uni = std::get_if<UniformMarginal>(&law_))
      return uni->lower + u * (uni->upper - uni->lower);
    if (const auto* disc = std::get_if<DiscreteMarginal>(&law_)) {
      double s = 0.0;
      for (std::size_t i = 0; i < disc->values.size(); ++i) {
        s += disc->probs[i];
        if (s >= u - 1e-15) return disc->values[i];
      }
      return disc->values.back();
    }
    // Continuous, no closed form: bisection on F.
    auto [lo, hi] = bracket_support();
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (cdf(mid) >= u) hi = mid; else lo = mid;
    }
    return hi;
  }

  bool is_continuous() const {
    return !std::holds_alternative<DiscreteMarginal>(law_);
  }

  /// Atoms of a discrete law (empty for continuous laws).
  std::vector<double> atoms() const {
    if (const auto* disc = std::get_if<DiscreteMarginal>(&law_)) return disc->values;
    return {};
  }

  /// A finite interval holding all but ~1e-15 of the mass.
  std::pair<double, double> bracket_support() const {
    return std::visit(
        [](const auto& law) -> std::pair<double, double> {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, UniformMarginal>) {
            return {law.lower, law.upper};
          } else if constexpr (std::is_same_v<T, NormalMarginal>) {
            return {law.mean - 9.0 * law.sd, law.mean + 9.0 * law.sd};
          } else if constexpr (std::is_same_v<T, DiscreteMarginal>) {
            return {law.values.front(), law.values.back()};
          } else {
            const double half = law.terms / 2.0 / std::sqrt(law.terms / 12.0);
            return {-half, half};
          }
        },
        law_);
  }

 private:
  using Law = std::variant<UniformMarginal, NormalMarginal, DiscreteMarginal, detail::StandardIrwinHall>;
  Law law_;
};

namespace detail {

inline double draw(const Marginal& m, CounterRng& rng) {
  return std::visit(
      [&rng](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, UniformMarginal>) {
          return law.lower + (law.upper - law.lower) * rng.uniform();
        } else if constexpr (std::is_same_v<T, NormalMarginal>) {
          return law.mean + law.sd * rng.normal();
        } else {
          const double u = rng.uniform();
          double s = 0.0;
          for (std::size_t i = 0; i < law.values.size(); ++i) {
            s += law.probs[i];
            if (u < s) return law.values[i];
          }
          return law.values.back();
        }
      },
      m);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Finite-state Markov chains
// ---------------------------------------------------------------------------

/// Finite-state stationary Markov chain: ascending state values, row-stochastic
/// transition matrix and a stationary law.
class TransitionModel {
 public:
  TransitionModel(std::vector<double> states, Matrix transition, std::vector<double> stationary)
      : states_(std::move(states)), p_(std::move(transition)), pi_(std::move(stationary)) {
    validate();
  }

  /// Builds the model and solves pi P = pi, sum(pi) = 1.
  static TransitionModel from_matrix(std::vector<double> states, Matrix transition) {
    auto pi = solve_stationary(transition);
    return TransitionModel(std::move(states), std::move(transition), std::move(pi));
  }

  std::size_t size() const noexcept { return states_.size(); }
  const std::vector<double>& states() const noexcept { return states_; }
  const Matrix& transition() const noexcept { return p_; }
  const std::vector<double>& stationary() const noexcept { return pi_; }

  friend bool operator==(const TransitionModel&, const TransitionModel&) = default;

  static std::vector<double> solve_stationary(const Matrix& p) {
    const std::size_t k = p.size();
    if (k == 0) throw ValidationError("transition matrix is empty");
    if (k == 1) return {1.0};
    // Rows of A: (P^T - I) with the last equation replaced by sum(pi) = 1.
    std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) a[i][j] = p(j, i) - (i == j ? 1.0 : 0.0);
    for (std::size_t j = 0; j < k; ++j) a[k - 1][j] = 1.0;
    a[k - 1][k] = 1.0;
    for (std::size_t col = 0; col < k; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < k; ++r)
        if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
      if (std::abs(a[piv][col]) < 1e-14)
        throw ValidationError("stationary law is not unique (reducible chain)");
      std::swap(a[piv], a[col]);
      for (std::size_t r = 0; r < k; ++r) {
        if (r == col) continue;
        const double f = a[r][col] / a[col][col];
        if (f == 0.0) continue;
        for (std::size_t c = col; c <= k; ++c) a[r][c] -= f * a[col][c];
      }
    }
    std::vector<double> pi(k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      pi[i] = std::max(0.0, a[i][k] / a[i][i]);
      total += pi[i];
    }
    for (auto& v : pi) v /= total;
    return pi;
  }

 private:
  void validate() const {
    const std::size_t k = states_.size();
    detail::require(k >= 1, "transition model needs at least one state");
    detail::require(p_.size() == k, "transition matrix dimension must match state count");
    detail::require(pi_.size() == k, "stationary vector dimension must match state count");
    for (std::size_t i = 0; i < k; ++i) {
      detail::require(std::isfinite(states_[i]), "state values must be finite");
      detail::require(i == 0 || states_[i - 1] < states_[i],
                      "state values must be distinct and ascending");
      double row = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        detail::require(std::isfinite(p_(i, j)) && p_(i, j) >= 0.0,
                        "transition entries must be finite and non-negative");
        row += p_(i, j);
      }
      detail::require(std::abs(row - 1.0) <= 1e-12, "transition matrix rows must sum to 1");
    }
    double total = 0.0;
    for (double v : pi_) {
      detail::require(std::isfinite(v) && v >= 0.0, "stationary law must be non-negative");
      total += v;
    }
    detail::require(std::abs(total - 1.0) <= 1e-10, "stationary law must sum to 1");
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += pi_[i] * p_(i, j);
      detail::require(std::abs(s - pi_[j]) <= 1e-10, "stationary law violates pi P = pi");
    }
  }

  std::vector<double> states_;
  Matrix p_;
  std::vector<double> pi_;
};

// ---------------------------------------------------------------------------
// Process specifications
// ---------------------------------------------------------------------------

struct IidProcess {
  Marginal marginal;
  friend bool operator==(const IidProcess&, const IidProcess&) = default;
};

/// X_t = rho X_{t-1} + innovation_sd * Z_t, started from its stationary law.
struct Ar1Process {
  double rho = 0.0;
  double innovation_sd = 1.0;
  friend bool operator==(const Ar1Process&, const Ar1Process&) = default;
};

struct MarkovProcess {
  TransitionModel model;
  friend bool operator==(const MarkovProcess&, const MarkovProcess&) = default;
};

/// Standardized moving sum of m+1 consecutive iid base draws; independent
/// beyond lag m.
struct MDependentProcess {
  std::size_t m = 0;
  Marginal base;
  friend bool operator==(const MDependentProcess&, const MDependentProcess&) = default;
};

using ProcessKind = std::variant<IidProcess, Ar1Process, MarkovProcess, MDependentProcess>;

struct ProcessSpec {
  ProcessKind kind;
  std::string label;

  bool is_iid() const { return std::holds_alternative<IidProcess>(kind); }
  const TransitionModel* markov_model() const {
    const auto* mk = std::get_if<MarkovProcess>(&kind);
    return mk ? &mk->model : nullptr;
  }

  friend bool operator==(const ProcessSpec&, const ProcessSpec&) = default;
};

inline constexpr std::size_t kMaxMDependentTerms = 20;

inline void validate(const ProcessSpec& spec) {
  std::visit(
      [](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, IidProcess>) {
          validate(k.marginal);
        } else if constexpr (std::is_same_v<T, Ar1Process>) {
          detail::require(std::isfinite(k.rho) && std::abs(k.rho) < 1.0,
                          "AR1 requires |rho| < 1 for stationarity");
          detail::require(std::isfinite(k.innovation_sd) && k.innovation_sd > 0.0,
                          "AR1 requires innovation_sd > 0");
        } else if constexpr (std::is_same_v<T, MarkovProcess>) {
          // TransitionModel validates on construction.
        } else {
          validate(k.base);
          detail::require(!std::holds_alternative<DiscreteMarginal>(k.base),
                          "M_DEPENDENT base marginal must be uniform or normal");
          detail::require(k.m + 1 <= kMaxMDependentTerms,
                          "M_DEPENDENT window too long (m + 1 <= 20)");
        }
      },
      spec.kind);
}

inline MarginalLaw marginal_law(const ProcessSpec& spec) {
  validate(spec);
  return std::visit(
      [](const auto& k) -> MarginalLaw {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, IidProcess>) {
          return MarginalLaw(k.marginal);
        } else if constexpr (std::is_same_v<T, Ar1Process>) {
          const double sd = k.innovation_sd / std::sqrt(1.0 - k.rho * k.rho);
          return MarginalLaw(Marginal{NormalMarginal{0.0, sd}});
        } else if constexpr (std::is_same_v<T, MarkovProcess>) {
          return MarginalLaw(Marginal{DiscreteMarginal{k.model.states(), k.model.stationary()}});
        } else {
          if (std::holds_alternative<NormalMarginal>(k.base))
            return MarginalLaw(Marginal{NormalMarginal{0.0, 1.0}});
          return MarginalLaw(detail::StandardIrwinHall{static_cast<unsigned>(k.m + 1)});
        }
      },
      spec.kind);
}

/// Exact marginal F(x) of the stationary process.
inline double marginal_cdf(const ProcessSpec& spec, double x) { return marginal_law(spec).cdf(x); }

struct SamplePath {
  std::vector<double> values;
  std::string spec_label;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::size_t n = 0;
};

namespace detail {

inline std::size_t draw_index(std::span<const double> probs, double u) {
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    s += probs[i];
    if (u < s) return i;
  }
  // u fell in the rounding gap above the last partial sum.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}

}  // namespace detail

/// Draws X_1..X_n. Deterministic in (spec, n, seed, stream).
inline SamplePath generate(const ProcessSpec& spec, std::size_t n, std::uint64_t seed,
                           std::uint64_t stream = 0) {
  detail::require(n >= 1, "generate: n must be >= 1");
  validate(spec);
  CounterRng rng(seed, stream);
  SamplePath path;
  path.spec_label = spec.label;
  path.seed = seed;
  path.stream = stream;
  path.n = n;
  path.values.resize(n);
  auto& out = path.values;

  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, IidProcess>) {
          for (auto& v : out) v = detail::draw(k.marginal, rng);
        } else if constexpr (std::is_same_v<T, Ar1Process>) {
          const double stat_sd = k.innovation_sd / std::sqrt(1.0 - k.rho * k.rho);
          out[0] = stat_sd * rng.normal();
          for (std::size_t t = 1; t < n; ++t)
            out[t] = k.rho * out[t - 1] + k.innovation_sd * rng.normal();
        } else if constexpr (std::is_same_v<T, MarkovProcess>) {
          const auto& model = k.model;
          std::size_t s = detail::draw_index(model.stationary(), rng.uniform());
          out[0] = model.states()[s];
          for (std::size_t t = 1; t < n; ++t) {
            s = detail::draw_index(model.transition().row(s), rng.uniform());
            out[t] = model.states()[s];
          }
        } else {
          const std::size_t w = k.m + 1;
          double mean = 0.0, sd = 1.0;
          if (const auto* u = std::get_if<UniformMarginal>(&k.base)) {
            mean = 0.5 * (u->lower + u->upper);
            sd = (u->upper - u->lower) / std::sqrt(12.0);
          } else {
            const auto& g = std::get<NormalMarginal>(k.base);
            mean = g.mean;
            sd = g.sd;
          }
          std::vector<double> base(n + w - 1);
          for (auto& b : base) b = detail::draw(k.base, rng);
          const double scale = std::sqrt(static_cast<double>(w)) * sd;
          for (std::size_t t = 0; t < n; ++t) {
            double s = 0.0;
            for (std::size_t i = 0; i < w; ++i) s += base[t + i];
            out[t] = (s - static_cast<double>(w) * mean) / scale;
          }
        }
      },
      spec.kind);
  return path;
}

}  // namespace gclab
