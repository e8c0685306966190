#pragma once

// Constructive bracketing covers, brute-force shattering and VC index search,
// and the sufficient-condition checklist combining entropy with GCIP output.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gclab/error.hpp"
#include "gclab/gcip.hpp"
#include "gclab/procgen.hpp"

namespace gclab {

// ---------------------------------------------------------------------------
// Bracketing
// ---------------------------------------------------------------------------

/// The half-line (-inf, t] when closed, (-inf, t) otherwise. t = -inf is the
/// zero function, t = +inf the constant one.
struct Cut {
  double t = -std::numeric_limits<double>::infinity();
  bool closed = true;

  /// P(X in half-line).
  double mass(const MarginalLaw& law) const {
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    return closed ? law.cdf(t) : law.cdf_left(t);
  }

  /// Pointwise order of indicator functions.
  friend bool operator<=(const Cut& a, const Cut& b) {
    if (a.t != b.t) return a.t < b.t;
    return !a.closed || b.closed;
  }
  friend bool operator==(const Cut&, const Cut&) = default;
};

enum class BracketMetric { kL2P, kAbs };

inline const char* to_string(BracketMetric m) { return m == BracketMetric::kL2P ? "L2_P" : "ABS"; }

struct Bracket {
  Cut lower;
  Cut upper;
  double size = 0.0;  // in the cover's metric
};

struct BracketCover {
  std::string class_id = kHalfLineClassId;
  double epsilon = 0.0;
  BracketMetric metric = BracketMetric::kL2P;
  std::vector<Bracket> brackets;
  std::size_t count = 0;
  std::string bound_kind = "CONSTRUCTIVE_UPPER_BOUND";

  /// Index of a bracket holding the half-line (-inf, x], if any.
  std::optional<std::size_t> locate(double x) const {
    const Cut member{x, true};
    for (std::size_t i = 0; i < brackets.size(); ++i)
      if (brackets[i].lower <= member && member <= brackets[i].upper) return i;
    return std::nullopt;
  }

  bool sizes_within_epsilon() const {
    return std::all_of(brackets.begin(), brackets.end(),
                       [this](const Bracket& b) { return b.size <= epsilon + 1e-12; });
  }
};

/// Covers {1(-inf, x] : x real} by brackets between quantile cuts whose
/// F-gap is at most eps^2 (L2(P) metric) or eps (ABS metric). An atom that
/// would overshoot the gap closes the current bracket just below itself and
/// opens the next one at the atom. The count is an upper bound on the
/// bracketing number, not the minimum.
inline BracketCover bracket_halflines(const MarginalLaw& law, double epsilon,
                                      BracketMetric metric = BracketMetric::kL2P) {
  detail::require(epsilon > 0.0 && std::isfinite(epsilon), "bracket_halflines: epsilon must be > 0");
  constexpr double tol = 1e-12;
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double gap = metric == BracketMetric::kL2P ? epsilon * epsilon : epsilon;
  BracketCover cover;
  cover.epsilon = epsilon;
  cover.metric = metric;
  auto size_of = [metric](double mass_gap) {
    const double g = std::max(0.0, mass_gap);
    return metric == BracketMetric::kL2P ? std::sqrt(g) : g;
  };

  Cut lower{-inf, true};
  double level = 0.0;
  for (;;) {
    const double target = level + gap;
    if (target >= 1.0 - tol) {
      const Cut upper{inf, true};
      cover.brackets.push_back({lower, upper, size_of(1.0 - level)});
      break;
    }
    const double u = law.quantile(target);
    Cut upper{u, law.cdf(u) <= target + tol};
    const double upper_mass = upper.mass(law);
    cover.brackets.push_back({lower, upper, size_of(upper_mass - level)});
    lower = Cut{u, true};
    level = lower.mass(law);
    if (level >= 1.0 - tol) {
      cover.brackets.push_back({lower, Cut{inf, true}, size_of(1.0 - level)});
      break;
    }
  }
  cover.count = cover.brackets.size();
  return cover;
}

// ---------------------------------------------------------------------------
// Set classes and shattering
// ---------------------------------------------------------------------------

/// Finite parameterization of a class of subsets of the real line.
template <class C>
concept SetClass = requires(const C& c, std::size_t m, double x) {
  { c.member_count() } -> std::convertible_to<std::size_t>;
  { c.contains(m, x) } -> std::convertible_to<bool>;
  { c.id() } -> std::convertible_to<std::string>;
};

/// (-inf, c] for c in a cut grid. A -inf cut supplies the empty set.
class HalfLines {
 public:
  explicit HalfLines(std::vector<double> cuts) : cuts_(std::move(cuts)) {}

  static HalfLines over(const std::vector<double>& universe) {
    std::vector<double> cuts{-std::numeric_limits<double>::infinity()};
    cuts.insert(cuts.end(), universe.begin(), universe.end());
    return HalfLines(std::move(cuts));
  }

  std::size_t member_count() const { return cuts_.size(); }
  bool contains(std::size_t m, double x) const { return x <= cuts_[m]; }
  std::string id() const { return kHalfLineClassId; }

 private:
  std::vector<double> cuts_;
};

/// [a, b] for a <= b drawn from an endpoint grid.
class ClosedIntervals {
 public:
  explicit ClosedIntervals(std::vector<double> endpoints) {
    std::sort(endpoints.begin(), endpoints.end());
    for (std::size_t i = 0; i < endpoints.size(); ++i)
      for (std::size_t j = i; j < endpoints.size(); ++j)
        members_.emplace_back(endpoints[i], endpoints[j]);
  }

  /// Endpoints at the universe points plus one below them (for the empty set).
  static ClosedIntervals over(std::vector<double> universe) {
    const double lo = *std::min_element(universe.begin(), universe.end());
    universe.push_back(lo - 1.0);
    return ClosedIntervals(std::move(universe));
  }

  std::size_t member_count() const { return members_.size(); }
  bool contains(std::size_t m, double x) const {
    return members_[m].first <= x && x <= members_[m].second;
  }
  std::string id() const { return "closed-intervals"; }

 private:
  std::vector<std::pair<double, double>> members_;
};

/// Every subset of a finite universe.
class PowerSet {
 public:
  explicit PowerSet(std::vector<double> universe) : universe_(std::move(universe)) {
    detail::require(universe_.size() <= 20, "PowerSet: universe larger than 20 points");
  }

  std::size_t member_count() const { return std::size_t{1} << universe_.size(); }
  bool contains(std::size_t m, double x) const {
    for (std::size_t i = 0; i < universe_.size(); ++i)
      if (universe_[i] == x) return (m >> i) & 1U;
    return false;
  }
  std::string id() const { return "power-set"; }

 private:
  std::vector<double> universe_;
};

/// Class given by explicit membership predicates.
class PredicateClass {
 public:
  PredicateClass(std::string id, std::vector<std::function<bool(double)>> members)
      : id_(std::move(id)), members_(std::move(members)) {}

  std::size_t member_count() const { return members_.size(); }
  bool contains(std::size_t m, double x) const { return members_[m](x); }
  std::string id() const { return id_; }

 private:
  std::string id_;
  std::vector<std::function<bool(double)>> members_;
};

inline constexpr std::size_t kMaxShatterPoints = 22;
inline constexpr std::size_t kMaxVcCardinality = 12;
inline constexpr std::size_t kNoMember = std::numeric_limits<std::size_t>::max();

struct ShatterResult {
  bool shattered = false;
  std::optional<std::vector<double>> missing_subset;
  /// pickers[mask] = a member whose trace on the points is the subset `mask`
  /// (bit i for points[i]), or kNoMember.
  std::vector<std::size_t> pickers;
};

template <SetClass C>
ShatterResult shatter_check(const C& cls, const std::vector<double>& points) {
  if (points.size() > kMaxShatterPoints)
    throw FeasibilityError("shatter_check: more than 22 points");
  const std::size_t subsets = std::size_t{1} << points.size();
  ShatterResult out;
  out.pickers.assign(subsets, kNoMember);
  std::size_t found = 0;
  for (std::size_t m = 0; m < cls.member_count() && found < subsets; ++m) {
    std::size_t mask = 0;
    for (std::size_t i = 0; i < points.size(); ++i)
      if (cls.contains(m, points[i])) mask |= std::size_t{1} << i;
    if (out.pickers[mask] == kNoMember) {
      out.pickers[mask] = m;
      ++found;
    }
  }
  out.shattered = found == subsets;
  if (!out.shattered) {
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      if (out.pickers[mask] != kNoMember) continue;
      std::vector<double> missing;
      for (std::size_t i = 0; i < points.size(); ++i)
        if ((mask >> i) & 1U) missing.push_back(points[i]);
      out.missing_subset = std::move(missing);
      break;
    }
  }
  return out;
}

struct ShatterWitness {
  std::vector<double> points;
  std::vector<std::size_t> pickers;  // one member per subset mask
};

/// VC index under the convention: the smallest cardinality at which no subset
/// of the universe is shattered (half-lines receive 2). Shattering over the
/// real line is approximated by shattering over the declared universe.
struct VcReport {
  std::string class_id;
  std::vector<double> universe;
  std::optional<std::size_t> index;
  std::size_t searched_up_to = 0;
  std::vector<ShatterWitness> shattering_witnesses;  // one per cardinality < index

  bool found() const { return index.has_value(); }
};

namespace detail {

inline bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace detail

template <SetClass C>
VcReport vc_index(const C& cls, const std::vector<double>& universe, std::size_t max_n) {
  if (max_n > kMaxVcCardinality)
    throw FeasibilityError("vc_index: max_n above 12 is infeasible");
  detail::require(max_n >= 1, "vc_index: max_n must be >= 1");
  VcReport rep;
  rep.class_id = cls.id();
  rep.universe = universe;
  rep.searched_up_to = max_n;
  for (std::size_t n = 1; n <= max_n; ++n) {
    std::optional<ShatterWitness> witness;
    if (n <= universe.size()) {
      std::vector<std::size_t> idx(n);
      for (std::size_t i = 0; i < n; ++i) idx[i] = i;
      do {
        std::vector<double> pts;
        for (std::size_t i : idx) pts.push_back(universe[i]);
        auto res = shatter_check(cls, pts);
        if (res.shattered) {
          witness = ShatterWitness{std::move(pts), std::move(res.pickers)};
          break;
        }
      } while (detail::next_combination(idx, universe.size()));
    }
    if (!witness) {
      rep.index = n;
      return rep;
    }
    rep.shattering_witnesses.push_back(std::move(*witness));
  }
  return rep;
}

/// K * I * (4e)^I * (1/eps)^{r (I - 1)}. K and r are caller-supplied.
inline double vc_entropy_bound(std::size_t index, double epsilon, double k_const, double r) {
  detail::require(index >= 1, "vc_entropy_bound: index must be >= 1");
  detail::require(epsilon > 0.0 && epsilon <= 1.0, "vc_entropy_bound: epsilon must lie in (0, 1]");
  detail::require(k_const > 0.0, "vc_entropy_bound: K must be > 0");
  detail::require(r > 1.0, "vc_entropy_bound: r must be > 1");
  const double i = static_cast<double>(index);
  return k_const * i * std::pow(4.0 * std::exp(1.0), i) * std::pow(1.0 / epsilon, r * (i - 1.0));
}

// ---------------------------------------------------------------------------
// Sufficient-condition verdict
// ---------------------------------------------------------------------------

enum class GcStatus { kSufficientConditionsVerified, kNotVerified };

inline const char* to_string(GcStatus s) {
  return s == GcStatus::kSufficientConditionsVerified ? "SUFFICIENT_CONDITIONS_VERIFIED"
                                                      : "NOT_VERIFIED";
}

struct ChecklistItem {
  std::string id;
  std::string description;
  bool pass = false;
};

struct GcVerdict {
  GcStatus status = GcStatus::kNotVerified;
  std::optional<std::string> failing;  // "bracketing" or "gcip"
  std::vector<ChecklistItem> checklist;
  std::string note =
      "finite-scale check of sufficient (not necessary) conditions: bracket covers at the "
      "requested epsilons and a finite-q GCIP boundedness diagnostic";

  std::string label() const {
    std::string s = to_string(status);
    if (failing) s += "(" + *failing + ")";
    return s;
  }
};

inline GcVerdict gc_verdict(const std::vector<BracketCover>& covers, const GcipReport& report) {
  detail::require(!covers.empty(), "gc_verdict: at least one bracket cover is required");
  for (const auto& c : covers)
    detail::require(c.class_id == report.class_id,
                    "gc_verdict: cover class '" + c.class_id + "' does not match report class '" +
                        report.class_id + "'");
  // For indicator brackets, the L2(P) size squared equals the |.| (measure) size,
  // so a cover in either metric certifies finiteness in both.
  const bool brackets_ok = std::all_of(covers.begin(), covers.end(), [](const BracketCover& c) {
    return c.count > 0 && c.count == c.brackets.size() && c.sizes_within_epsilon();
  });
  const bool s1_ok = report.bounded_verdict == BoundedVerdict::kBounded;
  const bool s2_ok = report.s2_verdict == BoundedVerdict::kBounded;
  GcVerdict v;
  v.checklist = {
      {"a1", "finite bracketing numbers in the |.| metric at every requested epsilon", brackets_ok},
      {"a2", "GCIP variance conditions (s1 and s2 bounded) for every set in the class",
       s1_ok && s2_ok},
      {"b1", "finite bracketing numbers in L2(P) at every requested epsilon", brackets_ok},
      {"b2", "GCIP variance conditions (s1 and s2 bounded) for every function in the class",
       s1_ok && s2_ok},
  };
  if (!brackets_ok) {
    v.failing = "bracketing";
  } else if (!(s1_ok && s2_ok)) {
    v.failing = "gcip";
  } else {
    v.status = GcStatus::kSufficientConditionsVerified;
  }
  return v;
}

}  // namespace gclab
