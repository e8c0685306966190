#include <catch_amalgamated.hpp>

#include <cmath>

#include "gclab/covcheck.hpp"
#include "gclab/mixing.hpp"
#include "oracles.hpp"

using namespace gclab;
using Catch::Approx;

namespace {

const oracle::Mat kP2 = {{0.7, 0.3}, {0.2, 0.8}};

TransitionModel two_state() {
  return TransitionModel::from_matrix({0.0, 1.0}, Matrix{{0.7, 0.3}, {0.2, 0.8}});
}

oracle::Mat to_mat(const TransitionModel& m) {
  oracle::Mat out(m.size(), std::vector<double>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) out[i][j] = m.transition()(i, j);
  return out;
}

MixingProfile synthetic(MixingKind kind, std::vector<std::size_t> lags, auto&& value) {
  MixingProfile p;
  p.kind = kind;
  p.provenance = Provenance::estimated(1, 1);
  for (auto l : lags) p.values.push_back(value(static_cast<double>(l)));
  p.lags = std::move(lags);
  return p;
}

std::vector<std::size_t> lags_1_to(std::size_t n) {
  std::vector<std::size_t> v;
  for (std::size_t i = 1; i <= n; ++i) v.push_back(i);
  return v;
}

}  // namespace

TEST_CASE("two-state alpha matches brute-force enumeration", "[mixing]") {
  const auto model = two_state();
  const std::vector<double> pi = {0.4, 0.6};
  // Frozen values, confirmed by the brute-force oracle below.
  REQUIRE(oracle::alpha_brute(kP2, pi, 1) == Approx(0.12).margin(1e-14));
  REQUIRE(oracle::alpha_brute(kP2, pi, 3) == Approx(0.03).margin(1e-14));
  REQUIRE(alpha_markov_exact(model, 1) == Approx(0.12).margin(1e-12));
  REQUIRE(alpha_markov_exact(model, 3) == Approx(0.03).margin(1e-12));
  for (std::size_t n = 1; n <= 10; ++n)
    REQUIRE(alpha_markov_exact(model, n) ==
            Approx(oracle::alpha_brute(kP2, pi, n)).margin(1e-12));
}

TEST_CASE("two-state beta matches the total-variation oracle", "[mixing]") {
  const auto model = two_state();
  const std::vector<double> pi = {0.4, 0.6};
  REQUIRE(oracle::beta_tv(kP2, pi, 1) == Approx(0.24).margin(1e-14));
  REQUIRE(oracle::beta_tv(kP2, pi, 4) == Approx(0.03).margin(1e-14));
  REQUIRE(beta_markov_exact(model, 1) == Approx(0.24).margin(1e-12));
  REQUIRE(beta_markov_exact(model, 4) == Approx(0.03).margin(1e-12));
  for (std::size_t n = 1; n <= 10; ++n)
    REQUIRE(beta_markov_exact(model, n) == Approx(2 * 0.4 * 0.6 * std::pow(0.5, n)).margin(1e-12));
}

TEST_CASE("identical rows give zero mixing coefficients", "[mixing]") {
  const auto model = TransitionModel::from_matrix({0.0, 1.0, 2.0},
                                                  Matrix{{0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}});
  for (std::size_t n : {1u, 2u, 7u}) {
    REQUIRE(alpha_markov_exact(model, n) == Approx(0.0).margin(1e-15));
    REQUIRE(beta_markov_exact(model, n) == Approx(0.0).margin(1e-15));
  }
}

TEST_CASE("random chains: ranges, alpha <= beta, agreement with brute force", "[mixing][property]") {
  for (std::size_t c = 0; c < 1000; ++c) {
    CounterRng rng(2024, c);
    const std::size_t k = 2 + static_cast<std::size_t>(rng.uniform() * 5);
    const auto model = random_model(rng, k);
    const std::size_t lag = 1 + static_cast<std::size_t>(rng.uniform() * 5);
    const double a = alpha_markov_exact(model, lag);
    const double b = beta_markov_exact(model, lag);
    REQUIRE(a >= 0.0);
    REQUIRE(a <= 0.25);
    REQUIRE(b >= 0.0);
    REQUIRE(b <= 1.0);
    REQUIRE(a <= b + 1e-12);
    if (c % 10 == 0)
      REQUIRE(a == Approx(oracle::alpha_brute(to_mat(model), model.stationary(), lag)).margin(1e-12));
    REQUIRE(b == Approx(oracle::beta_tv(to_mat(model), model.stationary(), lag)).margin(1e-12));
  }
}

TEST_CASE("reversible two-state chains decay monotonically", "[mixing][property]") {
  for (double a : {0.05, 0.3, 0.6, 0.9})
    for (double b : {0.1, 0.45, 0.8}) {
      const auto model = TransitionModel::from_matrix({0.0, 1.0}, Matrix{{1 - a, a}, {b, 1 - b}});
      for (std::size_t n = 1; n < 15; ++n) {
        REQUIRE(alpha_markov_exact(model, n + 1) <= alpha_markov_exact(model, n) + 1e-15);
        REQUIRE(beta_markov_exact(model, n + 1) <= beta_markov_exact(model, n) + 1e-15);
      }
    }
}

TEST_CASE("alpha enumeration cap", "[mixing]") {
  Matrix p(21, 1.0 / 21.0);
  std::vector<double> states(21);
  for (std::size_t i = 0; i < 21; ++i) states[i] = static_cast<double>(i);
  const auto model = TransitionModel::from_matrix(states, p);
  REQUIRE_THROWS_AS(alpha_markov_exact(model, 1), FeasibilityError);
  REQUIRE(beta_markov_exact(model, 1) == Approx(0.0).margin(1e-12));
}

TEST_CASE("alpha modulus estimate", "[mixing]") {
  SECTION("iid path shrinks towards zero") {
    const ProcessSpec iid{IidProcess{UniformMarginal{}}, "iid"};
    REQUIRE(alpha_modulus_estimate(generate(iid, 1000000, 3), 0.4, 2) < 2e-3);
  }
  SECTION("constant path gives zero") {
    const auto model = TransitionModel::from_matrix({1.0}, Matrix{{1.0}});
    const auto path = generate({MarkovProcess{model}, "const"}, 200, 1);
    REQUIRE(alpha_modulus_estimate(path, 0.5, 3) == 0.0);
    REQUIRE(alpha_modulus_estimate(path, 1.5, 3) == 0.0);
  }
  SECTION("two-state chain converges to the exact alpha within 3 standard errors") {
    const ProcessSpec chain{MarkovProcess{two_state()}, "chain"};
    const double exact = alpha_markov_exact(two_state(), 1);
    std::vector<double> est;
    for (std::uint64_t r = 0; r < 10; ++r)
      est.push_back(alpha_modulus_estimate(generate(chain, 1000000, 77, r), 0.5, 1));
    double mean = 0.0, var = 0.0;
    for (double e : est) mean += e / 10.0;
    for (double e : est) var += (e - mean) * (e - mean) / 9.0;
    const double se_single = std::sqrt(var);
    for (double e : est) REQUIRE(std::abs(e - exact) <= 3.0 * se_single + 1e-4);
    REQUIRE(std::abs(mean - exact) <= 3.0 * se_single / std::sqrt(10.0));
  }
  SECTION("lag too large for the path") {
    const auto path = generate({IidProcess{UniformMarginal{}}, "iid"}, 40, 1);
    REQUIRE_THROWS_AS(alpha_modulus_estimate(path, 0.5, 10), InsufficientDataError);
    REQUIRE_NOTHROW(alpha_modulus_estimate(path, 0.5, 9));
  }
}

TEST_CASE("fit_decay", "[mixing]") {
  SECTION("exact power law is recovered") {
    const auto p = synthetic(MixingKind::kBeta, lags_1_to(10),
                             [](double n) { return 0.7 * std::pow(n, -2.5); });
    const auto fit = fit_decay(p);
    REQUIRE(fit.c == Approx(0.7).epsilon(1e-9));
    REQUIRE(fit.a == Approx(2.5).epsilon(1e-9));
    REQUIRE_FALSE(fit.super_polynomial);
  }
  SECTION("geometric decay is flagged super-polynomial") {
    const auto p = exact_profile(two_state(), MixingKind::kBeta, lags_1_to(10));
    for (std::size_t i = 0; i < 10; ++i)
      REQUIRE(p.values[i] == Approx(0.48 * std::pow(0.5, i + 1.0)).margin(1e-12));
    const auto fit = fit_decay(p);
    REQUIRE(fit.super_polynomial);
    REQUIRE(fit.geometric_rate == Approx(std::log(2.0)).epsilon(1e-9));
  }
  SECTION("zeros are dropped with a note; all-zero is undefined") {
    auto p = synthetic(MixingKind::kAlpha, lags_1_to(6),
                       [](double n) { return n <= 4 ? 0.1 / n : 0.0; });
    const auto fit = fit_decay(p);
    REQUIRE(fit.dropped_zeros == 2);
    REQUIRE(fit.a == Approx(1.0).epsilon(1e-9));
    const auto zero = synthetic(MixingKind::kAlpha, lags_1_to(6), [](double) { return 0.0; });
    REQUIRE_THROWS_AS(fit_decay(zero), FitUndefinedError);
  }
}

TEST_CASE("rate threshold exponent", "[mixing]") {
  REQUIRE(RateThreshold(1.0 / 3.0).exponent == Approx(2.0).margin(1e-12));
  REQUIRE(RateThreshold(0.5).exponent == Approx(3.0).margin(1e-12));
  REQUIRE(RateThreshold(0.01).exponent == Approx(1.01 / 0.99).margin(1e-12));
  double prev = 1.0;
  for (double d = 0.001; d < 1.0; d += 0.01) {
    const double e = RateThreshold(d).exponent;
    REQUIRE(e > prev);
    prev = e;
  }
  REQUIRE(RateThreshold(1e-9).exponent == Approx(1.0).margin(1e-8));
  REQUIRE_THROWS_AS(RateThreshold(0.0), ValidationError);
  REQUIRE_THROWS_AS(RateThreshold(1.0), ValidationError);
}

TEST_CASE("threshold_check verdicts", "[mixing]") {
  const auto geo = exact_profile(two_state(), MixingKind::kBeta, lags_1_to(10));
  for (double d : {0.01, 0.3, 0.5, 0.9, 0.99})
    REQUIRE(threshold_check(geo, d).verdict == ThresholdVerdict::kSatisfied);
  const auto inv_sq = synthetic(MixingKind::kAlpha, lags_1_to(10),
                                [](double n) { return 0.25 * std::pow(n, -2.0); });
  REQUIRE(threshold_check(inv_sq, 0.5).verdict == ThresholdVerdict::kViolated);
  REQUIRE(threshold_check(inv_sq, 1.0 / 3.0).verdict == ThresholdVerdict::kSatisfied);
  const auto vanishing = synthetic(MixingKind::kAlpha, lags_1_to(5),
                                   [](double n) { return n <= 2 ? 0.1 : 0.0; });
  REQUIRE(threshold_check(vanishing, 0.9).verdict == ThresholdVerdict::kSatisfied);
  const auto noisy = synthetic(MixingKind::kAlpha, lags_1_to(8),
                               [](double n) { return 0.1 * (static_cast<int>(n) % 2 ? 1.0 : 0.01); });
  REQUIRE(threshold_check(noisy, 0.5).verdict == ThresholdVerdict::kInconclusive);
  REQUIRE_THROWS_AS(threshold_check(geo, 1.5), ValidationError);
}

TEST_CASE("profile invariants are enforced", "[mixing]") {
  MixingProfile p;
  p.kind = MixingKind::kAlpha;
  p.lags = {1, 2};
  p.values = {0.3, 0.1};
  REQUIRE_THROWS_AS(p.validate(), ValidationError);
  p.values = {0.1, 0.05};
  p.lags = {2, 2};
  REQUIRE_THROWS_AS(p.validate(), ValidationError);
}
