#include <catch_amalgamated.hpp>

#include <cmath>

#include "gclab/covcheck.hpp"
#include "oracles.hpp"

using namespace gclab;
using Catch::Approx;

namespace {

TransitionModel two_state() {
  return TransitionModel::from_matrix({0.0, 1.0}, Matrix{{0.7, 0.3}, {0.2, 0.8}});
}

TransitionModel independent() {
  return TransitionModel::from_matrix({0.0, 1.0}, Matrix{{0.4, 0.6}, {0.4, 0.6}});
}

const StateFunction kI0 = {1.0, 0.0};  // indicator of state 0

}  // namespace

TEST_CASE("cov_exact examples", "[covcheck]") {
  const auto m = two_state();
  REQUIRE(cov_exact(m, {2.0, 2.0}, {-1.0, -1.0}, 3) == Approx(0.0).margin(1e-15));
  REQUIRE(cov_exact(m, kI0, kI0, 1) == Approx(0.12).margin(1e-14));
  REQUIRE(oracle::cov_direct({{0.7, 0.3}, {0.2, 0.8}}, {0.4, 0.6}, kI0, kI0, 1) ==
          Approx(0.12).margin(1e-14));
  for (std::size_t n = 0; n <= 6; ++n)
    REQUIRE(cov_exact(m, kI0, kI0, n) == Approx(0.24 * std::pow(0.5, n)).margin(1e-14));
  for (std::size_t lag = 1; lag <= 4; ++lag)
    REQUIRE(cov_exact(independent(), {1.0, -3.0}, {0.5, 2.0}, lag) == Approx(0.0).margin(1e-15));
}

TEST_CASE("norm_p examples", "[covcheck]") {
  const auto m = two_state();
  REQUIRE(norm_p(m, kI0, 2.0) == Approx(std::sqrt(0.4)).epsilon(1e-14));
  for (double p : {1.0, 2.5, 7.0, kInf}) REQUIRE(norm_p(m, {-3.0, -3.0}, p) == Approx(3.0).epsilon(1e-14));
  REQUIRE(norm_p(m, {1.0, -2.0}, 1.0) == Approx(1.6).epsilon(1e-14));
  REQUIRE(norm_p(m, {1.0, -2.0}, kInf) == 2.0);
}

TEST_CASE("norm_p is stable for very large p", "[covcheck]") {
  const auto m = two_state();
  // 0.4 * 0.5^p underflows long before p = 1e5; the norm tends to the max.
  REQUIRE(norm_p(m, {0.5, 0.25}, 1e5) == Approx(0.5).epsilon(1e-4));
  REQUIRE(norm_p(m, {3.0, -1e3}, 2e4) == Approx(1e3).epsilon(1e-3));
  REQUIRE(norm_p(m, {0.0, 0.0}, 7.0) == 0.0);
  for (std::uint64_t seed : {1u, 2u, 20240601u}) REQUIRE(covariance_sweep(seed, 1000).violations == 0);
}

TEST_CASE("norm_p infinity ignores states without stationary mass", "[covcheck]") {
  const TransitionModel m({0.0, 1.0}, Matrix{{1.0, 0.0}, {1.0, 0.0}}, {1.0, 0.0});
  REQUIRE(norm_p(m, {0.5, 100.0}, kInf) == 0.5);
}

TEST_CASE("Holder triple validation", "[covcheck]") {
  REQUIRE_NOTHROW(HolderTriple{4.0, 4.0, 2.0}.validate());
  REQUIRE_NOTHROW(HolderTriple{2.0, 2.0, kInf}.validate());
  REQUIRE_NOTHROW(HolderTriple{kInf, kInf, 1.0}.validate());
  REQUIRE_THROWS_AS((HolderTriple{2.0, 2.0, 2.0}.validate()), ValidationError);
  REQUIRE_THROWS_AS((HolderTriple{0.5, kInf, 2.0}.validate()), ValidationError);
  REQUIRE_THROWS_AS(check_alpha_holder(two_state(), kI0, kI0, 1, HolderTriple{3.0, 3.0, 2.0}),
                    ValidationError);
}

TEST_CASE("alpha Holder bound example", "[covcheck]") {
  const auto cert = check_alpha_holder(two_state(), kI0, kI0, 1, HolderTriple{4.0, 4.0, 2.0});
  // Each factor recomputed independently: 8 * sqrt(alpha) * ||I||_4^2.
  const double rhs = 8.0 * std::sqrt(0.12) * std::pow(std::pow(0.4, 0.25), 2.0);
  REQUIRE(rhs == Approx(1.7527).margin(1e-4));
  REQUIRE(cert.lhs == Approx(0.12).margin(1e-14));
  REQUIRE(cert.rhs == Approx(rhs).epsilon(1e-12));
  REQUIRE(cert.pass());
  REQUIRE(cert.inequality_id == InequalityId::kAlpha8);
  REQUIRE(cert.inputs_digest.size() == 16);
}

TEST_CASE("sup-norm bounds examples", "[covcheck]") {
  const auto a = check_alpha_sup(two_state(), kI0, kI0, 1);
  REQUIRE(a.rhs == Approx(0.48).margin(1e-12));
  REQUIRE(a.lhs == Approx(0.12).margin(1e-14));
  REQUIRE(a.pass());
  const auto b = check_beta_sup(two_state(), kI0, kI0, 1);
  REQUIRE(b.rhs == Approx(0.48).margin(1e-12));
  REQUIRE(b.pass());
  const auto c = check_alpha_sup(two_state(), {5.0, 5.0}, kI0, 2);
  REQUIRE(c.lhs == Approx(0.0).margin(1e-15));
  REQUIRE(c.pass());
}

TEST_CASE("independent model certificates pass with zero slack where tight", "[covcheck]") {
  const auto m = independent();
  for (const HolderTriple t : {HolderTriple{2.0, 2.0, kInf}, HolderTriple{4.0, 4.0, 2.0}}) {
    const auto cert = check_alpha_holder(m, {1.0, 4.0}, {-2.0, 3.0}, 1, t);
    REQUIRE(cert.lhs == Approx(0.0).margin(1e-15));
    REQUIRE(cert.pass());
  }
  const auto b = check_beta_sup(m, kI0, kI0, 2);
  REQUIRE(b.rhs == Approx(0.0).margin(1e-15));
  REQUIRE(b.lhs == Approx(0.0).margin(1e-15));
  REQUIRE(b.pass());
}

TEST_CASE("randomized sweep never violates the inequalities", "[covcheck][property]") {
  const auto sweep = covariance_sweep(99, 1000, 2, 6, 5, true);
  REQUIRE(sweep.checks == 3000);
  REQUIRE(sweep.violations == 0);
  REQUIRE(sweep.min_slack >= kSlackTolerance);
  for (const auto& c : sweep.certificates) REQUIRE(c.pass());
}

TEST_CASE("time reversal symmetry for reversible chains", "[covcheck][property]") {
  // Symmetric doubly-stochastic matrices are reversible w.r.t. the uniform law.
  for (std::uint64_t s = 0; s < 50; ++s) {
    CounterRng rng(5, s);
    const double a = 0.3 * rng.uniform(), b = 0.3 * rng.uniform(), c = 0.3 * rng.uniform();
    const auto m = TransitionModel::from_matrix(
        {0.0, 1.0, 2.0}, Matrix{{1 - a - b, a, b}, {a, 1 - a - c, c}, {b, c, 1 - b - c}});
    const StateFunction f = {rng.uniform(), -rng.uniform(), 2 * rng.uniform()};
    const StateFunction g = {-rng.uniform(), rng.uniform(), rng.uniform()};
    for (std::size_t lag = 0; lag <= 4; ++lag)
      REQUIRE(cov_exact(m, f, g, lag) == Approx(cov_exact(m, g, f, lag)).margin(1e-14));
  }
  // Every two-state chain is reversible.
  const auto m2 = two_state();
  REQUIRE(cov_exact(m2, {1.0, 3.0}, {-1.0, 0.5}, 3) ==
          Approx(cov_exact(m2, {-1.0, 0.5}, {1.0, 3.0}, 3)).margin(1e-14));
}
