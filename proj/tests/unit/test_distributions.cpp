#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hdclt/distributions.hpp"
#include "oracles.hpp"

using namespace hdclt;
using Catch::Approx;
using oracle::hp200;

namespace {

double rel_err(double got, const hp200& expect) {
  return static_cast<double>(abs((hp200(got) - expect) / expect));
}

LatticeDistribution three_point() { return LatticeDistribution(-1, 1, {Rational(1, 4), Rational(1, 2), Rational(1, 4)}); }

}  // namespace

TEST_CASE("convolve_iid on Rademacher matches binomial laws", "[distributions]") {
  const auto r = LatticeDistribution::rademacher();
  const auto two = convolve_iid(r, 2);
  CHECK(two.offset() == -2);
  CHECK(two.step() == 2);
  CHECK(two.masses() == std::vector<Rational>{Rational(1, 4), Rational(1, 2), Rational(1, 4)});

  const auto four = convolve_iid(r, 4);
  CHECK(four.offset() == -4);
  CHECK(four.masses() ==
        std::vector<Rational>{Rational(1, 16), Rational(4, 16), Rational(6, 16), Rational(4, 16), Rational(1, 16)});

  CHECK(convolve_iid(three_point(), 1) == three_point());
  CHECK(convolve_iid(r, 37) == LatticeDistribution::rademacher_sum(37));
}

TEST_CASE("convolve_iid support bound and cap", "[distributions]") {
  const auto d = three_point();
  for (std::uint64_t n : {1u, 2u, 5u, 13u}) CHECK(convolve_iid(d, n).size() <= n * (d.size() - 1) + 1);
  CHECK_THROWS_AS(convolve_iid(d, 1000, 100), resource_error);
  CHECK_THROWS_AS(LatticeDistribution::rademacher_sum(200, 100), resource_error);
  CHECK_THROWS_AS(convolve_iid(d, 0), hdclt::domain_error);
}

TEST_CASE("convolve_iid is additive in n", "[distributions][property]") {
  const LatticeDistribution skew(Rational(-3, 2), Rational(1, 2), {Rational(1, 3), 0, Rational(1, 6), Rational(1, 2)});
  for (std::uint64_t a = 1; a <= 6; ++a) {
    for (std::uint64_t b = 1; b <= 6; ++b) {
      CHECK(convolve_iid(skew, a + b) == convolve(convolve_iid(skew, a), convolve_iid(skew, b)));
    }
  }
}

TEST_CASE("LatticeDistribution invariants", "[distributions]") {
  const LatticeDistribution padded(0, 1, {0, 0, Rational(1, 2), Rational(1, 2), 0});
  CHECK(padded.offset() == 2);
  CHECK(padded.size() == 2);
  CHECK_THROWS_AS(LatticeDistribution(0, 1, {Rational(1, 2), Rational(1, 3)}), hdclt::domain_error);
  CHECK_THROWS_AS(LatticeDistribution(0, 0, {1}), hdclt::domain_error);
  CHECK_THROWS_AS(LatticeDistribution(0, 1, {Rational(3, 2), Rational(-1, 2)}), hdclt::domain_error);
  CHECK(three_point().is_symmetric());
  CHECK_FALSE(padded.is_symmetric());
  CHECK(three_point().variance() == Rational(1, 2));
}

TEST_CASE("lattice_cdf examples", "[distributions]") {
  const auto two = LatticeDistribution::rademacher_sum(2);
  CHECK(static_cast<double>(lattice_cdf(two, 0).log_cdf) == Approx(std::log(0.75)).epsilon(1e-15));
  CHECK(lattice_cdf(two, -2.5).log_cdf == kNegInf);
  CHECK(lattice_cdf(two, -2.5).log_sf == 0);
  CHECK(lattice_cdf(two, 2).log_cdf == 0);
  CHECK(lattice_cdf(two, 2).log_sf == kNegInf);

  // n = 100, P(S > 72) = sum_{k >= 87} C(100, k) / 2^100.
  const auto hundred = LatticeDistribution::rademacher_sum(100);
  const hp200 expect = log(hp200(oracle::binomial_upper_sum(100, 86))) - 100 * log(hp200(2));
  const TailPair tp = lattice_cdf(hundred, 72);
  CHECK(static_cast<double>(tp.log_sf) == Approx(-32.657).margin(0.01));
  CHECK(std::fabs(static_cast<double>(tp.log_sf) - expect.convert_to<double>()) < 1e-12);
  CHECK(lattice_tail_exact(hundred, 72).sf == Rational(oracle::binomial_upper_sum(100, 86), pow2(100)));
}

TEST_CASE("lattice_cdf matches full enumeration", "[distributions]") {
  for (unsigned n = 2; n <= 20; ++n) {
    const auto hist = oracle::rademacher_histogram(n);
    const auto law = LatticeDistribution::rademacher_sum(n);
    oracle::bigint running = 0;
    for (unsigned k = 0; k <= n; ++k) {
      running += hist[k];
      const double s = 2.0 * k - n;
      const auto exact = lattice_tail_exact(law, s);
      REQUIRE(exact.cdf == oracle::rational(running, oracle::bigint(1) << n));
      REQUIRE(exact.cdf + exact.sf == 1);
      // half a step below lands on the previous jump
      const auto below = lattice_tail_exact(law, s - 0.5);
      REQUIRE(below.cdf == oracle::rational(running - hist[k], oracle::bigint(1) << n));
    }
  }
}

TEST_CASE("lattice_cdf is a non-decreasing right-continuous step", "[distributions][property]") {
  const auto law = convolve_iid(three_point(), 9);
  const LatticeMarginal marg(law, std::sqrt(4.5L));
  TailPair prev = TailPair::impossible();
  for (double t = -10; t <= 10; t += 0.01) {
    const TailPair cur = lattice_cdf(law, t);
    REQUIRE(cur.log_cdf >= prev.log_cdf);
    REQUIRE(std::fabs(static_cast<double>(logsumexp(cur.log_cdf, cur.log_sf))) < 1e-14);
    prev = cur;
  }
  CHECK(lattice_cdf(law, 9).log_cdf == 0);
  CHECK(marg.cdf_at(marg.size() - 1).log_cdf == 0);
  CHECK(marg.cdf_at(marg.size() - 1).log_sf == kNegInf);
  for (std::size_t k = 0; k < marg.size(); ++k) {
    const logval x = marg.points()[k];
    REQUIRE(marg.cdf(x) == marg.cdf_at(k));
    REQUIRE(marg.cdf_below(x) == marg.cdf_before(k));
    REQUIRE(marg.cdf(x * (1 + 1e-15L)) == marg.cdf_at(k));
  }
}

TEST_CASE("gauss_tailpair examples", "[distributions]") {
  const TailPair zero = gauss_tailpair(0);
  CHECK(zero.log_cdf == -kLn2);
  CHECK(zero.log_sf == -kLn2);
  CHECK(rel_err(gauss_tailpair(1).sf(), oracle::gauss_sf(hp200(1))) < 1e-12);
  CHECK(gauss_tailpair(1).sf() == Approx(0.158655).epsilon(1e-5));
  const hp200 s20 = sqrt(hp200(20));
  CHECK(rel_err(gauss_tailpair(std::sqrt(20.0L)).sf(), oracle::gauss_sf(s20)) < 1e-9);
}

TEST_CASE("gauss_tailpair relative accuracy", "[distributions][property]") {
  // The smaller side, compared in log scale: |d log| bounds the relative error.
  auto check_at = [](double t, double tol) {
    const TailPair tp = gauss_tailpair(t);
    using oracle::hp50;
    const hp50 expect = log(oracle::gauss_sf(hp50(std::fabs(t))));
    const logval got = t >= 0 ? tp.log_sf : tp.log_cdf;
    const long double err = std::fabs(got - static_cast<logval>(expect.convert_to<long double>()));
    return err <= tol;
  };
  for (double t = -40; t <= 40; t += 0.0137) REQUIRE(check_at(t, 1e-13));
  for (double t : {8.0, 8.0000001, 7.9999999, 41.0, 100.0, 1000.0, 1e4, -1e4, -523.25}) REQUIRE(check_at(t, 1e-10));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> far(40, 1e4);
  for (int i = 0; i < 100; ++i) REQUIRE(check_at(far(rng), 1e-10));
}

TEST_CASE("mills_lower examples and the Mills inequality", "[distributions]") {
  CHECK(mills_lower(1e-12) == Approx(1.0).epsilon(1e-11));
  CHECK(mills_lower(1) == Approx(0.618034).epsilon(1e-6));
  CHECK(mills_lower(10) == Approx(0.09902).epsilon(1e-4));
  CHECK_THROWS_AS(mills_lower(0), hdclt::domain_error);
  CHECK_THROWS_AS(mills_lower(-1), hdclt::domain_error);
  const double ratio_1 = std::exp(static_cast<double>(gauss_tailpair(1).log_sf - gauss_log_pdf(1)));
  CHECK(ratio_1 == Approx(0.65568).epsilon(1e-5));

  for (int i = 1; i <= 4000; ++i) {
    const double t = i * 0.01;
    const logval log_ratio = gauss_tailpair(t).log_sf - gauss_log_pdf(t);
    REQUIRE(log_ratio >= std::log(static_cast<logval>(mills_lower(t))));
  }
}

TEST_CASE("stirling_bounds examples and bracketing", "[distributions]") {
  const auto one = stirling_bounds(1);
  CHECK(std::exp(static_cast<double>(one.lower_log)) == Approx(0.92214).epsilon(1e-5));
  CHECK(one.upper_log == 0);
  const auto ten = stirling_bounds(10);
  CHECK(ten.lower_log <= std::log(3628800.0L));
  CHECK(ten.upper_log >= std::log(3628800.0L));
  const auto big = stirling_bounds(1'000'000);
  CHECK(static_cast<double>(big.upper_log - big.lower_log) == Approx(1 - 0.5 * std::log(2 * M_PI)).epsilon(1e-9));
  CHECK_THROWS_AS(stirling_bounds(0), hdclt::domain_error);

  for (std::uint64_t m = 1; m <= 100000; ++m) {
    const auto b = stirling_bounds(m);
    const auto lg = oracle::lgamma(oracle::hp50(m + 1)).convert_to<long double>();
    REQUIRE(b.lower_log <= lg);
    REQUIRE(b.upper_log >= lg);
  }
}

TEST_CASE("moment_2m", "[distributions]") {
  for (std::uint64_t n : {1u, 3u, 50u}) {
    const auto model = ComponentModel::rademacher(n);
    CHECK(model.s_n_sq_exact() == Rational(static_cast<long long>(n)));
    for (unsigned m = 1; m <= 50; ++m) {
      REQUIRE(moment_2m_exact(model, m) == 1);
      // (A.4) with l = 2: 1 <= 2^{-m} (2m)! / m!
      REQUIRE(Rational(factorial(2 * m), factorial(m) * pow2(m)) >= 1);
    }
  }
  const auto tp = ComponentModel::lattice(three_point(), 1);
  CHECK(moment_2m_exact(tp, 1) == 1);
  CHECK(moment_2m_exact(tp, 2) == 2);
  CHECK(moment_2m(ComponentModel::lattice(three_point(), 7), 1) == 1.0);
  CHECK_THROWS_AS(moment_2m(tp, 201), resource_error);
  CHECK_THROWS_AS(moment_2m(ComponentModel::gaussian(4), 2), hdclt::domain_error);
}
