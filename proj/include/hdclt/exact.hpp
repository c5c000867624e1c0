#pragma once

// Exact integer/rational helpers over GMP.

#include <gmp.h>

#include <boost/multiprecision/gmp.hpp>
#include <cmath>
#include <cstdint>

#include "hdclt/errors.hpp"
#include "hdclt/logdomain.hpp"

namespace hdclt {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

// Natural log of a non-negative big integer; -inf for zero.
inline logval log_of(const BigInt& x) {
  if (x.sign() < 0) throw domain_error("log_of: negative integer");
  if (x.is_zero()) return kNegInf;
  signed long exp2 = 0;
  const double mant = mpz_get_d_2exp(&exp2, x.backend().data());
  return std::log(static_cast<logval>(mant)) + static_cast<logval>(exp2) * kLn2;
}

inline logval log_of(const Rational& q) {
  if (q.sign() < 0) throw domain_error("log_of: negative rational");
  if (q.is_zero()) return kNegInf;
  return log_of(BigInt(numerator(q))) - log_of(BigInt(denominator(q)));
}

inline BigInt binomial(std::uint64_t n, std::uint64_t k) {
  BigInt out;
  if (k > n) return out;
  mpz_bin_uiui(out.backend().data(), n, k);
  return out;
}

inline BigInt factorial(std::uint64_t m) {
  BigInt out;
  mpz_fac_ui(out.backend().data(), m);
  return out;
}

inline BigInt pow2(std::uint64_t e) {
  BigInt out = 1;
  out <<= e;
  return out;
}

// Exact rational value of a finite double (doubles are dyadic rationals).
inline Rational to_rational(double x) {
  if (!std::isfinite(x)) throw domain_error("to_rational: non-finite value");
  Rational out;
  mpq_set_d(out.backend().data(), x);
  return out;
}

}  // namespace hdclt
