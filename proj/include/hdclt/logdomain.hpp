#pragma once

// Signed log-scale arithmetic. Probabilities such as Phi(sqrt(n))^p with
// log p ~ n/2 are carried as logarithms so that neither the power nor the
// complement 1 - F^p under/overflows.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "hdclt/errors.hpp"

namespace hdclt {

// Scalar type for every log-scale quantity in the library.
using logval = long double;

inline constexpr logval kNegInf = -std::numeric_limits<logval>::infinity();
inline constexpr logval kLn2 = 0.693147180559945309417232121458176568L;
inline constexpr logval kLnSqrt2Pi = 0.918938533204672741780329736405617640L;
inline constexpr logval kPi = 3.141592653589793238462643383279502884L;

// log(1 - e^x) for x <= 0 (Maechler's switch at -ln 2).
inline logval log1mexp(logval x) {
  if (x > 0) throw domain_error("log1mexp: argument must be <= 0");
  if (x == 0) return kNegInf;
  if (x > -kLn2) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

// log(1 + e^x).
inline logval log1pexp(logval x) {
  if (x <= -37) return std::exp(x);
  if (x <= 18) return std::log1p(std::exp(x));
  if (x <= 33.3L) return x + std::exp(-x);
  return x;
}

// log(e^a + e^b) for non-negative magnitudes.
inline logval logsumexp(logval a, logval b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const logval hi = std::max(a, b);
  return hi + log1pexp(std::min(a, b) - hi);
}

// Neumaier-compensated accumulator for long sums of logarithms.
class CompensatedSum {
 public:
  void add(logval x) {
    if (!std::isfinite(x)) {
      special_ += x;
      return;
    }
    const logval t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  logval value() const { return special_ != 0 ? special_ : sum_ + comp_; }

 private:
  logval sum_ = 0;
  logval comp_ = 0;
  logval special_ = 0;
};

// A signed real stored as (sign, log|value|).
struct LogReal {
  int sign = 0;              // -1, 0, +1
  logval log_abs = kNegInf;  // -inf iff sign == 0

  static LogReal zero() { return {}; }
  static LogReal one() { return {1, 0}; }
  static LogReal from_log(logval log_abs, int sign = 1) {
    if (log_abs == kNegInf || sign == 0) return {};
    return {sign > 0 ? 1 : -1, log_abs};
  }
  static LogReal from_value(long double v) {
    if (v == 0) return {};
    return {v > 0 ? 1 : -1, std::log(std::fabs(v))};
  }

  long double value() const { return sign == 0 ? 0.0L : sign * std::exp(log_abs); }
  double to_double() const { return static_cast<double>(value()); }
  bool is_zero() const { return sign == 0; }

  LogReal operator-() const { return {-sign, log_abs}; }
  friend bool operator==(const LogReal&, const LogReal&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const LogReal& x) {
  return os << "LogReal{" << x.sign << ", " << static_cast<double>(x.log_abs) << "}";
}

inline LogReal log_add(const LogReal& x, const LogReal& y) {
  if (x.sign == 0) return y;
  if (y.sign == 0) return x;
  const bool x_bigger = x.log_abs >= y.log_abs;
  const LogReal& big = x_bigger ? x : y;
  const LogReal& small = x_bigger ? y : x;
  const logval gap = small.log_abs - big.log_abs;  // <= 0
  if (big.sign == small.sign) return {big.sign, big.log_abs + log1pexp(gap)};
  if (gap == 0) return LogReal::zero();
  return {big.sign, big.log_abs + log1mexp(gap)};
}

inline LogReal log_sub(const LogReal& x, const LogReal& y) { return log_add(x, -y); }

inline LogReal log_mul(const LogReal& x, const LogReal& y) {
  if (x.sign == 0 || y.sign == 0) return LogReal::zero();
  return {x.sign * y.sign, x.log_abs + y.log_abs};
}

inline LogReal log_pow(const LogReal& x, logval e) {
  if (x.sign == 0) {
    if (e > 0) return LogReal::zero();
    throw domain_error("log_pow: zero base requires a positive exponent");
  }
  int sign = 1;
  if (x.sign < 0) {
    if (std::trunc(e) != e) throw domain_error("log_pow: negative base with non-integer exponent");
    sign = std::fmod(std::fabs(e), 2.0L) == 1 ? -1 : 1;
  }
  if (x.log_abs == 0) return {sign, 0};
  return {sign, x.log_abs * e};
}

// (ln P(T <= t), ln P(T > t)). Whichever probability is tiny is held at
// full relative precision, so conversions should read the smaller field.
struct TailPair {
  logval log_cdf = 0;
  logval log_sf = kNegInf;

  static TailPair certain() { return {0, kNegInf}; }
  static TailPair impossible() { return {kNegInf, 0}; }
  // Build from the log of the smaller side.
  static TailPair from_log_cdf(logval log_cdf) { return {log_cdf, log1mexp(log_cdf)}; }
  static TailPair from_log_sf(logval log_sf) { return {log1mexp(log_sf), log_sf}; }

  double cdf() const { return static_cast<double>(std::exp(log_cdf)); }
  double sf() const { return static_cast<double>(std::exp(log_sf)); }
  TailPair complement() const { return {log_sf, log_cdf}; }
  bool cdf_is_small() const { return log_cdf <= log_sf; }

  friend bool operator==(const TailPair&, const TailPair&) = default;
};

// Signed LogReal for a.cdf - b.cdf, formed from the smaller fields so that
// differences of values near 1 keep their relative precision.
inline LogReal cdf_difference(const TailPair& a, const TailPair& b) {
  if (!a.cdf_is_small() && !b.cdf_is_small()) {
    // (1 - sf_a) - (1 - sf_b) = sf_b - sf_a
    return log_sub(LogReal::from_log(b.log_sf), LogReal::from_log(a.log_sf));
  }
  return log_sub(LogReal::from_log(a.log_cdf), LogReal::from_log(b.log_cdf));
}

// ln(-ln F) computed from whichever field of tp is more accurate.
inline logval log_neg_log_cdf(const TailPair& tp) {
  if (tp.log_cdf == kNegInf) return std::numeric_limits<logval>::infinity();
  if (tp.log_sf == kNegInf) return kNegInf;
  if (tp.log_sf < -kLn2) {
    // -ln(1 - s) = s (1 + s/2 + s^2/3 + ...), keep the factor in log form.
    const logval s = std::exp(tp.log_sf);
    if (s == 0) return tp.log_sf;
    return tp.log_sf + std::log(-std::log1p(-s) / s);
  }
  return std::log(-tp.log_cdf);
}

// (F^p, 1 - F^p) with p supplied as log p; valid for log p far beyond the
// range where p itself is representable.
inline TailPair pow_prob(const TailPair& tp, logval log_p) {
  if (!std::isfinite(log_p)) throw domain_error("pow_prob: log_p must be finite");
  const logval l = log_neg_log_cdf(tp);
  if (l == kNegInf) return TailPair::certain();
  if (l == std::numeric_limits<logval>::infinity()) return TailPair::impossible();
  const logval log_y = log_p + l;  // ln(-ln F^p)
  if (log_y > 11356) return TailPair::impossible();
  const logval y = std::exp(log_y);
  TailPair out;
  out.log_cdf = -y;
  if (log_y < -20) {
    // 1 - e^{-y} = y (1 - y/2 + ...)
    out.log_sf = log_y + std::log1p(-y / 2);
  } else {
    out.log_sf = log1mexp(-y);
  }
  return out;
}

}  // namespace hdclt
