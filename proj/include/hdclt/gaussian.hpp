#pragma once

// Standard normal tail functions in log scale, the Birnbaum Mills-ratio
// lower bound, and Stirling's two-sided bounds on ln m!.

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include "hdclt/errors.hpp"
#include "hdclt/logdomain.hpp"

namespace hdclt {

inline constexpr double kGaussSeriesSwitch = 8.0;
inline constexpr int kGaussSeriesTermCap = 200;

inline logval gauss_log_pdf(logval t) { return -t * t / 2 - kLnSqrt2Pi; }

namespace detail {

// ln(1 - Phi(u)) for u >= 0.
inline logval gauss_log_upper_tail(logval u, int term_cap) {
  if (u <= kGaussSeriesSwitch) {
    constexpr logval kInvSqrt2 = 0.707106781186547524400844362104849039L;
    return std::log(std::erfc(u * kInvSqrt2) / 2);
  }
  // Mills ratio asymptotic series: (1/u) sum_k (-1)^k (2k-1)!! / u^{2k},
  // truncated at its smallest term.
  const logval inv_u2 = 1 / (u * u);
  logval term = 1;
  logval series = 1;
  for (int k = 1; k <= term_cap; ++k) {
    const logval next = -term * (2 * k - 1) * inv_u2;
    if (std::fabs(next) >= std::fabs(term)) break;
    term = next;
    series += term;
    if (std::fabs(term) < 1e-22L * std::fabs(series)) break;
  }
  return gauss_log_pdf(u) - std::log(u) + std::log(series);
}

}  // namespace detail

// (ln Phi(t), ln(1 - Phi(t))). The smaller of the two is accurate to
// ~1e-15 relative for |t| <= 8 and to the series truncation error beyond.
inline TailPair gauss_tailpair(logval t, int term_cap = kGaussSeriesTermCap) {
  if (std::isnan(t)) throw domain_error("gauss_tailpair: NaN argument");
  if (t == std::numeric_limits<logval>::infinity()) return TailPair::certain();
  if (t == -std::numeric_limits<logval>::infinity()) return TailPair::impossible();
  if (t == 0) return {-kLn2, -kLn2};
  const logval small = detail::gauss_log_upper_tail(std::fabs(t), term_cap);
  const logval large = log1mexp(small);
  return t > 0 ? TailPair{large, small} : TailPair{small, large};
}

// Birnbaum: (1 - Phi(t)) / phi(t) >= 2 / (sqrt(t^2 + 4) + t) for t > 0.
inline double mills_lower(double t) {
  if (!(t > 0)) throw domain_error("mills_lower: requires t > 0");
  return 2.0 / (std::sqrt(t * t + 4.0) + t);
}

struct StirlingBounds {
  logval lower_log;
  logval upper_log;
};

// sqrt(2 pi) m^{m+1/2} e^{-m} <= m! <= m^{m+1/2} e^{-m+1}, in log form.
inline StirlingBounds stirling_bounds(std::uint64_t m) {
  if (m == 0) throw domain_error("stirling_bounds: requires m >= 1");
  const logval lm = static_cast<logval>(m);
  const logval core = (lm + 0.5L) * std::log(lm) - lm;
  return {kLnSqrt2Pi + core, core + 1};
}

// Standard normal marginal; P(Z < t) and P(Z <= t) coincide.
struct GaussianMarginal {
  TailPair cdf(logval t) const { return gauss_tailpair(t); }
  TailPair cdf_below(logval t) const { return gauss_tailpair(t); }
};

}  // namespace hdclt
