#pragma once

// Exact laws on arithmetic lattices {offset + step * k}. Masses are kept as
// integer weights over one common denominator, so every probability below
// is an exact rational until the final conversion to log scale.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hdclt/errors.hpp"
#include "hdclt/exact.hpp"
#include "hdclt/logdomain.hpp"

namespace hdclt {

inline constexpr std::size_t kDefaultSupportCap = 1'000'000;

class LatticeDistribution {
 public:
  // masses[k] is the probability of offset + step * k. Zero masses at either
  // end are trimmed (and the offset shifted accordingly).
  LatticeDistribution(Rational offset, Rational step, const std::vector<Rational>& masses)
      : offset_(std::move(offset)), step_(std::move(step)) {
    if (step_ <= 0) throw domain_error("LatticeDistribution: step must be positive");
    if (masses.empty()) throw domain_error("LatticeDistribution: empty mass list");
    BigInt common = 1;
    for (const auto& m : masses) {
      if (m < 0) throw domain_error("LatticeDistribution: negative mass");
      common = boost::multiprecision::lcm(common, BigInt(boost::multiprecision::denominator(m)));
    }
    weights_.reserve(masses.size());
    for (const auto& m : masses) {
      weights_.push_back(BigInt(boost::multiprecision::numerator(m)) * (common / BigInt(boost::multiprecision::denominator(m))));
    }
    denominator_ = common;
    finish();
  }

  // Weights need not be reduced; they must sum to `denominator`.
  static LatticeDistribution from_weights(Rational offset, Rational step, std::vector<BigInt> weights,
                                          BigInt denominator) {
    LatticeDistribution d;
    d.offset_ = std::move(offset);
    d.step_ = std::move(step);
    d.weights_ = std::move(weights);
    d.denominator_ = std::move(denominator);
    if (d.step_ <= 0) throw domain_error("LatticeDistribution: step must be positive");
    if (d.weights_.empty()) throw domain_error("LatticeDistribution: empty weight list");
    for (const auto& w : d.weights_) {
      if (w < 0) throw domain_error("LatticeDistribution: negative weight");
    }
    d.finish();
    return d;
  }

  // +-1 with probability 1/2 each.
  static LatticeDistribution rademacher() { return from_weights(-1, 2, {1, 1}, 2); }

  // Law of the sum of n iid Rademacher variables, built from binomial
  // coefficients directly.
  static LatticeDistribution rademacher_sum(std::uint64_t n, std::size_t support_cap = kDefaultSupportCap) {
    if (n == 0) throw domain_error("rademacher_sum: n must be positive");
    if (n + 1 > support_cap) throw resource_error("rademacher_sum: support exceeds cap");
    std::vector<BigInt> w(n + 1);
    w[0] = 1;
    for (std::uint64_t k = 0; k < n; ++k) w[k + 1] = w[k] * (n - k) / (k + 1);
    return from_weights(-Rational(static_cast<long long>(n)), 2, std::move(w), pow2(n));
  }

  std::size_t size() const { return weights_.size(); }
  const Rational& offset() const { return offset_; }
  const Rational& step() const { return step_; }
  const std::vector<BigInt>& weights() const { return weights_; }
  const BigInt& denominator() const { return denominator_; }

  Rational mass(std::size_t k) const { return Rational(weights_.at(k), denominator_); }
  std::vector<Rational> masses() const {
    std::vector<Rational> out;
    out.reserve(size());
    for (std::size_t k = 0; k < size(); ++k) out.push_back(mass(k));
    return out;
  }
  Rational point(std::size_t k) const { return offset_ + step_ * static_cast<long long>(k); }

  // E X^j, exact.
  Rational raw_moment(unsigned j) const {
    Rational acc = 0;
    for (std::size_t k = 0; k < size(); ++k) {
      if (!weights_[k].is_zero()) acc += Rational(weights_[k]) * pow(point(k), j);
    }
    return acc / Rational(denominator_);
  }
  Rational mean() const { return raw_moment(1); }
  Rational variance() const {
    const Rational m = mean();
    return raw_moment(2) - m * m;
  }

  // Symmetric about 0: x_k = -x_{K-1-k} and equal masses.
  bool is_symmetric() const {
    const std::size_t K = size();
    if (point(0) != -point(K - 1)) return false;
    for (std::size_t k = 0; k < K / 2; ++k) {
      if (weights_[k] != weights_[K - 1 - k]) return false;
    }
    return true;
  }

  friend bool operator==(const LatticeDistribution& a, const LatticeDistribution& b) {
    if (a.offset_ != b.offset_ || a.step_ != b.step_ || a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a.weights_[k] * b.denominator_ != b.weights_[k] * a.denominator_) return false;
    }
    return true;
  }

 private:
  LatticeDistribution() = default;

  static Rational pow(const Rational& x, unsigned j) {
    Rational out = 1;
    for (unsigned i = 0; i < j; ++i) out *= x;
    return out;
  }

  void finish() {
    std::size_t lo = 0;
    while (lo < weights_.size() && weights_[lo].is_zero()) ++lo;
    if (lo == weights_.size()) throw domain_error("LatticeDistribution: all masses are zero");
    std::size_t hi = weights_.size();
    while (weights_[hi - 1].is_zero()) --hi;
    if (lo > 0 || hi < weights_.size()) {
      weights_ = std::vector<BigInt>(weights_.begin() + static_cast<std::ptrdiff_t>(lo),
                                     weights_.begin() + static_cast<std::ptrdiff_t>(hi));
      offset_ += step_ * static_cast<long long>(lo);
    }
    BigInt total = 0;
    for (const auto& w : weights_) total += w;
    if (total != denominator_) throw domain_error("LatticeDistribution: masses must sum to exactly 1");
    BigInt g = denominator_;
    for (const auto& w : weights_) {
      if (g == 1) break;
      if (!w.is_zero()) g = boost::multiprecision::gcd(g, w);
    }
    if (g > 1) {
      for (auto& w : weights_) w /= g;
      denominator_ /= g;
    }
  }

  Rational offset_;
  Rational step_;
  std::vector<BigInt> weights_;
  BigInt denominator_;
};

// Law of X + Y for independent X ~ a, Y ~ b on the same step.
inline LatticeDistribution convolve(const LatticeDistribution& a, const LatticeDistribution& b,
                                    std::size_t support_cap = kDefaultSupportCap) {
  if (a.step() != b.step()) throw domain_error("convolve: lattices must share one step");
  const std::size_t out_size = a.size() + b.size() - 1;
  if (out_size > support_cap) {
    throw resource_error("convolve: output support " + std::to_string(out_size) + " exceeds cap " +
                         std::to_string(support_cap));
  }
  std::vector<BigInt> w(out_size);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.weights()[i].is_zero()) continue;
    for (std::size_t j = 0; j < b.size(); ++j) w[i + j] += a.weights()[i] * b.weights()[j];
  }
  return LatticeDistribution::from_weights(a.offset() + b.offset(), a.step(), std::move(w),
                                           a.denominator() * b.denominator());
}

// n-fold convolution by binary exponentiation.
inline LatticeDistribution convolve_iid(const LatticeDistribution& d, std::uint64_t n,
                                        std::size_t support_cap = kDefaultSupportCap) {
  if (n == 0) throw domain_error("convolve_iid: n must be >= 1");
  const auto final_size = static_cast<long double>(n) * static_cast<long double>(d.size() - 1) + 1;
  if (final_size > static_cast<long double>(support_cap)) {
    throw resource_error("convolve_iid: output support exceeds cap " + std::to_string(support_cap));
  }
  LatticeDistribution base = d;
  bool have_acc = false;
  LatticeDistribution acc = d;
  while (true) {
    if (n & 1U) {
      acc = have_acc ? convolve(acc, base, support_cap) : base;
      have_acc = true;
    }
    n >>= 1U;
    if (n == 0) break;
    base = convolve(base, base, support_cap);
  }
  return acc;
}

struct ExactTail {
  Rational cdf;  // P(S <= t)
  Rational sf;   // P(S > t)
};

namespace detail {

// Number of support points <= t (exact comparison against the double t).
inline std::size_t count_at_or_below(const LatticeDistribution& d, double t) {
  if (std::isnan(t)) throw domain_error("lattice: NaN threshold");
  if (t == std::numeric_limits<double>::infinity()) return d.size();
  if (t == -std::numeric_limits<double>::infinity()) return 0;
  const Rational u = (to_rational(t) - d.offset()) / d.step();
  if (u < 0) return 0;
  BigInt fl = numerator(u) / denominator(u);  // floor for u >= 0
  if (fl >= static_cast<long long>(d.size())) return d.size();
  return static_cast<std::size_t>(fl.convert_to<long long>()) + 1;
}

// Sum of weights over [0, count) or its complement, whichever is shorter.
inline std::pair<BigInt, BigInt> split_weights(const LatticeDistribution& d, std::size_t count) {
  BigInt lower = 0;
  BigInt upper = 0;
  if (count <= d.size() / 2) {
    for (std::size_t k = 0; k < count; ++k) lower += d.weights()[k];
    upper = d.denominator() - lower;
  } else {
    for (std::size_t k = count; k < d.size(); ++k) upper += d.weights()[k];
    lower = d.denominator() - upper;
  }
  return {lower, upper};
}

}  // namespace detail

// Exact (P(S <= t), P(S > t)), right-continuous.
inline ExactTail lattice_tail_exact(const LatticeDistribution& d, double t) {
  auto [lower, upper] = detail::split_weights(d, detail::count_at_or_below(d, t));
  return {Rational(lower, d.denominator()), Rational(upper, d.denominator())};
}

inline TailPair lattice_cdf(const LatticeDistribution& d, double t) {
  auto [lower, upper] = detail::split_weights(d, detail::count_at_or_below(d, t));
  const logval log_den = log_of(d.denominator());
  return {log_of(lower) - log_den, log_of(upper) - log_den};
}

// Marginal of S / scale for a lattice law S, with all jump-point tail pairs
// precomputed from exact prefix sums.
class LatticeMarginal {
 public:
  LatticeMarginal(const LatticeDistribution& d, logval scale) : scale_(scale) {
    if (!(scale > 0)) throw domain_error("LatticeMarginal: scale must be positive");
    const std::size_t K = d.size();
    offset_ = static_cast<logval>(d.offset().convert_to<long double>());
    step_ = static_cast<logval>(d.step().convert_to<long double>());
    points_.resize(K);
    at_.resize(K);
    const logval log_den = log_of(d.denominator());
    BigInt prefix = 0;
    for (std::size_t k = 0; k < K; ++k) {
      points_[k] = static_cast<logval>(d.point(k).convert_to<long double>()) / scale_;
      prefix += d.weights()[k];
      at_[k] = {log_of(prefix) - log_den, log_of(BigInt(d.denominator() - prefix)) - log_den};
    }
  }

  std::size_t size() const { return points_.size(); }
  const std::vector<logval>& points() const { return points_; }
  logval scale() const { return scale_; }

  // P(T <= x_k).
  const TailPair& cdf_at(std::size_t k) const { return at_.at(k); }
  // P(T < x_k).
  TailPair cdf_before(std::size_t k) const { return k == 0 ? TailPair::impossible() : at_.at(k - 1); }

  TailPair cdf(logval t) const {
    const std::size_t c = count_le(t);
    return c == 0 ? TailPair::impossible() : at_[c - 1];
  }
  TailPair cdf_below(logval t) const {
    const std::size_t c = count_lt(t);
    return c == 0 ? TailPair::impossible() : at_[c - 1];
  }

  // A threshold within this fraction of a lattice step of a support point is
  // treated as equal to it.
  static constexpr logval kSnap = 1e-9L;

 private:
  logval lattice_coordinate(logval t) const { return (t * scale_ - offset_) / step_; }

  std::size_t count_le(logval t) const {
    if (std::isnan(t)) throw domain_error("LatticeMarginal: NaN threshold");
    if (t == std::numeric_limits<logval>::infinity()) return size();
    if (t == -std::numeric_limits<logval>::infinity()) return 0;
    const logval v = std::floor(lattice_coordinate(t) + kSnap);
    if (v < 0) return 0;
    if (v >= static_cast<logval>(size())) return size();
    return static_cast<std::size_t>(v) + 1;
  }
  std::size_t count_lt(logval t) const {
    if (std::isnan(t)) throw domain_error("LatticeMarginal: NaN threshold");
    if (t == std::numeric_limits<logval>::infinity()) return size();
    if (t == -std::numeric_limits<logval>::infinity()) return 0;
    const logval v = std::ceil(lattice_coordinate(t) - kSnap);
    if (v <= 0) return 0;
    if (v >= static_cast<logval>(size())) return size();
    return static_cast<std::size_t>(v);
  }

  logval scale_;
  logval offset_ = 0;
  logval step_ = 1;
  std::vector<logval> points_;
  std::vector<TailPair> at_;
};

}  // namespace hdclt
