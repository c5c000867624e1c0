#pragma once

// Probabilities of hyper-rectangles with iid coordinates, exact differences
// of product probabilities, and the telescoping bound L1(a) + L2(b).
//
// A marginal is anything with cdf(t) = P(T <= t) and cdf_below(t) = P(T < t)
// returning TailPair (LatticeMarginal, GaussianMarginal).

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "hdclt/errors.hpp"
#include "hdclt/gaussian.hpp"
#include "hdclt/lattice.hpp"
#include "hdclt/logdomain.hpp"

namespace hdclt {

template <class M>
concept Marginal = requires(const M& m, logval t) {
  { m.cdf(t) } -> std::convertible_to<TailPair>;
  { m.cdf_below(t) } -> std::convertible_to<TailPair>;
};

inline constexpr std::size_t kMaxRectDim = 10'000'000;

// prod_j [a_j, b_j] intersected with R^p. Endpoints may be infinite.
struct RectangleFamily {
  std::vector<logval> a;
  std::vector<logval> b;

  RectangleFamily() = default;
  RectangleFamily(std::vector<logval> lower, std::vector<logval> upper) : a(std::move(lower)), b(std::move(upper)) {
    validate();
  }

  static RectangleFamily max_type(std::size_t p, logval t) {
    return {std::vector<logval>(p, kNegInf), std::vector<logval>(p, t)};
  }
  static RectangleFamily symmetric(std::size_t p, logval t) {
    return {std::vector<logval>(p, -t), std::vector<logval>(p, t)};
  }

  std::size_t dim() const { return a.size(); }

  void validate() const {
    if (a.empty() || a.size() != b.size()) throw domain_error("RectangleFamily: a and b must be non-empty and equal length");
    if (a.size() > kMaxRectDim) throw resource_error("RectangleFamily: dimension exceeds " + std::to_string(kMaxRectDim));
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (std::isnan(a[j]) || std::isnan(b[j])) throw domain_error("RectangleFamily: NaN endpoint");
      if (a[j] > b[j]) throw domain_error("RectangleFamily: a_j > b_j at j = " + std::to_string(j));
    }
  }
};

// Sorted copies of a coordinate vector.
struct SortedEndpoints {
  std::vector<logval> increasing;
  std::vector<logval> decreasing;

  explicit SortedEndpoints(std::vector<logval> v) : increasing(std::move(v)) {
    std::sort(increasing.begin(), increasing.end());
    decreasing.assign(increasing.rbegin(), increasing.rend());
  }
};

// (P(T in [a, b]), P(T not in [a, b])).
template <Marginal M>
TailPair interval_mass(const M& m, logval a, logval b) {
  const TailPair upper = m.cdf(b);
  const TailPair below = m.cdf_below(a);
  const LogReal mass = cdf_difference(upper, below);
  if (mass.sign <= 0) return TailPair::impossible();
  return {mass.log_abs, logsumexp(below.log_cdf, upper.log_sf)};
}

// P(-T <= x) = 1 - P(T < -x).
template <Marginal M>
TailPair reflected_cdf(const M& m, logval x) {
  return m.cdf_below(-x).complement();
}

namespace detail {

inline const TailPair& larger_cdf(const TailPair& x, const TailPair& y) {
  if (x.cdf_is_small() || y.cdf_is_small()) return x.log_cdf >= y.log_cdf ? x : y;
  return x.log_sf <= y.log_sf ? x : y;
}

// log sum_k exp(terms[k]) for a list of logs, max-shifted with compensation.
inline logval log_sum(const std::vector<logval>& terms) {
  logval top = kNegInf;
  for (logval t : terms) top = std::max(top, t);
  if (top == kNegInf) return kNegInf;
  CompensatedSum acc;
  for (logval t : terms) acc.add(std::exp(t - top));
  return top + std::log(acc.value());
}

// sum_k (prod_{j != k} l_j) d_k, all in logs.
inline logval leave_one_out_sum(const std::vector<logval>& log_l, const std::vector<logval>& log_d) {
  const std::size_t p = log_l.size();
  std::vector<logval> suffix(p + 1, 0);
  for (std::size_t j = p; j-- > 0;) suffix[j] = suffix[j + 1] + log_l[j];
  std::vector<logval> terms(p);
  logval prefix = 0;
  for (std::size_t k = 0; k < p; ++k) {
    terms[k] = (log_d[k] == kNegInf || prefix == kNegInf || suffix[k + 1] == kNegInf) ? kNegInf
                                                                                       : prefix + suffix[k + 1] + log_d[k];
    prefix += log_l[k];
  }
  return log_sum(terms);
}

}  // namespace detail

template <Marginal M>
LogReal rect_prob(const M& m, const RectangleFamily& rect) {
  rect.validate();
  CompensatedSum log_total;
  for (std::size_t j = 0; j < rect.dim(); ++j) {
    const TailPair q = interval_mass(m, rect.a[j], rect.b[j]);
    if (q.log_cdf == kNegInf) return LogReal::zero();
    log_total.add(q.log_cdf);
  }
  return LogReal::from_log(log_total.value());
}

// F^p for p = exp(log_p) identical coordinates; p >= 1.
inline TailPair rect_prob_equal_coords(const TailPair& marginal, logval log_p) {
  if (!(log_p >= 0)) throw domain_error("rect_prob_equal_coords: requires p >= 1 (log_p >= 0)");
  return pow_prob(marginal, log_p);
}

// |prod_j q_j - prod_j g_j| by the telescoping sum
// sum_k (prod_{j<k} q_j)(q_k - g_k)(prod_{j>k} g_j).
template <Marginal F, Marginal G>
LogReal product_diff_exact(const F& f, const G& g, const RectangleFamily& rect) {
  rect.validate();
  const std::size_t p = rect.dim();
  std::vector<logval> log_q(p), log_g(p);
  std::vector<LogReal> diff(p);
  for (std::size_t j = 0; j < p; ++j) {
    const TailPair fb = f.cdf(rect.b[j]), gb = g.cdf(rect.b[j]);
    const TailPair fa = f.cdf_below(rect.a[j]), ga = g.cdf_below(rect.a[j]);
    log_q[j] = interval_mass(f, rect.a[j], rect.b[j]).log_cdf;
    log_g[j] = interval_mass(g, rect.a[j], rect.b[j]).log_cdf;
    // (F(b) - G(b)) - (F(a-) - G(a-))
    diff[j] = log_sub(cdf_difference(fb, gb), cdf_difference(fa, ga));
  }
  std::vector<logval> suffix(p + 1, 0);
  for (std::size_t j = p; j-- > 0;) suffix[j] = suffix[j + 1] + log_g[j];
  std::vector<logval> pos, neg;
  logval prefix = 0;
  for (std::size_t k = 0; k < p; ++k) {
    if (!diff[k].is_zero() && prefix != kNegInf && suffix[k + 1] != kNegInf) {
      const logval t = prefix + diff[k].log_abs + suffix[k + 1];
      (diff[k].sign > 0 ? pos : neg).push_back(t);
    }
    prefix += log_q[k];
  }
  const LogReal total = log_sub(LogReal::from_log(detail::log_sum(pos)), LogReal::from_log(detail::log_sum(neg)));
  return {total.is_zero() ? 0 : 1, total.log_abs};
}

// L1(a) + L2(b): l = larger of the two cdfs, d = |their difference|, taken at
// the points -a (reflected law) and b.
template <Marginal F, Marginal G>
LogReal lemma3_bound(const F& f, const G& g, const RectangleFamily& rect) {
  rect.validate();
  const std::size_t p = rect.dim();
  auto side = [&](const std::vector<logval>& points, bool reflected) {
    std::vector<logval> log_l(p), log_d(p);
    for (std::size_t j = 0; j < p; ++j) {
      const TailPair x = reflected ? reflected_cdf(f, points[j]) : f.cdf(points[j]);
      const TailPair y = reflected ? reflected_cdf(g, points[j]) : g.cdf(points[j]);
      log_l[j] = detail::larger_cdf(x, y).log_cdf;
      log_d[j] = cdf_difference(x, y).log_abs;
    }
    return detail::leave_one_out_sum(log_l, log_d);
  };
  // -a^{(j)}: a sorted decreasingly, then negated, is increasing.
  std::vector<logval> neg_a;
  neg_a.reserve(p);
  for (logval v : SortedEndpoints(rect.a).decreasing) neg_a.push_back(-v);
  const logval l1 = side(neg_a, true);
  const logval l2 = side(SortedEndpoints(rect.b).increasing, false);
  const logval total = logsumexp(l1, l2);
  return total == kNegInf ? LogReal::zero() : LogReal::from_log(total);
}

enum class EqualSide { LeftInfinite, Symmetric };

struct SupResult {
  logval t_star = 0;
  bool left_limit = false;  // sup attained as t -> t_star from below
  double rho = 0;
  logval log_rho = kNegInf;
};

namespace detail {

inline TailPair gauss_symmetric_mass(logval t) {
  if (t <= 0) return TailPair::impossible();
  // 1 - 2(1 - Phi(t))
  const TailPair tp = gauss_tailpair(t);
  const logval log_out = kLn2 + tp.log_sf;
  if (log_out >= 0) return TailPair::impossible();
  return TailPair::from_log_sf(log_out);
}

}  // namespace detail

// sup_t |P(T in R_t)^p - P(Z in R_t)^p| over R_t = (-inf, t] or [-t, t].
// Between two jumps of the lattice side the Gaussian side is monotone in t,
// so only jump points (value and left limit) are candidates.
inline SupResult sup_diff_equal_coords(const LatticeMarginal& f, logval log_p, EqualSide side) {
  if (!(log_p >= 0)) throw domain_error("sup_diff_equal_coords: requires p >= 1 (log_p >= 0)");
  SupResult best;
  auto consider = [&](logval t, bool left, const TailPair& lat, const TailPair& gauss) {
    const LogReal d = cdf_difference(pow_prob(lat, log_p), pow_prob(gauss, log_p));
    const logval v = d.is_zero() ? kNegInf : d.log_abs;
    if (v >= best.log_rho) {
      best.log_rho = v;
      best.t_star = t;
      best.left_limit = left;
    }
  };

  if (side == EqualSide::LeftInfinite) {
    const auto& x = f.points();
    for (std::size_t k = 0; k < x.size(); ++k) {
      const TailPair gauss = gauss_tailpair(x[k]);
      consider(x[k], true, f.cdf_before(k), gauss);
      consider(x[k], false, f.cdf_at(k), gauss);
    }
  } else {
    std::vector<logval> radii;
    for (logval v : f.points()) radii.push_back(std::fabs(v));
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    TailPair prev = TailPair::impossible();
    for (logval r : radii) {
      const TailPair gauss = detail::gauss_symmetric_mass(r);
      if (r > 0) consider(r, true, prev, gauss);
      const TailPair here = interval_mass(f, -r, r);
      consider(r, false, here, gauss);
      prev = here;
    }
  }
  best.rho = best.log_rho == kNegInf ? 0.0 : static_cast<double>(std::exp(best.log_rho));
  return best;
}

// A continuous marginal equal to the Gaussian has no discrepancy.
inline SupResult sup_diff_equal_coords(const GaussianMarginal&, logval log_p, EqualSide) {
  if (!(log_p >= 0)) throw domain_error("sup_diff_equal_coords: requires p >= 1 (log_p >= 0)");
  return {};
}

}  // namespace hdclt
