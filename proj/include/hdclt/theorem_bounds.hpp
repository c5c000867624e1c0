#pragma once

// Upper-bound pipelines for the high-dimensional CLT error over rectangles:
// the endpoint partition, the four bound pieces, and the t-free aggregates,
// for the o(sqrt n) regime (I-pieces, A_n) and the eps*sqrt(n) regime
// (J-pieces).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hdclt/errors.hpp"
#include "hdclt/gaussian.hpp"
#include "hdclt/logdomain.hpp"
#include "hdclt/nonuniform_be.hpp"

namespace hdclt {

struct Partition {
  std::size_t l1 = 0, l2 = 0, l3 = 0;
  logval lower = 0, mid = 1, upper = 0;
};

// l1 = #{t < lower}, l2 = #{t < 1}, l3 = #{t <= upper}.
inline Partition partition_endpoints(const std::vector<logval>& t, logval lower, logval upper) {
  if (!(lower < 1 && 1 <= upper)) throw domain_error("partition_endpoints: requires lower < 1 <= upper");
  if (!std::is_sorted(t.begin(), t.end())) throw domain_error("partition_endpoints: t must be sorted");
  Partition part;
  part.lower = lower;
  part.upper = upper;
  part.l1 = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), lower) - t.begin());
  part.l2 = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), logval{1}) - t.begin());
  part.l3 = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), upper) - t.begin());
  return part;
}

// Sorted endpoints as (value, multiplicity) groups, so that p can be far
// larger than anything we could store coordinate by coordinate.
struct EndpointProfile {
  struct Group {
    logval value;
    logval count;
  };
  std::vector<Group> groups;

  static EndpointProfile from_values(std::vector<logval> t) {
    std::sort(t.begin(), t.end());
    EndpointProfile out;
    for (logval v : t) {
      if (std::isnan(v)) throw domain_error("EndpointProfile: NaN endpoint");
      if (!out.groups.empty() && out.groups.back().value == v) {
        out.groups.back().count += 1;
      } else {
        out.groups.push_back({v, 1});
      }
    }
    return out;
  }

  static EndpointProfile from_groups(std::vector<Group> g) {
    std::sort(g.begin(), g.end(), [](const Group& a, const Group& b) { return a.value < b.value; });
    EndpointProfile out;
    for (const auto& x : g) {
      if (std::isnan(x.value) || !(x.count > 0)) throw domain_error("EndpointProfile: bad group");
      if (!out.groups.empty() && out.groups.back().value == x.value) {
        out.groups.back().count += x.count;
      } else {
        out.groups.push_back(x);
      }
    }
    return out;
  }

  logval total() const {
    logval s = 0;
    for (const auto& g : groups) s += g.count;
    return s;
  }
  logval log_p() const { return std::log(total()); }
  bool empty() const { return groups.empty(); }
};

// sup_{x > 0} x c^{-x} = (log c)^{-1} c^{-(log c)^{-1}} for c > 1.
inline logval sup_x_c_pow_neg_x(logval c) {
  if (!(c > 1)) throw domain_error("sup_x_c_pow_neg_x: requires c > 1");
  const logval lc = std::log(c);
  return std::pow(c, -1 / lc) / lc;
}

// Split index for the sign rule: coordinates before the split have
// sum_{j != l} z_j/(1 - z_j) < 1 (I31 non-increasing there), the rest >= 1.
inline std::size_t i31_extremal_profile(const std::vector<logval>& z) {
  logval total = 0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!(z[j] > 0 && z[j] < 1)) throw domain_error("i31_extremal_profile: z must lie in (0, 1)");
    if (j > 0 && z[j] > z[j - 1]) throw domain_error("i31_extremal_profile: z must be non-increasing");
    total += z[j] / (1 - z[j]);
  }
  std::size_t m = 0;
  while (m < z.size() && total - z[m] / (1 - z[m]) < 1) ++m;
  return m;
}

// sum_k w_k exp(-t_k^2/2) prod_{j != k} (1 - z_j), with z_j = z_scale exp(-t_j^2/2)
// and w the d-envelope coefficient.
inline logval i31_value(const std::vector<logval>& t, logval d_coeff, logval z_scale) {
  logval log_prod = 0;
  std::vector<logval> z(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    z[j] = z_scale * std::exp(-t[j] * t[j] / 2);
    log_prod += std::log1p(-z[j]);
  }
  logval acc = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    acc += d_coeff * std::exp(-t[k] * t[k] / 2 + log_prod - std::log1p(-z[k]));
  }
  return acc;
}

// I31 with the first m coordinates moved to 1 and the rest to `upper`.
inline logval i31_at_extremal(const std::vector<logval>& t, logval upper, logval d_coeff, logval z_scale) {
  std::vector<logval> z(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) z[j] = z_scale * std::exp(-t[j] * t[j] / 2);
  const std::size_t m = i31_extremal_profile(z);
  std::vector<logval> moved(t.size(), upper);
  std::fill(moved.begin(), moved.begin() + static_cast<std::ptrdiff_t>(m), logval{1});
  return i31_value(moved, d_coeff, z_scale);
}

// I31 is affine in each z_j, so over t in [1, upper]^k its maximum sits at a
// vertex; by symmetry only the number of coordinates at 1 matters.
inline logval i31_vertex_max(std::size_t k, logval upper, logval d_coeff, logval z_scale) {
  logval best = 0;
  for (std::size_t m = 0; m <= k; ++m) {
    std::vector<logval> v(k, upper);
    std::fill(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), logval{1});
    best = std::max(best, i31_value(v, d_coeff, z_scale));
  }
  return best;
}

struct BoundReport {
  std::array<double, 4> pieces{};  // I1..I4 or J1..J4
  double a1 = 0, a2 = 0, a3 = 0, total = 0;
  // I1 + I4 <= A1n, I2 <= A2n, I3 <= A3n
  std::array<bool, 3> piece_within{};
  logval l1 = 0, l2 = 0, l3 = 0;  // region counts
  double n = 0;
  logval log_p = 0;
  double scale = 0;  // a_n (first regime) or epsilon (second regime)
  double l = 2;
  BoundConstants constants;
};

namespace detail {

struct PieceSpec {
  logval lower, upper;
  logval outer_coeff;  // b1
  logval outer_rate;   // 1 - 1/l
  logval inner_coeff;  // coefficient of exp(-x^2/2) in the d-envelope
  logval z_scale;      // l-envelope on [1, upper] is 1 - z_scale exp(-x^2/2)
};

inline logval log_sum_terms(const std::vector<logval>& terms) {
  logval top = kNegInf;
  for (logval t : terms) top = std::max(top, t);
  if (top == kNegInf) return kNegInf;
  logval s = 0;
  for (logval t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

inline void four_pieces(const EndpointProfile& prof, const PieceSpec& s, BoundReport& r) {
  const logval log_dinv = std::log(d_inverse());
  logval c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  std::vector<logval> t1, t2, t3, t4;
  logval log_prod = 0;  // sum over region 3 of count * log(1 - z)
  for (const auto& g : prof.groups) {
    const logval x = g.value, lc = std::log(g.count);
    if (x < s.lower) {
      c1 += g.count;
      t1.push_back(lc + std::log(s.outer_coeff) - x * x * s.outer_rate);
    } else if (x < 1) {
      c2 += g.count;
      t2.push_back(lc + std::log(s.inner_coeff) - x * x / 2);
    } else if (x <= s.upper) {
      c3 += g.count;
      const logval z = s.z_scale * std::exp(-x * x / 2);
      if (!(z < 1)) throw domain_error("theorem bounds: l-envelope is not positive on [1, upper]");
      log_prod += g.count * std::log1p(-z);
    } else {
      c4 += g.count;
      t4.push_back(lc + std::log(s.outer_coeff) - x * x * s.outer_rate);
    }
  }
  for (const auto& g : prof.groups) {
    const logval x = g.value;
    if (x >= 1 && x <= s.upper) {
      const logval z = s.z_scale * std::exp(-x * x / 2);
      t3.push_back(std::log(g.count) + std::log(s.inner_coeff) - x * x / 2 + log_prod - std::log1p(-z));
    }
  }
  r.l1 = c1;
  r.l2 = c1 + c2;
  r.l3 = c1 + c2 + c3;
  const logval head_minus = (r.l2 - 1) * log_dinv + log_prod;
  const logval head = r.l2 * log_dinv + log_prod;
  r.pieces[0] = c1 >= 1 ? static_cast<double>(std::exp(head_minus + log_sum_terms(t1))) : 0.0;
  r.pieces[1] = c2 >= 1 ? static_cast<double>(std::exp(head_minus + log_sum_terms(t2))) : 0.0;
  r.pieces[2] = c3 >= 1 ? static_cast<double>(std::exp(r.l2 * log_dinv + log_sum_terms(t3))) : 0.0;
  r.pieces[3] = c4 >= 1 ? static_cast<double>(std::exp(head + log_sum_terms(t4))) : 0.0;
}

inline void check_log_p(const EndpointProfile& prof, logval log_p) {
  if (prof.empty()) throw domain_error("theorem bounds: empty endpoint profile");
  const logval got = prof.log_p();
  if (std::fabs(got - log_p) > 1e-9L * std::max<logval>(1, std::fabs(log_p))) {
    throw config_error("log_p", "does not match the number of endpoints");
  }
}

}  // namespace detail

// ---- o(sqrt n) regime ---------------------------------------------------------

struct Theorem1Aggregates {
  double a1 = 0, a2 = 0, a3 = 0;
  double total() const { return a1 + a2 + a3; }
};

inline void check_schedule(double n, const BoundConstants& c) {
  c.validate();
  const logval a = c.a_n(n);
  if (!(a * a * a < std::sqrt(static_cast<logval>(n)))) {
    throw config_error("a_n", "a_n^3 >= sqrt(n) at n = " + std::to_string(n));
  }
}

// A1n = b1 exp(log p - a_n^{-2} sqrt(n) (1 - 1/l)), i.e. M = log_p a_n^3 / sqrt n;
// A2n = b2 d (log d)^{-1} d^{-(log d)^{-1}} n^{-1/4};
// A3n = (4 pi)^{1/2} b2 / a_n + b2 n^{-1/4} exp(log p - a_n^{-2} sqrt(n) / 2).
inline Theorem1Aggregates theorem1_aggregates(double n, logval log_p, double l, const BoundConstants& c) {
  check_schedule(n, c);
  if (!(l > 1 && l <= 2)) throw config_error("l", "must lie in (1, 2]");
  const logval a = c.a_n(n), rn = std::sqrt(static_cast<logval>(n)), n14 = std::pow(static_cast<logval>(n), -0.25L);
  const logval spread = rn / (a * a);
  Theorem1Aggregates out;
  out.a1 = static_cast<double>(c.b1 * std::exp(log_p - spread * (1 - 1 / static_cast<logval>(l))));
  const logval d = d_constant();
  out.a2 = static_cast<double>(c.b2 * d * sup_x_c_pow_neg_x(d) * n14);
  out.a3 = static_cast<double>(std::sqrt(4 * kPi) * c.b2 / a + c.b2 * n14 * std::exp(log_p - spread / 2));
  return out;
}

inline BoundReport theorem1_bound(const EndpointProfile& prof, double n, logval log_p, double l,
                                  const BoundConstants& c) {
  detail::check_log_p(prof, log_p);
  const auto agg = theorem1_aggregates(n, log_p, l, c);
  const logval a = c.a_n(n), thr = c.threshold(n), n14 = std::pow(static_cast<logval>(n), -0.25L);
  BoundReport r;
  detail::four_pieces(prof,
                      {-thr, thr, c.b1, 1 - 1 / static_cast<logval>(l), c.b2 * n14, a * n14 / std::sqrt(4 * kPi)},
                      r);
  r.a1 = agg.a1;
  r.a2 = agg.a2;
  r.a3 = agg.a3;
  r.total = agg.total();
  r.piece_within = {r.pieces[0] + r.pieces[3] <= r.a1, r.pieces[1] <= r.a2, r.pieces[2] <= r.a3};
  r.n = n;
  r.log_p = log_p;
  r.scale = static_cast<double>(a);
  r.l = l;
  r.constants = c;
  return r;
}

// ---- eps sqrt(n) regime --------------------------------------------------------

// min{[8 b2 sqrt(2 pi)(sqrt 2 + 1)]^{-3}, (1 - 1/l)^3}
inline double theorem2_c(double b2, double l) {
  if (!(b2 > 0)) throw config_error("b2", "must be positive");
  if (!(l > 1 && l <= 2)) throw config_error("l", "must lie in (1, 2]");
  const logval first = 1 / (8 * b2 * std::sqrt(2 * kPi) * (std::sqrt(2.0L) + 1));
  const logval second = 1 - 1 / static_cast<logval>(l);
  return static_cast<double>(std::min(first * first * first, second * second * second));
}

struct Theorem2Aggregates {
  double j14 = 0;        // b1 exp(-eps^{2/3} sqrt n ((1 - 1/l) - eps^{1/3}))
  double j2 = 0;         // b2 d (log d)^{-1} d^{-(log d)^{-1}} n^{-1/4}
  double j3_main = 0;    // sqrt(2 pi)(sqrt(eps^{2/3} + 4 n^{-1/2}) + eps^{1/3}) 2 eps b2
  double j3_tail = 0;    // eps b2 n^{-1/4} exp(-eps^{2/3} sqrt n (1/2 - eps^{1/3}))
  double eps = 0;
  double j3() const { return j3_main + j3_tail; }
  double total() const { return j14 + j2 + j3(); }

  // Targets: eps/12, eps/12, eps/4 + eps/12.
  bool j14_ok() const { return j14 < eps / 12; }
  bool j2_ok() const { return j2 < eps / 12; }
  bool j3_main_ok() const { return j3_main < eps / 4; }
  bool j3_tail_ok() const { return j3_tail < eps / 12; }
  bool j3_ok() const { return j3() < eps / 4 + eps / 12; }
  bool total_half() const { return total() <= eps / 2; }
  bool total_seven_twelfths() const { return total() <= 7 * eps / 12; }
};

inline Theorem2Aggregates theorem2_aggregates(double n, double eps, double l, const BoundConstants& c) {
  c.validate();
  const double cmax = theorem2_c(c.b2, l);
  if (!(eps > 0 && eps < cmax)) throw domain_error("theorem2: requires 0 < epsilon < c = " + std::to_string(cmax));
  const logval e = eps, rn = std::sqrt(static_cast<logval>(n)), n14 = std::pow(static_cast<logval>(n), -0.25L);
  const logval e13 = std::cbrt(e), e23 = e13 * e13;
  Theorem2Aggregates out;
  out.eps = eps;
  out.j14 = static_cast<double>(c.b1 * std::exp(-e23 * rn * ((1 - 1 / static_cast<logval>(l)) - e13)));
  const logval d = d_constant();
  out.j2 = static_cast<double>(c.b2 * d * sup_x_c_pow_neg_x(d) * n14);
  out.j3_main = static_cast<double>(std::sqrt(2 * kPi) * (std::sqrt(e23 + 4 / rn) + e13) * 2 * e * c.b2);
  out.j3_tail = static_cast<double>(e * c.b2 * n14 * std::exp(-e23 * rn * (0.5L - e13)));
  return out;
}

struct Theorem2Report {
  BoundReport bound;
  Theorem2Aggregates aggregates;
};

// J-pieces with thresholds +-eps^{1/3} n^{1/4}; p endpoints with log p <= eps sqrt n.
inline Theorem2Report theorem2_bound(const EndpointProfile& prof, double n, double eps, double l,
                                     const BoundConstants& c) {
  const auto agg = theorem2_aggregates(n, eps, l, c);
  if (prof.empty()) throw domain_error("theorem2_bound: empty endpoint profile");
  const logval log_p = prof.log_p();
  const logval rn = std::sqrt(static_cast<logval>(n)), n14 = std::pow(static_cast<logval>(n), -0.25L);
  if (log_p > eps * rn * (1 + 1e-12L)) throw config_error("log_p", "exceeds eps * sqrt(n)");
  const logval e13 = std::cbrt(static_cast<logval>(eps));
  const logval thr = e13 / n14;
  if (!(thr >= 1)) throw config_error("n", "eps^{1/3} n^{1/4} < 1; the middle regions are empty");
  const logval w_scale = n14 / (std::sqrt(2 * kPi) * (std::sqrt(e13 * e13 + 4 / rn) + e13));
  Theorem2Report out;
  out.aggregates = agg;
  auto& r = out.bound;
  detail::four_pieces(prof, {-thr, thr, c.b1, 1 - 1 / static_cast<logval>(l), eps * c.b2 * n14, w_scale}, r);
  r.a1 = agg.j14;
  r.a2 = agg.j2;
  r.a3 = agg.j3();
  r.total = agg.total();
  r.piece_within = {r.pieces[0] + r.pieces[3] <= r.a1, r.pieces[1] <= r.a2, r.pieces[2] <= r.a3};
  r.n = n;
  r.log_p = log_p;
  r.scale = eps;
  r.l = l;
  r.constants = c;
  return out;
}

// Smallest n in the (increasing) grid at which each target holds; -1 if never.
struct Theorem2Onsets {
  double j14 = -1, j2 = -1, j3 = -1, total_half = -1, total_seven_twelfths = -1;
};

inline Theorem2Onsets theorem2_onsets(const std::vector<double>& n_grid, double eps, double l, const BoundConstants& c) {
  Theorem2Onsets o;
  auto mark = [](double& slot, bool ok, double n) {
    if (slot < 0 && ok) slot = n;
  };
  for (double n : n_grid) {
    const auto a = theorem2_aggregates(n, eps, l, c);
    mark(o.j14, a.j14_ok(), n);
    mark(o.j2, a.j2_ok(), n);
    mark(o.j3, a.j3_ok(), n);
    mark(o.total_half, a.total_half(), n);
    mark(o.total_seven_twelfths, a.total_seven_twelfths(), n);
  }
  return o;
}

}  // namespace hdclt
