#pragma once

// One-dimensional non-uniform Berry-Esseen envelopes, the piecewise l(x) and
// d(x) envelopes built from them, assumption checks for lattice component
// models, and the calibration of the unknown constants b1, b2.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hdclt/distributions.hpp"
#include "hdclt/errors.hpp"
#include "hdclt/logdomain.hpp"

namespace hdclt {

// a_n = coeff * n^exponent. exponent in (0, 1/6) keeps a_n^3 = o(sqrt n).
struct PowerSchedule {
  double coeff = 1.0;
  double exponent = 0.125;

  logval operator()(double n) const { return coeff * std::pow(static_cast<logval>(n), static_cast<logval>(exponent)); }

  void validate() const {
    if (!(coeff > 0)) throw config_error("a_n.coeff", "must be positive");
    if (!(exponent > 0 && exponent < 1.0 / 6)) throw config_error("a_n.exponent", "must lie in (0, 1/6)");
  }
};

struct BoundConstants {
  double b1 = 1.0;
  double b2 = 1.0;
  double mn_coeff = 1.0;  // M_n = mn_coeff * n^{1/4}
  PowerSchedule a_n;
  bool calibrated = false;

  void validate() const {
    if (!(b1 > 0)) throw config_error("b1", "must be positive");
    if (!(b2 > 0)) throw config_error("b2", "must be positive");
    if (!(mn_coeff > 0)) throw config_error("mn_coeff", "must be positive");
    a_n.validate();
  }

  logval m_n(double n) const { return mn_coeff * std::pow(static_cast<logval>(n), 0.25L); }
  // a_n^{-1} n^{1/4}
  logval threshold(double n) const { return std::pow(static_cast<logval>(n), 0.25L) / a_n(n); }
};

// 1 - phi(1)/(sqrt 5 + 1), the x < 1 value of the l-envelope; d is its inverse.
inline logval d_inverse() {
  return 1 - std::exp(gauss_log_pdf(1)) / (std::sqrt(5.0L) + 1);
}
inline logval d_constant() { return 1 / d_inverse(); }

inline double lemma1_bound(logval t, double q, double b1) {
  if (!(q > 1 && q <= 2)) throw domain_error("lemma1_bound: q must lie in (1, 2]");
  return static_cast<double>(b1 * std::exp(-t * t * (1 - 1 / static_cast<logval>(q))));
}

// r_n = max(M_n^3 / n, n^{-1/2}).
inline logval lemma2_rate(double n, const BoundConstants& c) {
  const logval m = c.m_n(n);
  return std::max(m * m * m / n, 1 / std::sqrt(static_cast<logval>(n)));
}

inline double lemma2_bound(logval t, double n, const BoundConstants& c) {
  if (!(std::fabs(t) < c.m_n(n))) throw domain_error("lemma2_bound: requires |t| < M_n");
  return static_cast<double>(c.b2 * lemma2_rate(n, c) * std::exp(-t * t / 2));
}

// Upper envelope for max{P(T <= x), Phi(x)}.
inline double envelope_l(logval x, double n, const BoundConstants& c) {
  const logval thr = c.threshold(n);
  if (x > thr) return 1.0;
  if (x < 1) return static_cast<double>(d_inverse());
  const logval z = c.a_n(n) * std::pow(static_cast<logval>(n), -0.25L) * std::exp(-x * x / 2) / std::sqrt(4 * kPi);
  return static_cast<double>(1 - z);
}

// The same envelope before the large-n simplification: the Mills bound plus
// the inner discrepancy term, 1 - 2 phi(x)/(sqrt(x^2+4)+x) + b2 e^{-x^2/2} n^{-1/4}.
inline double envelope_l_unsimplified(logval x, double n, const BoundConstants& c) {
  const logval thr = c.threshold(n);
  if (x > thr) return 1.0;
  const logval y = x < 1 ? 1 : x;
  const logval mills = 2 * std::exp(gauss_log_pdf(y)) / (std::sqrt(y * y + 4) + y);
  return static_cast<double>(std::min<logval>(1, 1 - mills + c.b2 * std::exp(-y * y / 2) * std::pow(static_cast<logval>(n), -0.25L)));
}

// Upper envelope for |P(T <= x) - Phi(x)|; the threshold itself is inner.
inline double envelope_d(logval x, double n, double l, const BoundConstants& c) {
  const logval thr = c.threshold(n);
  if (std::fabs(x) > thr) return static_cast<double>(c.b1 * std::exp(-x * x * (1 - 1 / static_cast<logval>(l))));
  return static_cast<double>(c.b2 * std::exp(-x * x / 2) * std::pow(static_cast<logval>(n), -0.25L));
}

// ---- assumption checks ------------------------------------------------------

struct AssumptionReport {
  bool symmetric = false;
  unsigned m_max = 0;
  bool odd_moments_zero = false;
  // Smallest m with E X^{2m-1} != 0, if any.
  std::optional<unsigned> odd_failure_m;
  Rational variance_ratio;  // n^{-1} s_n^2, constant in n for iid components
  bool variance_ok = false;
  // Largest l in (1, 2] with moment_2m <= l^{-m} (2m)!/m! for all m <= m_max.
  std::optional<double> l_max;
  // First m violating the inequality at l -> 1+, when infeasible.
  std::optional<unsigned> moment_failure_m;

  bool all_pass() const { return symmetric && odd_moments_zero && variance_ok && l_max.has_value(); }
};

namespace detail {

inline Rational rational_pow(const Rational& x, unsigned m) {
  Rational out = 1;
  for (unsigned i = 0; i < m; ++i) out *= x;
  return out;
}

// moment_2m * l^m * m! <= (2m)! for every m in [1, m_max].
inline bool moment_condition_holds(const std::vector<Rational>& moments, const Rational& l) {
  Rational l_pow = 1;
  for (unsigned m = 1; m <= moments.size(); ++m) {
    l_pow *= l;
    if (moments[m - 1] * l_pow * Rational(factorial(m)) > Rational(factorial(2 * m))) return false;
  }
  return true;
}

}  // namespace detail

inline AssumptionReport check_assumptions(const ComponentModel& model, unsigned m_max = 50) {
  if (!model.lattice_backed()) throw domain_error("check_assumptions: model must be lattice-backed");
  if (m_max == 0) throw domain_error("check_assumptions: m_max must be >= 1");
  if (2 * m_max > kMomentOrderCap) throw resource_error("check_assumptions: 2 m_max exceeds the moment order cap");
  const LatticeDistribution law = model.component_law();
  AssumptionReport r;
  r.m_max = m_max;
  r.symmetric = law.is_symmetric();
  r.odd_moments_zero = true;
  for (unsigned m = 1; m <= m_max; ++m) {
    if (law.raw_moment(2 * m - 1) != 0) {
      r.odd_moments_zero = false;
      r.odd_failure_m = m;
      break;
    }
  }
  r.variance_ratio = model.s_n_sq_exact() / Rational(static_cast<long long>(model.n()));
  r.variance_ok = r.variance_ratio > 0;

  std::vector<Rational> moments;
  for (unsigned m = 1; m <= m_max; ++m) moments.push_back(moment_2m_exact(model, m));
  if (detail::moment_condition_holds(moments, 2)) {
    r.l_max = 2.0;
    return r;
  }
  // Feasible l just above 1? Otherwise bisect on (1, 2).
  double lo = std::nextafter(1.0, 2.0);
  if (!detail::moment_condition_holds(moments, to_rational(lo))) {
    Rational l_pow = 1;
    const Rational l = to_rational(lo);
    for (unsigned m = 1; m <= m_max; ++m) {
      l_pow *= l;
      if (moments[m - 1] * l_pow * Rational(factorial(m)) > Rational(factorial(2 * m))) {
        r.moment_failure_m = m;
        break;
      }
    }
    return r;
  }
  double hi = 2.0;
  for (int it = 0; it < 64 && std::nextafter(lo, hi) < hi; ++it) {
    const double mid = lo + (hi - lo) / 2;
    (detail::moment_condition_holds(moments, to_rational(mid)) ? lo : hi) = mid;
  }
  r.l_max = lo;
  return r;
}

// s_n^2 and the (A.4) constant for a model that passed the checks.
struct MomentProfile {
  Rational s_n_sq;
  double l_const = 2.0;

  static MomentProfile from_model(const ComponentModel& model, unsigned m_max = 50) {
    const auto r = check_assumptions(model, m_max);
    if (!r.l_max) throw domain_error("MomentProfile: (A.4) infeasible for every l in (1, 2]");
    return {model.s_n_sq_exact(), *r.l_max};
  }
  // Used when the model is not lattice-backed and l is taken on trust.
  static MomentProfile assumed(double s_n_sq, double l) {
    if (!(l > 1 && l <= 2)) throw config_error("l", "must lie in (1, 2]");
    return {to_rational(s_n_sq), l};
  }
};

// ---- calibration --------------------------------------------------------------

struct CalibrationPoint {
  double n = 0;
  logval x = 0;
  double measured = 0;  // |P(T <= x) - Phi(x)| (or its left limit)
};

namespace detail {

// Jump values, left limits, and interior points of every gap.
template <class Visit>
void visit_discrepancies(const LatticeMarginal& m, double n, int interior, Visit&& visit) {
  const auto& x = m.points();
  for (std::size_t k = 0; k < x.size(); ++k) {
    const TailPair g = gauss_tailpair(x[k]);
    visit(CalibrationPoint{n, x[k], std::fabs(cdf_difference(m.cdf_at(k), g).to_double())});
    visit(CalibrationPoint{n, x[k], std::fabs(cdf_difference(m.cdf_before(k), g).to_double())});
    if (k + 1 < x.size()) {
      for (int i = 1; i <= interior; ++i) {
        const logval t = x[k] + (x[k + 1] - x[k]) * i / (interior + 1);
        visit(CalibrationPoint{n, t, std::fabs(cdf_difference(m.cdf_at(k), gauss_tailpair(t)).to_double())});
      }
    }
  }
}

}  // namespace detail

inline constexpr double kCalibrationSafety = 1.1;

// b1 for the Gaussian-rate envelope: safety * max |F - Phi| / exp(-t^2 (1 - 1/q))
// over Rademacher sums with n in `ns`.
inline double calibrate_lemma1_b1(const std::vector<std::uint64_t>& ns, double q, int interior = 8) {
  double worst = 0;
  for (auto n : ns) {
    const auto m = ComponentModel::rademacher(n).normalized_marginal();
    detail::visit_discrepancies(m, static_cast<double>(n), interior, [&](const CalibrationPoint& p) {
      worst = std::max(worst, p.measured / lemma1_bound(p.x, q, 1.0));
    });
  }
  return kCalibrationSafety * worst;
}

// b1 and b2 for envelope_d: outer-region and inner-region maxima of the
// measured discrepancy over the envelope shape.
inline BoundConstants calibrate_envelope(const std::vector<std::uint64_t>& ns, double l, BoundConstants base = {},
                                         int interior = 8) {
  base.a_n.validate();
  double outer = 0, inner = 0;
  for (auto n : ns) {
    const auto m = ComponentModel::rademacher(n).normalized_marginal();
    const double nd = static_cast<double>(n);
    const logval thr = base.threshold(nd);
    detail::visit_discrepancies(m, nd, interior, [&](const CalibrationPoint& p) {
      if (std::fabs(p.x) > thr) {
        outer = std::max(outer, p.measured / static_cast<double>(std::exp(-p.x * p.x * (1 - 1 / static_cast<logval>(l)))));
      } else {
        inner = std::max(inner, p.measured / static_cast<double>(std::exp(-p.x * p.x / 2) * std::pow(static_cast<logval>(nd), -0.25L)));
      }
    });
  }
  base.b1 = kCalibrationSafety * outer;
  base.b2 = kCalibrationSafety * inner;
  // An empty outer region leaves b1 unconstrained; fall back to b2.
  if (base.b1 == 0) base.b1 = base.b2;
  base.calibrated = true;
  return base;
}

inline const std::vector<std::uint64_t>& default_calibration_grid() {
  static const std::vector<std::uint64_t> grid{16, 64, 256};
  return grid;
}

// Calibrated against Rademacher with l = 2, a_n = n^{1/8}, M_n = n^{1/4}.
inline const BoundConstants& default_constants() {
  static const BoundConstants c = calibrate_envelope(default_calibration_grid(), 2.0);
  return c;
}

}  // namespace hdclt
