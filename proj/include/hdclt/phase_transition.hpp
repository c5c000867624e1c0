#pragma once

// Witness rectangles showing the Gaussian approximation error stays away
// from 0 once log p grows past sqrt(n): exact Rademacher and Gaussian
// probabilities of (-inf, r]^p at the two witness radii, plus the closed-form
// bounds used to certify them.

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hdclt/errors.hpp"
#include "hdclt/exact.hpp"
#include "hdclt/gaussian.hpp"
#include "hdclt/lattice.hpp"
#include "hdclt/logdomain.hpp"
#include "hdclt/product_factorization.hpp"

namespace hdclt {

inline constexpr std::uint64_t kExactRhoMaxN = 100'000;
// log p = n^{delta+1/2} computed two ways can differ in the last bits.
inline constexpr logval kLowEdgeSlack = 1e-12L;

inline void require_even_n(std::uint64_t n) {
  if (n == 0 || n % 2 != 0) throw domain_error("phase transition: n must be a positive even integer, got " + std::to_string(n));
}

// log of sqrt(pi/2)(sqrt(n+4) + sqrt n) e^{n/2}: the large-p edge.
inline logval case1_threshold_log_p(std::uint64_t n) {
  const logval x = static_cast<logval>(n);
  return 0.5L * std::log(kPi / 2) + std::log(std::sqrt(x + 4) + std::sqrt(x)) + x / 2;
}

// ---- Case I: A = (-inf, sqrt n]^p, where the Rademacher side is exactly 1 ----

struct Case1Result {
  std::uint64_t n = 0;
  logval log_p = 0;
  TailPair gaussian;      // Phi(sqrt n)^p
  TailPair mills_bound;   // [1 - 2 phi(sqrt n)/(sqrt(n+4) + sqrt n)]^p
  double gaussian_side = 0;
  double rho_lower = 0;   // 1 - Phi(sqrt n)^p
  bool within_two_over_e = false;
};

inline Case1Result case1_rho_lower(std::uint64_t n, logval log_p) {
  require_even_n(n);
  const logval thr = case1_threshold_log_p(n);
  if (!(log_p >= thr * (1 - 1e-15L))) {
    throw domain_error("case1: log_p = " + std::to_string(static_cast<double>(log_p)) + " below the threshold " +
                       std::to_string(static_cast<double>(thr)));
  }
  const logval r = std::sqrt(static_cast<logval>(n));
  Case1Result out;
  out.n = n;
  out.log_p = log_p;
  out.gaussian = pow_prob(gauss_tailpair(r), log_p);
  const logval log_gap = gauss_log_pdf(r) + std::log(2 / (std::sqrt(r * r + 4) + r));
  out.mills_bound = pow_prob(TailPair::from_log_sf(log_gap), log_p);
  out.gaussian_side = out.gaussian.cdf();
  out.rho_lower = out.gaussian.sf();
  out.within_two_over_e = out.gaussian_side <= 2 / std::exp(1.0);
  return out;
}

// Smallest n of the grid from which Phi(sqrt n)^p <= 2/e holds at the
// threshold p for every later grid point; 0 if it never settles.
inline std::uint64_t case1_onset(const std::vector<std::uint64_t>& n_grid) {
  std::uint64_t onset = 0;
  for (std::uint64_t n : n_grid) {
    const bool ok = case1_rho_lower(n, case1_threshold_log_p(n)).within_two_over_e;
    if (ok && onset == 0) onset = n;
    if (!ok) onset = 0;
  }
  return onset;
}

// ---- Case II: B = (-inf, n^{1/4} f]^p with n1 = n^{3/4} f even -------------

// Left side of the eta condition: (1+eta)^{-3} + (1+eta)^{-5}/7 - 1.
inline double eta_condition(double eta) {
  const double u = 1 / (1 + eta);
  return u * u * u + std::pow(u, 5) / 7 - 1;
}
inline bool eta_feasible(double eta) { return eta > 0 && eta_condition(eta) >= 0; }

// The positive root of eta_condition, by bisection to 1e-12.
inline double eta_max() {
  auto tol = [](double a, double b) { return std::fabs(b - a) <= 1e-12; };
  const auto r = boost::math::tools::bisect(eta_condition, 0.0, 1.0, tol);
  return r.first;
}

enum class FBranch { SubComparable, Comparable };

inline std::string to_string(FBranch b) { return b == FBranch::SubComparable ? "sub-comparable" : "comparable"; }

struct FSelection {
  double f = 0;
  std::uint64_t n1 = 0;
  FBranch branch = FBranch::SubComparable;
  double f_target = 0;  // before rounding and clamping
  bool clamped = false;
};

struct CaseIIConfig {
  std::uint64_t n = 0;
  logval log_p = 0;
  double delta = 0;
  double eta = 0;
  double f = 0;
  std::uint64_t n1 = 0;

  void validate() const {
    require_even_n(n);
    if (!(delta > 0 && delta < 1)) throw config_error("delta", "must lie in (0, 1)");
    if (!(eta > 0 && eta < 1)) throw config_error("eta", "must lie in (0, 1)");
    const logval low = std::pow(static_cast<logval>(n), 0.5L + delta);
    if (!(log_p >= low * (1 - kLowEdgeSlack))) {
      throw domain_error("case2: log_p = " + std::to_string(static_cast<double>(log_p)) + " below n^{delta+1/2} = " +
                         std::to_string(static_cast<double>(low)));
    }
    if (n1 == 0 || n1 % 2 != 0 || n1 > n) throw config_error("n1", "must be an even integer in (0, n]");
  }
};

namespace detail {

inline double corridor_low(std::uint64_t n, double delta) { return std::pow(static_cast<double>(n), delta / 4); }
inline double corridor_high(std::uint64_t n, double eta) { return std::pow(static_cast<double>(n), 0.25) / (1 + eta); }

// Nearest even integer to x (ties away from zero).
inline std::int64_t round_even(double x) { return 2 * static_cast<std::int64_t>(std::llround(x / 2)); }

}  // namespace detail

// Deterministic f(n): sqrt(n) f^2 = 2(log p - log n) below the comparable
// range, f = n^{1/4}/(1+eta) inside it; n1 rounded to an even integer and f
// recomputed from it, then kept in [n^{delta/4}, n^{1/4}/(1+eta)].
inline FSelection select_f(std::uint64_t n, logval log_p, double delta, double eta) {
  require_even_n(n);
  if (!(delta > 0 && delta < 1)) throw config_error("delta", "must lie in (0, 1)");
  if (!(eta > 0 && eta < 1)) throw config_error("eta", "must lie in (0, 1)");
  const double nd = static_cast<double>(n);
  const double lo = detail::corridor_low(n, delta), hi = detail::corridor_high(n, eta);
  if (lo > hi) {
    throw domain_error("select_f: empty corridor, n^{delta/4} = " + std::to_string(lo) + " > n^{1/4}/(1+eta) = " +
                       std::to_string(hi));
  }
  const logval low_p = std::pow(static_cast<logval>(n), 0.5L + delta);
  if (!(log_p >= low_p * (1 - kLowEdgeSlack))) throw domain_error("select_f: log_p below n^{delta+1/2}");
  if (!(log_p <= case1_threshold_log_p(n))) throw domain_error("select_f: log_p above the Case I threshold");
  const double n34 = std::pow(nd, 0.75);
  FSelection s;
  const logval split = 0.75L * std::log(static_cast<logval>(n)) + nd / (2 * (1 + eta) * (1 + eta));
  if (log_p < split) {
    s.branch = FBranch::SubComparable;
    const double excess = static_cast<double>(log_p - std::log(static_cast<logval>(n)));
    s.f_target = excess > 0 ? std::sqrt(2 * excess / std::sqrt(nd)) : 0.0;
  } else {
    s.branch = FBranch::Comparable;
    s.f_target = hi;
  }
  std::int64_t n1 = detail::round_even(n34 * s.f_target);
  const std::int64_t n1_lo = 2 * static_cast<std::int64_t>(std::ceil(n34 * lo / 2 - 1e-12));
  const std::int64_t n1_hi = 2 * static_cast<std::int64_t>(std::floor(n34 * hi / 2 + 1e-12));
  if (n1_lo > n1_hi || n1_hi <= 0) throw domain_error("select_f: no even n1 with f in the corridor at n = " + std::to_string(n));
  if (n1 < n1_lo) {
    n1 = n1_lo;
    s.clamped = true;
  } else if (n1 > n1_hi) {
    n1 = n1_hi;
    s.clamped = true;
  }
  s.n1 = static_cast<std::uint64_t>(n1);
  s.f = static_cast<double>(n1) / n34;
  return s;
}

inline CaseIIConfig make_case2_config(std::uint64_t n, logval log_p, double delta, double eta) {
  const FSelection s = select_f(n, log_p, delta, eta);
  CaseIIConfig cfg{n, log_p, delta, eta, s.f, s.n1};
  cfg.validate();
  return cfg;
}

struct Case2Quantities {
  logval log_g_n = kNegInf;  // ((n - n1)/2) C(n, (n - n1)/2) 2^{-n}
  logval log_e1n = kNegInf;
  logval log_e2n = kNegInf;
  logval log_p_e1n = kNegInf;
  logval log_p_e2n = kNegInf;
};

inline Case2Quantities case2_quantities(const CaseIIConfig& cfg) {
  cfg.validate();
  const std::uint64_t n = cfg.n, n1 = cfg.n1;
  const logval x = static_cast<logval>(n), x1 = static_cast<logval>(n1);
  Case2Quantities q;
  const std::uint64_t half = (n - n1) / 2;
  if (half > 0) q.log_g_n = log_of(BigInt(half) * binomial(n, half)) - static_cast<logval>(n) * kLn2;
  const logval eta = cfg.eta;
  const logval u = 1 / (1 + eta);
  if (n1 < n) {
    const logval pref = 1 - std::log(2 * kPi) + 0.5L * std::log1p(-u * u);
    q.log_e1n = pref + std::log((x - x1) / std::sqrt(x)) - x1 * x1 / (2 * x) - std::pow(x1, 4) / (14 * x * x * x);
  }
  const logval r = x1 / std::sqrt(x);
  q.log_e2n = -0.5L * std::log(kPi / 2) - x1 * x1 / (2 * x) - std::log(std::sqrt(r * r + 4) + r);
  q.log_p_e1n = cfg.log_p + q.log_e1n;
  q.log_p_e2n = cfg.log_p + q.log_e2n;
  return q;
}

// P(S > n1) for the Rademacher walk S of length n, exactly: sum over k with
// 2k - n > n1 of C(n, k), divided by 2^n.
inline BigInt rademacher_upper_count(std::uint64_t n, std::uint64_t n1) {
  if ((n + n1) / 2 >= n) return 0;
  BigInt c = 1, total = 0;  // C(n, n), walking k downwards
  const std::uint64_t k_min = (n + n1) / 2 + 1;
  for (std::uint64_t k = n;; --k) {
    total += c;
    if (k == k_min) break;
    c = c * k / (n - k + 1);
  }
  return total;
}

struct Case2Exact {
  TailPair walk_tail;   // (P(S <= n1), P(S > n1)) for the sum
  TailPair l1n_exact;   // P(S <= n1)^p
  TailPair l2n;         // Phi(n1/sqrt n)^p
  TailPair l1n_g_bound; // (1 - g_n)^p
  TailPair l1n_e1_bound;// (1 - E1n)^p
  LogReal rho;          // L1n_exact - L2n
  double rho_lower = 0;
  bool chain_exact_ge_g = false;  // L1n_exact >= (1 - g_n)^p
  bool chain_g_ge_e1 = false;     // (1 - g_n)^p >= (1 - E1n)^p
};

inline Case2Exact case2_exact_rho_lower(const CaseIIConfig& cfg) {
  cfg.validate();
  if (cfg.n > kExactRhoMaxN) throw resource_error("case2_exact_rho_lower: n exceeds " + std::to_string(kExactRhoMaxN));
  const std::uint64_t n = cfg.n;
  const BigInt upper = rademacher_upper_count(n, cfg.n1);
  const BigInt total = pow2(n);
  Case2Exact out;
  const logval log_total = static_cast<logval>(n) * kLn2;
  out.walk_tail = {log_of(BigInt(total - upper)) - log_total, log_of(upper) - log_total};
  out.l1n_exact = pow_prob(out.walk_tail, cfg.log_p);
  out.l2n = pow_prob(gauss_tailpair(static_cast<logval>(cfg.n1) / std::sqrt(static_cast<logval>(n))), cfg.log_p);
  out.rho = cdf_difference(out.l1n_exact, out.l2n);
  out.rho_lower = out.rho.is_zero() ? 0.0 : static_cast<double>(std::exp(out.rho.log_abs));

  const Case2Quantities q = case2_quantities(cfg);
  auto one_minus = [&](logval log_small) {
    if (log_small == kNegInf) return TailPair::certain();
    if (log_small >= 0) return TailPair::impossible();
    return pow_prob(TailPair::from_log_sf(log_small), cfg.log_p);
  };
  out.l1n_g_bound = one_minus(q.log_g_n);
  out.l1n_e1_bound = one_minus(q.log_e1n);
  // compare through the tails 1 - F^p, which carry the precision here
  out.chain_exact_ge_g = out.l1n_exact.log_sf <= out.l1n_g_bound.log_sf;
  out.chain_g_ge_e1 = out.l1n_g_bound.log_sf <= out.l1n_e1_bound.log_sf;
  return out;
}

// Smallest n of the grid from which both links of
// L1n_exact >= (1 - g_n)^p >= (1 - E1n)^p hold for every later grid point,
// with log p = n^alpha; 0 if they never settle.
inline std::uint64_t case2_chain_onset(const std::vector<std::uint64_t>& n_grid, double alpha, double delta, double eta) {
  std::uint64_t onset = 0;
  for (std::uint64_t n : n_grid) {
    const auto cfg = make_case2_config(n, std::pow(static_cast<logval>(n), static_cast<logval>(alpha)), delta, eta);
    const auto ex = case2_exact_rho_lower(cfg);
    const bool ok = ex.chain_exact_ge_g && ex.chain_g_ge_e1;
    if (ok && onset == 0) onset = n;
    if (!ok) onset = 0;
  }
  return onset;
}

// ---- sweep over log p = n^alpha at fixed n ----------------------------------

struct PhaseRow {
  double alpha = 0;
  logval log_p = 0;
  SupResult exact_sup;          // over A^max, exact
  bool case2_applicable = false;
  double delta = 0;
  FSelection f;
  double case2_rho_lower = 0;
  logval case2_log_p_e2n = kNegInf;
  std::string case2_note;  // why Case II was skipped
};

// For alpha > 1/2 the Case II witness uses the largest admissible delta,
// alpha - 1/2; for alpha <= 1/2 only the exact sup is reported.
inline std::vector<PhaseRow> phase_sweep(std::uint64_t n, const std::vector<double>& alphas, double eta) {
  require_even_n(n);
  if (n > kExactRhoMaxN) throw resource_error("phase_sweep: n exceeds " + std::to_string(kExactRhoMaxN));
  const LatticeMarginal marginal(LatticeDistribution::rademacher_sum(n), std::sqrt(static_cast<logval>(n)));
  std::vector<PhaseRow> rows;
  for (double a : alphas) {
    if (!(a > 0 && a < 1)) throw config_error("alpha", "must lie in (0, 1)");
    PhaseRow row;
    row.alpha = a;
    row.log_p = std::pow(static_cast<logval>(n), static_cast<logval>(a));
    row.exact_sup = sup_diff_equal_coords(marginal, row.log_p, EqualSide::LeftInfinite);
    if (a > 0.5) {
      row.delta = a - 0.5;
      try {
        const CaseIIConfig cfg = make_case2_config(n, row.log_p, row.delta, eta);
        row.f = select_f(n, cfg.log_p, row.delta, eta);
        row.case2_rho_lower = case2_exact_rho_lower(cfg).rho_lower;
        row.case2_log_p_e2n = case2_quantities(cfg).log_p_e2n;
        row.case2_applicable = true;
      } catch (const domain_error& e) {
        row.case2_note = e.what();
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hdclt
