// Acceptance checks, one per criterion: `acceptance --criterion N` prints a
// single PASS/FAIL line and exits non-zero on FAIL.

#include <sys/wait.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hdclt/hdclt.hpp"
#include "oracles.hpp"

using namespace hdclt;
using oracle::hp200;
using oracle::hp50;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---- 1 ------------------------------------------------------------------------

// Head counts over all 2^n sign patterns, one pattern at a time. The pattern
// index is split into a high part and a 16-bit low part so the popcount of the
// low part comes from a table.
std::vector<std::uint64_t> enumerate_histogram(unsigned n) {
  static const std::vector<std::uint8_t> low_bits = [] {
    std::vector<std::uint8_t> t(1u << 16);
    for (std::uint32_t m = 1; m < t.size(); ++m) t[m] = static_cast<std::uint8_t>(t[m >> 1] + (m & 1));
    return t;
  }();
  const unsigned low = std::min(n, 16u), high = n - low;
  std::vector<std::uint64_t> hist(n + 1, 0);
  std::vector<std::uint64_t> local(n + 1);
  for (std::uint64_t h = 0; h < (std::uint64_t{1} << high); ++h) {
    std::fill(local.begin(), local.end(), 0);
    const unsigned base = static_cast<unsigned>(__builtin_popcountll(h));
    for (std::uint32_t l = 0; l < (1u << low); ++l) ++local[base + low_bits[l]];
    for (unsigned k = 0; k <= n; ++k) hist[k] += local[k];
  }
  return hist;
}

Outcome exact_engine_equivalence() {
  std::size_t compared = 0;
  for (unsigned n = 2; n <= 30; ++n) {
    const auto hist = enumerate_histogram(n);
    const auto direct = LatticeDistribution::rademacher_sum(n);
    const auto convolved = convolve_iid(LatticeDistribution::rademacher(), n);
    const oracle::bigint total = oracle::bigint(1) << n;
    oracle::bigint running = 0;
    for (unsigned k = 0; k <= n; ++k) {
      const double s = 2.0 * k - n;
      // just below the jump, then on it
      for (int on = 0; on < 2; ++on) {
        if (on) running += hist[k];
        const double t = on ? s : s - 0.5;
        const oracle::rational expect(running, total);
        for (const auto* law : {&direct, &convolved}) {
          const auto exact = lattice_tail_exact(*law, t);
          if (exact.cdf != expect || exact.cdf + exact.sf != 1) {
            return {false, "mismatch at n = " + std::to_string(n) + ", t = " + fmt("%g", t)};
          }
          // the log-domain reading agrees with the rational to rounding
          const TailPair tp = lattice_cdf(*law, t);
          const long double want = std::log(static_cast<long double>(expect.convert_to<double>()));
          if (running != 0 && std::fabs(tp.log_cdf - want) > 1e-12L * std::max(1.0L, std::fabs(want))) {
            return {false, "lattice_cdf log mismatch at n = " + std::to_string(n)};
          }
          ++compared;
        }
      }
    }
  }
  return {true, std::to_string(compared) + " exact comparisons, n = 2..30"};
}

// ---- 2 ------------------------------------------------------------------------

Outcome lemma3_domination() {
  std::mt19937_64 rng(20240611);
  std::vector<LatticeMarginal> marginals;
  for (unsigned n = 4; n <= 64; ++n) marginals.push_back(ComponentModel::rademacher(n).normalized_marginal());
  std::uniform_int_distribution<unsigned> pick_n(4, 64), pick_p(1, 200), pick_kind(0, 9);
  std::uniform_real_distribution<double> u(-4, 4);
  const GaussianMarginal gauss;
  const int instances = 10'000;
  int violations = 0;
  long double worst_gap = -INFINITY;
  for (int i = 0; i < instances; ++i) {
    const unsigned n = pick_n(rng), p = pick_p(rng);
    std::vector<logval> a(p), b(p);
    for (unsigned j = 0; j < p; ++j) {
      // one endpoint in ten is infinite
      logval x = u(rng), y = u(rng);
      if (x > y) std::swap(x, y);
      if (pick_kind(rng) == 0) x = kNegInf;
      if (pick_kind(rng) == 0) y = -kNegInf;
      a[j] = x;
      b[j] = y;
    }
    const RectangleFamily rect(a, b);
    const LogReal diff = product_diff_exact(marginals[n - 4], gauss, rect);
    const LogReal bound = lemma3_bound(marginals[n - 4], gauss, rect);
    if (diff.is_zero()) continue;
    const long double gap = diff.log_abs - bound.log_abs;
    worst_gap = std::max(worst_gap, gap);
    // relative rounding allowance on the log scale
    if (gap > 1e-12L) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(instances) +
                               " instances, max log(diff/bound) = " + fmt("%.3g", static_cast<double>(worst_gap))};
}

// ---- 3 ------------------------------------------------------------------------

Outcome mills_and_stirling() {
  int mills_bad = 0, tail_bad = 0;
  for (int i = 1; i <= 4000; ++i) {
    const double t = i / 100.0;
    const hp50 tt(t);
    const hp50 ratio = oracle::gauss_sf(tt) / oracle::gauss_pdf(tt);
    if (hp50(mills_lower(t)) > ratio) ++mills_bad;
    // the library's own tail agrees with the oracle, so its ratio obeys the same bound
    const long double lib = gauss_tailpair(t).log_sf;
    const long double ref = log(oracle::gauss_sf(tt)).convert_to<long double>();
    if (std::fabs(lib - ref) > 1e-13L * std::max(1.0L, std::fabs(ref))) ++tail_bad;
  }
  int stirling_bad = 0;
  for (std::uint64_t m = 1; m <= 100'000; ++m) {
    const auto b = stirling_bounds(m);
    const hp50 lg = oracle::lgamma(hp50(m + 1));
    if (hp50(b.lower_log) > lg || hp50(b.upper_log) < lg) ++stirling_bad;
  }
  return {mills_bad == 0 && tail_bad == 0 && stirling_bad == 0,
          "mills violations " + std::to_string(mills_bad) + "/4000, tail mismatches " + std::to_string(tail_bad) +
              ", stirling violations " + std::to_string(stirling_bad) + "/100000"};
}

// ---- 4 ------------------------------------------------------------------------

Outcome case1_certificate() {
  const hp200 x(20), pi = boost::math::constants::pi<hp200>();
  const hp200 log_p = log(sqrt(pi / 2) * (sqrt(x + 4) + sqrt(x))) + 10;
  const hp200 gauss = exp(exp(log_p) * log(oracle::gauss_cdf(hp200(sqrt(x)))));
  const double expect = (1 - gauss).convert_to<double>();

  const auto res = case1_rho_lower(20, log_p.convert_to<long double>());
  const bool side_ok = res.gaussian_side <= 2 / std::exp(1.0) && res.within_two_over_e;
  const bool oracle_ok = std::fabs(res.rho_lower - expect) <= 1e-10;
  const bool value_ok = std::fabs(res.rho_lower - 0.633) <= 0.01;
  return {side_ok && oracle_ok && value_ok, "rho_lower = " + fmt("%.6f", res.rho_lower) + " (oracle " +
                                                fmt("%.6f", expect) + "), Gaussian side " +
                                                fmt("%.6f", res.gaussian_side) + " vs 2/e = 0.735759"};
}

// ---- 5 ------------------------------------------------------------------------

Outcome case2_certificate() {
  const std::uint64_t n = 100;
  const double delta = 0.2, eta = 0.04;
  const long double log_p = 30;
  const auto cfg = make_case2_config(n, log_p, delta, eta);
  const auto q = case2_quantities(cfg);
  const auto ex = case2_exact_rho_lower(cfg);

  // oracle: sub-comparable branch, f^2 sqrt n = 2(log p - log n), n1 the even rounding of n^{3/4} f
  const hp50 nn(100), lp(30), pi = boost::math::constants::pi<hp50>();
  const hp50 f = sqrt(2 * (lp - log(nn)) / sqrt(nn));
  const hp50 target = pow(nn, hp50("0.75")) * f;
  const long long n1_oracle = 2 * llround((target / 2).convert_to<double>());
  const hp50 n1(n1_oracle), r = n1 / sqrt(nn);
  const hp50 log_pe2 = lp - log(pi / 2) / 2 - n1 * n1 / (2 * nn) - log(sqrt(r * r + 4) + r);
  const hp50 tail = hp50(oracle::binomial_upper_sum(100, (100 + n1_oracle) / 2)) / pow(hp50(2), 100);
  const hp50 rho = exp(exp(lp) * log(1 - tail)) - exp(exp(lp) * log(oracle::gauss_cdf(r)));

  const bool n1_ok = cfg.n1 == 72 && n1_oracle == 72;
  const bool e2_ok = std::fabs(static_cast<double>(q.log_p_e2n) - 1.17) <= 0.1 &&
                     std::fabs(static_cast<double>(q.log_p_e2n) - log_pe2.convert_to<double>()) <= 1e-12;
  const bool rho_oracle_ok = std::fabs(ex.rho_lower - rho.convert_to<double>()) <= 1e-12;
  const bool rho_ok = ex.rho_lower >= 0.9;
  return {n1_ok && e2_ok && rho_oracle_ok && rho_ok,
          "n1 = " + std::to_string(cfg.n1) + ", log(p E2n) = " + fmt("%.4f", static_cast<double>(q.log_p_e2n)) +
              ", rho_lower = " + fmt("%.6f", ex.rho_lower) + " (oracle " + fmt("%.6f", rho.convert_to<double>()) +
              "), needs >= 0.9"};
}

// ---- 6 ------------------------------------------------------------------------

Outcome phase_crossing() {
  const std::vector<double> alphas{0.30, 0.40, 0.45, 0.55, 0.60};
  const auto rows = phase_sweep(400, alphas, 0.04);
  bool low_ok = true, high_ok = true, monotone = true;
  std::ostringstream os;
  double prev = -1;
  for (const auto& r : rows) {
    const double sup = r.exact_sup.rho;
    if (r.alpha <= 0.45 && !(sup < 0.2)) low_ok = false;
    if (r.alpha >= 0.55 && !(r.case2_applicable && r.case2_rho_lower > 0.8)) high_ok = false;
    if (sup < prev) monotone = false;
    prev = sup;
    os << " a=" << r.alpha << ":sup " << fmt("%.4f", sup);
    if (r.alpha > 0.5) os << "/caseII " << fmt("%.4f", r.case2_rho_lower);
  }
  return {low_ok && high_ok && monotone, std::string("low ") + (low_ok ? "ok" : "fail") + ", case II " +
                                             (high_ok ? "ok" : "fail") + ", monotone " + (monotone ? "ok" : "fail") +
                                             ";" + os.str()};
}

// ---- 7 ------------------------------------------------------------------------

Outcome theorem1_decay() {
  BoundConstants c = default_constants();
  c.a_n = {1.0, 0.125};
  std::vector<double> totals;
  std::ostringstream os;
  for (int k = 8; k <= 20; k += 2) {
    const double n = std::ldexp(1.0, k);
    const logval log_p = std::pow(static_cast<logval>(n), 0.375L);
    totals.push_back(theorem1_aggregates(n, log_p, 2.0, c).total());
    os << " 2^" << k << ":" << fmt("%.3g", totals.back());
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < totals.size(); ++i) decreasing &= totals[i] < totals[i - 1];
  const bool tenfold = totals.back() < totals.front() / 10;
  return {decreasing && tenfold, std::string("A_n") + os.str() + (decreasing ? "" : "; not decreasing") +
                                     (tenfold ? "" : "; no tenfold drop")};
}

// ---- 8 ------------------------------------------------------------------------

Outcome theorem2_constants() {
  bool c_ok = true;
  std::ostringstream os;
  for (const auto& [b2, l] : {std::pair{1.0, 2.0}, std::pair{2.0, 1.5}}) {
    const hp50 pi = boost::math::constants::pi<hp50>();
    const hp50 first = 1 / (8 * hp50(b2) * sqrt(2 * pi) * (sqrt(hp50(2)) + 1));
    const hp50 second = 1 - 1 / hp50(l);
    const hp50 hand = std::min(hp50(pow(first, 3)), hp50(pow(second, 3)));
    const double got = theorem2_c(b2, l), want = hand.convert_to<double>();
    c_ok &= std::fabs(got - want) <= 1e-12 * want;
    os << "c(" << b2 << "," << l << ")=" << fmt("%.6e", got) << " ";
  }

  // pieces against their fractions, onsets over n = 2^8 .. 2^200
  const BoundConstants& k = default_constants();
  const double eps = 5e-6;
  std::vector<double> grid;
  for (int e = 8; e <= 200; e += 4) grid.push_back(std::ldexp(1.0, e));
  const auto onsets = theorem2_onsets(grid, eps, 2.0, k);
  bool onset_ok = true;
  auto check_onset = [&](double onset, auto holds) {
    for (double n : grid) {
      const bool h = holds(theorem2_aggregates(n, eps, 2.0, k));
      if (n < onset || onset < 0) onset_ok &= !h;
      if (n == onset) onset_ok &= h;
    }
  };
  check_onset(onsets.j14, [](const Theorem2Aggregates& a) { return a.j14_ok(); });
  check_onset(onsets.j2, [](const Theorem2Aggregates& a) { return a.j2_ok(); });
  check_onset(onsets.j3, [](const Theorem2Aggregates& a) { return a.j3_ok(); });
  check_onset(onsets.total_half, [](const Theorem2Aggregates& a) { return a.total_half(); });
  os << "onsets J14/J2/J3/half: " << fmt("%.3g", onsets.j14) << "/" << fmt("%.3g", onsets.j2) << "/"
     << fmt("%.3g", onsets.j3) << "/" << fmt("%.3g", onsets.total_half) << " ";

  // eta root: library bisection against a 50-digit one
  hp50 lo = 0, hi = 1;
  for (int i = 0; i < 170; ++i) {
    const hp50 mid = (lo + hi) / 2;
    const hp50 h = 1 / pow(1 + mid, 3) + 1 / (7 * pow(1 + mid, 5)) - 1;
    (h > 0 ? lo : hi) = mid;
  }
  const double root = eta_max();
  const bool root_oracle_ok = std::fabs(root - lo.convert_to<double>()) <= 1e-11;
  const bool root_ok = std::fabs(root - 0.0435) <= 0.001;
  os << "eta_max = " << fmt("%.10f", root) << " (target 0.0435 +- 0.001)";
  return {c_ok && onset_ok && root_oracle_ok && root_ok, os.str()};
}

// ---- 9 ------------------------------------------------------------------------

Outcome mc_cross_validation() {
  const auto model = ComponentModel::rademacher(10);
  const auto marginal = model.normalized_marginal();
  std::vector<logval> ts;
  for (logval x : marginal.points()) {
    if (x > 0 && x < 3.5L) ts.push_back(x);
  }
  McConfig cfg;
  cfg.trials = 100'000;
  cfg.seed = 2718281828;
  cfg.p_dim = 20;
  cfg.rects = equal_coordinate_grid(20, ts, EqualSide::LeftInfinite);
  cfg.workers = std::max(1u, std::thread::hardware_concurrency());
  const auto a = simulate_rho(model, cfg);
  cfg.workers = 1;
  const auto b = simulate_rho(model, cfg);

  double exact = 0;
  for (const auto& r : cfg.rects) exact = std::max(exact, std::fabs(product_diff_exact(marginal, GaussianMarginal{}, r).to_double()));
  const double sup = sup_diff_equal_coords(marginal, std::log(20.0L), EqualSide::LeftInfinite).rho;
  bool same = a.max_abs_diff == b.max_abs_diff;
  for (std::size_t r = 0; r < a.rects.size(); ++r) same &= a.rects[r].hits == b.rects[r].hits;
  const bool within = std::fabs(a.max_abs_diff - exact) <= 3 * a.max_ci_half;
  return {within && same && std::fabs(exact - sup) <= 1e-9,
          "MC max diff " + fmt("%.5f", a.max_abs_diff) + " vs exact " + fmt("%.5f", exact) + " (3 half-widths " +
              fmt("%.5f", 3 * a.max_ci_half) + "), rerun " + (same ? "identical" : "DIFFERS")};
}

// ---- 10 -----------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome cli_golden() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("hdclt_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string golden = HDCLT_GOLDEN_DIR;
  const std::string expected = slurp(golden + "/sweep_expected.csv");
  if (expected.empty()) return {false, "golden CSV missing"};
  bool all_same = true;
  for (const char* workers : {"1", "4"}) {
    const fs::path out = dir / (std::string("sweep_w") + workers + ".csv");
    const std::string cmd = std::string("'") + HDCLT_CLI_PATH + "' sweep --config '" + golden + "/sweep_config.json' --out '" +
                            out.string() + "' --workers " + workers;
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "CLI exited with status " + std::to_string(status)};
    all_same &= slurp(out) == expected;
    const auto manifest = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
    if (!manifest.contains("timestamp") || manifest["config"]["command"] != "sweep") return {false, "manifest incomplete"};
  }
  fs::remove_all(dir);
  return {all_same, all_same ? "sweep CSV byte-identical to golden (1 and 4 workers)" : "sweep CSV differs from golden"};
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int which = 0;
  app.add_option("--criterion", which, "criterion number")->required()->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {"exact engine vs enumeration", 10, exact_engine_equivalence},
      {"product bound domination", 120, lemma3_domination},
      {"Mills ratio and Stirling suites", 30, mills_and_stirling},
      {"Case I certificate", 1, case1_certificate},
      {"Case II certificate", 5, case2_certificate},
      {"phase-transition crossing", 60, phase_crossing},
      {"first-regime bound decay", 10, theorem1_decay},
      {"second-regime constant and pieces", 1, theorem2_constants},
      {"Monte Carlo cross-validation", 30, mc_cross_validation},
      {"CLI golden determinism", 60, cli_golden},
  };
  const Criterion& c = all[static_cast<std::size_t>(which - 1)];
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < c.budget_s;
  const bool pass = o.pass && in_time;
  std::cout << "criterion " << which << " (" << c.name << "): " << (pass ? "PASS" : "FAIL") << " - " << o.detail << " ["
            << fmt("%.2f", secs) << " s of " << fmt("%g", c.budget_s) << " s" << (in_time ? "" : ", over budget") << "]"
            << std::endl;
  return pass ? 0 : 1;
}
