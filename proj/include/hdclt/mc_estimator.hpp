#pragma once

// Monte Carlo estimate of max_A |P(T_n in A) - P(Z in A)| over a finite
// rectangle family. Only the sum side is simulated; the Gaussian side is the
// exact product probability.
//
// Reproducibility: trial k draws from its own std::mt19937_64 seeded with
// seed_seq{seed, k}; within a trial the draw for (summand i, coordinate j)
// is the (i * p + j)-th. Workers own contiguous trial ranges and only add
// integer hit counts, so output is independent of the worker count.

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "hdclt/errors.hpp"
#include "hdclt/gaussian.hpp"
#include "hdclt/model.hpp"
#include "hdclt/product_factorization.hpp"

namespace hdclt {

inline constexpr std::size_t kMcMaxDim = 10'000;
inline constexpr std::uint64_t kMcMinTrials = 1'000;

struct McConfig {
  std::uint64_t trials = 10'000;
  std::uint64_t seed = 0;
  std::size_t p_dim = 1;
  std::vector<RectangleFamily> rects;
  unsigned workers = 1;
  double confidence = 0.95;
  // cap on n * p * trials draws
  double budget = 1e10;

  void validate(std::uint64_t n) const {
    if (trials < kMcMinTrials) throw config_error("trials", "must be >= " + std::to_string(kMcMinTrials));
    if (p_dim == 0 || p_dim > kMcMaxDim) throw config_error("p_dim", "must lie in [1, " + std::to_string(kMcMaxDim) + "]");
    if (rects.empty()) throw config_error("rects", "rectangle family is empty");
    for (const auto& r : rects) {
      r.validate();
      if (r.dim() != p_dim) throw config_error("rects", "rectangle dimension differs from p_dim");
    }
    if (workers == 0) throw config_error("workers", "must be >= 1");
    if (!(confidence > 0 && confidence < 1)) throw config_error("confidence", "must lie in (0, 1)");
    const double draws = static_cast<double>(n) * static_cast<double>(p_dim) * static_cast<double>(trials);
    if (draws > budget) throw resource_error("simulate_rho: n * p * trials = " + std::to_string(draws) + " exceeds budget");
  }
};

// Equal-coordinate family over a t grid: (-inf, t]^p or [-t, t]^p.
inline std::vector<RectangleFamily> equal_coordinate_grid(std::size_t p, const std::vector<logval>& ts, EqualSide side) {
  std::vector<RectangleFamily> out;
  out.reserve(ts.size());
  for (logval t : ts) {
    out.push_back(side == EqualSide::LeftInfinite ? RectangleFamily::max_type(p, t) : RectangleFamily::symmetric(p, t));
  }
  return out;
}

struct Interval {
  double lo = 0, hi = 0;
  double half_width() const { return (hi - lo) / 2; }
};

// Wilson score interval for hits / trials at normal quantile z.
inline Interval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z) {
  if (trials == 0) throw domain_error("wilson_interval: no trials");
  const double nt = static_cast<double>(trials), ph = static_cast<double>(hits) / nt;
  const double z2 = z * z, denom = 1 + z2 / nt;
  const double center = (ph + z2 / (2 * nt)) / denom;
  const double half = z * std::sqrt(ph * (1 - ph) / nt + z2 / (4 * nt * nt)) / denom;
  // the end points are exactly 0 / 1 at hits = 0 / trials
  return {hits == 0 ? 0.0 : std::max(0.0, center - half), hits == trials ? 1.0 : std::min(1.0, center + half)};
}

inline double normal_quantile_two_sided(double confidence) {
  return boost::math::quantile(boost::math::normal(), 0.5 + confidence / 2);
}

struct McRectEstimate {
  std::uint64_t hits = 0;
  double p_hat = 0;
  double gauss = 0;  // exact P(Z in A)
  double diff = 0;   // p_hat - gauss
  Interval ci;       // for P(T_n in A), pointwise
};

struct McResult {
  std::vector<McRectEstimate> rects;
  std::size_t max_index = 0;
  double max_abs_diff = 0;
  // simultaneous half-width (Bonferroni over the family) for the max
  double max_ci_half = 0;
  double z_pointwise = 0, z_simultaneous = 0;
  std::uint64_t trials = 0;
};

namespace detail {

class SummandSampler {
 public:
  explicit SummandSampler(const ComponentModel& m) : kind_(m.kind()) {
    if (m.lattice_backed()) {
      const LatticeDistribution law = m.component_law();
      std::vector<double> w;
      for (std::size_t k = 0; k < law.size(); ++k) {
        w.push_back(Rational(law.weights()[k], law.denominator()).convert_to<double>());
        points_.push_back(law.point(k).convert_to<double>());
      }
      pick_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    }
  }

  // normal_distribution keeps a cached variate; drop it between trials
  void reset() {
    normal_.reset();
    pick_.reset();
    uniform_.reset();
  }

  double operator()(std::mt19937_64& g) {
    switch (kind_) {
      case ModelKind::Rademacher: return (g() >> 63) ? 1.0 : -1.0;
      case ModelKind::Lattice: return points_[pick_(g)];
      case ModelKind::Gaussian: return normal_(g);
      case ModelKind::Uniform: return uniform_(g);
    }
    return 0;
  }

 private:
  ModelKind kind_;
  std::vector<double> points_;
  std::discrete_distribution<std::size_t> pick_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{-std::sqrt(3.0), std::sqrt(3.0)};
};

inline std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

// Sums land on a lattice; endpoints computed from lattice points may sit a
// rounding error away, so membership tolerates this fraction of 1/s_n.
inline constexpr double kMembershipSlack = 1e-9;

}  // namespace detail

inline McResult simulate_rho(const ComponentModel& model, const McConfig& cfg) {
  const std::uint64_t n = model.n();
  cfg.validate(n);
  const std::size_t p = cfg.p_dim, K = cfg.rects.size();
  const double s_n = static_cast<double>(model.s_n());
  const double tol = detail::kMembershipSlack / s_n;

  // flattened endpoints, rect-major
  std::vector<double> lo(K * p), hi(K * p);
  for (std::size_t r = 0; r < K; ++r) {
    for (std::size_t j = 0; j < p; ++j) {
      lo[r * p + j] = static_cast<double>(cfg.rects[r].a[j]) - tol;
      hi[r * p + j] = static_cast<double>(cfg.rects[r].b[j]) + tol;
    }
  }

  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(cfg.workers, cfg.trials));
  std::vector<std::vector<std::uint64_t>> hits(workers, std::vector<std::uint64_t>(K, 0));
  auto run = [&](unsigned w) {
    const std::uint64_t begin = cfg.trials * w / workers, end = cfg.trials * (w + 1) / workers;
    detail::SummandSampler sample(model);
    std::vector<double> t(p);
    for (std::uint64_t trial = begin; trial < end; ++trial) {
      auto g = detail::trial_engine(cfg.seed, trial);
      sample.reset();
      std::fill(t.begin(), t.end(), 0.0);
      for (std::uint64_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) t[j] += sample(g);
      }
      for (auto& v : t) v /= s_n;
      for (std::size_t r = 0; r < K; ++r) {
        bool in = true;
        for (std::size_t j = 0; j < p && in; ++j) in = t[j] >= lo[r * p + j] && t[j] <= hi[r * p + j];
        hits[w][r] += in;
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }

  McResult out;
  out.trials = cfg.trials;
  out.z_pointwise = normal_quantile_two_sided(cfg.confidence);
  out.z_simultaneous = normal_quantile_two_sided(1 - (1 - cfg.confidence) / static_cast<double>(K));
  const GaussianMarginal gauss;
  out.rects.resize(K);
  for (std::size_t r = 0; r < K; ++r) {
    auto& e = out.rects[r];
    for (unsigned w = 0; w < workers; ++w) e.hits += hits[w][r];
    e.p_hat = static_cast<double>(e.hits) / static_cast<double>(cfg.trials);
    e.gauss = rect_prob(gauss, cfg.rects[r]).to_double();
    e.diff = e.p_hat - e.gauss;
    e.ci = wilson_interval(e.hits, cfg.trials, out.z_pointwise);
    if (std::fabs(e.diff) > out.max_abs_diff || r == 0) {
      out.max_abs_diff = std::fabs(e.diff);
      out.max_index = r;
    }
  }
  out.max_ci_half = wilson_interval(out.rects[out.max_index].hits, cfg.trials, out.z_simultaneous).half_width();
  return out;
}

}  // namespace hdclt
