#pragma once

// One function per subcommand; each turns a resolved config into a table.

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <string_view>
#include <thread>
#include <vector>

#include "hdclt/harness/config.hpp"
#include "hdclt/harness/csv.hpp"
#include "hdclt/mc_estimator.hpp"
#include "hdclt/nonuniform_be.hpp"
#include "hdclt/phase_transition.hpp"
#include "hdclt/product_factorization.hpp"
#include "hdclt/theorem_bounds.hpp"
#include "hdclt/version.hpp"

namespace hdclt::harness {

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Leading columns shared by every command.
inline Row base_row(const ExperimentConfig& c, std::uint64_t n, logval log_p, double alpha) {
  Row r;
  r.add("model", c.model.kind)
      .add("n", n)
      .add("log_p", log_p)
      .add("alpha", alpha)
      .add("b1", c.constants.b1)
      .add("b2", c.constants.b2)
      .add("a_n_exponent", c.constants.a_n.exponent)
      .add("a_n_coeff", c.constants.a_n.coeff)
      .add("mn_coeff", c.constants.mn_coeff)
      .add("l", c.l);
  return r;
}

inline EqualSide parse_side(const std::string& s) { return s == "symmetric" ? EqualSide::Symmetric : EqualSide::LeftInfinite; }

inline LatticeMarginal lattice_marginal(const ComponentModel& m, const char* command) {
  if (!m.lattice_backed()) {
    throw config_error("model.kind", std::string(command) + " needs a lattice model (rademacher or lattice)");
  }
  return m.normalized_marginal();
}

inline std::vector<logval> to_logvals(const std::vector<double>& v) { return {v.begin(), v.end()}; }

inline std::string opt_str(const std::optional<unsigned>& v) { return v ? std::to_string(*v) : ""; }

// Runs f(i) for i < count on `workers` threads; results keep input order and
// the first failure (by index) is rethrown.
template <class F>
std::vector<Row> parallel_rows(std::size_t count, unsigned workers, F f) {
  std::vector<Row> rows(count);
  std::vector<std::exception_ptr> errs(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        rows[i] = f(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  const unsigned w = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(count, 1)));
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < w; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errs) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

}  // namespace detail

inline Table cmd_check_assumptions(const ExperimentConfig& c) {
  Table t;
  for (auto n : c.n_grid) {
    const auto model = c.model.build(n);
    const auto rep = check_assumptions(model, c.m_max);
    Row r = detail::base_row(c, n, detail::kNaN, detail::kNaN);
    r.add("m_max", rep.m_max)
        .add("symmetric", rep.symmetric)
        .add("odd_moments_zero", rep.odd_moments_zero)
        .add("odd_failure_m", detail::opt_str(rep.odd_failure_m))
        .add("variance_ratio", rep.variance_ratio.convert_to<double>())
        .add("variance_ok", rep.variance_ok)
        .add("l_max", rep.l_max ? *rep.l_max : detail::kNaN)
        .add("moment_failure_m", detail::opt_str(rep.moment_failure_m))
        .add("all_pass", rep.all_pass());
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline Table cmd_rho_exact(const ExperimentConfig& c) {
  Table t;
  const EqualSide side = detail::parse_side(c.side);
  for (auto n : c.n_grid) {
    const auto marginal = detail::lattice_marginal(c.model.build(n), "rho-exact");
    for (const auto& [log_p, alpha] : c.log_p_values(n)) {
      const auto sup = sup_diff_equal_coords(marginal, log_p, side);
      Row r = detail::base_row(c, n, log_p, alpha);
      r.add("side", c.side).add("t_star", sup.t_star).add("left_limit", sup.left_limit).add("rho", sup.rho).add("log_rho", sup.log_rho);
      t.rows.push_back(std::move(r));
    }
  }
  return t;
}

inline Table cmd_lemma3_bound(const ExperimentConfig& c) {
  const RectangleFamily rect(detail::to_logvals(c.rect_a), detail::to_logvals(c.rect_b));
  Table t;
  for (auto n : c.n_grid) {
    const auto marginal = detail::lattice_marginal(c.model.build(n), "lemma3-bound");
    const GaussianMarginal gauss;
    const LogReal diff = product_diff_exact(marginal, gauss, rect);
    const LogReal bound = lemma3_bound(marginal, gauss, rect);
    Row r = detail::base_row(c, n, std::log(static_cast<logval>(rect.dim())), detail::kNaN);
    r.add("p", static_cast<std::uint64_t>(rect.dim()))
        .add("product_diff", diff.to_double())
        .add("log_abs_product_diff", diff.log_abs)
        .add("lemma3_bound", bound.to_double())
        .add("log_lemma3_bound", bound.log_abs)
        .add("dominated", diff.log_abs <= bound.log_abs);
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline Table cmd_rho_mc(const ExperimentConfig& c) {
  Table t;
  const EqualSide side = detail::parse_side(c.mc.side);
  for (auto n : c.n_grid) {
    const auto model = c.model.build(n);
    McConfig mc;
    mc.trials = c.mc.trials;
    mc.seed = c.seed;
    mc.p_dim = c.mc.p;
    mc.workers = c.workers;
    mc.rects = equal_coordinate_grid(c.mc.p, detail::to_logvals(c.mc.t_grid), side);
    const auto res = simulate_rho(model, mc);
    std::optional<LatticeMarginal> marginal;
    if (model.lattice_backed()) marginal = model.normalized_marginal();
    for (std::size_t k = 0; k < mc.rects.size(); ++k) {
      const auto& e = res.rects[k];
      const double exact = marginal ? rect_prob(*marginal, mc.rects[k]).to_double() : detail::kNaN;
      Row r = detail::base_row(c, n, std::log(static_cast<logval>(c.mc.p)), detail::kNaN);
      r.add("side", c.mc.side)
          .add("t", c.mc.t_grid[k])
          .add("trials", c.mc.trials)
          .add("seed", c.seed)
          .add("hits", e.hits)
          .add("p_hat", e.p_hat)
          .add("gauss", e.gauss)
          .add("diff", e.diff)
          .add("ci_lo", e.ci.lo)
          .add("ci_hi", e.ci.hi)
          .add("exact_prob", exact)
          .add("is_max", k == res.max_index)
          .add("max_abs_diff", res.max_abs_diff)
          .add("max_ci_half", res.max_ci_half);
      t.rows.push_back(std::move(r));
    }
  }
  return t;
}

namespace detail {

inline void add_pieces(Row& r, const BoundReport* b, const char* prefix) {
  for (int k = 0; k < 4; ++k) r.add(std::string(prefix) + std::to_string(k + 1), b ? b->pieces[k] : kNaN);
  r.add("within_14", b ? fmt_bool(b->piece_within[0]) : "")
      .add("within_2", b ? fmt_bool(b->piece_within[1]) : "")
      .add("within_3", b ? fmt_bool(b->piece_within[2]) : "");
}

}  // namespace detail

inline Table cmd_bound_thm1(const ExperimentConfig& c) {
  Table t;
  std::optional<EndpointProfile> prof;
  if (!c.endpoints.empty()) prof = EndpointProfile::from_values(detail::to_logvals(c.endpoints));
  for (auto n : c.n_grid) {
    const double nd = static_cast<double>(n);
    std::vector<std::pair<logval, double>> points;
    if (prof) {
      points.emplace_back(prof->log_p(), detail::kNaN);
    } else {
      points = c.log_p_values(n);
    }
    for (const auto& [log_p, alpha] : points) {
      const auto agg = theorem1_aggregates(nd, log_p, c.l, c.constants);
      std::optional<BoundReport> rep;
      if (prof) rep = theorem1_bound(*prof, nd, log_p, c.l, c.constants);
      Row r = detail::base_row(c, n, log_p, alpha);
      r.add("a_n", c.constants.a_n(nd))
          .add("A1n", agg.a1)
          .add("A2n", agg.a2)
          .add("A3n", agg.a3)
          .add("A_total", agg.total());
      detail::add_pieces(r, rep ? &*rep : nullptr, "I");
      t.rows.push_back(std::move(r));
    }
  }
  return t;
}

inline Table cmd_bound_thm2(const ExperimentConfig& c) {
  Table t;
  std::vector<double> grid;
  for (auto n : c.n_grid) grid.push_back(static_cast<double>(n));
  const auto onsets = theorem2_onsets(grid, c.epsilon, c.l, c.constants);
  std::optional<EndpointProfile> prof;
  if (!c.endpoints.empty()) prof = EndpointProfile::from_values(detail::to_logvals(c.endpoints));
  for (auto n : c.n_grid) {
    const double nd = static_cast<double>(n);
    const auto agg = theorem2_aggregates(nd, c.epsilon, c.l, c.constants);
    std::optional<Theorem2Report> rep;
    if (prof) rep = theorem2_bound(*prof, nd, c.epsilon, c.l, c.constants);
    Row r = detail::base_row(c, n, prof ? prof->log_p() : detail::kNaN, detail::kNaN);
    r.add("epsilon", c.epsilon)
        .add("c_max", theorem2_c(c.constants.b2, c.l))
        .add("agg_J14", agg.j14)
        .add("agg_J2", agg.j2)
        .add("agg_J3_main", agg.j3_main)
        .add("agg_J3_tail", agg.j3_tail)
        .add("agg_total", agg.total())
        .add("agg_J14_ok", agg.j14_ok())
        .add("agg_J2_ok", agg.j2_ok())
        .add("agg_J3_ok", agg.j3_ok())
        .add("total_half", agg.total_half())
        .add("total_seven_twelfths", agg.total_seven_twelfths())
        .add("onset_J14", onsets.j14)
        .add("onset_J2", onsets.j2)
        .add("onset_J3", onsets.j3)
        .add("onset_total_half", onsets.total_half)
        .add("onset_total_seven_twelfths", onsets.total_seven_twelfths);
    detail::add_pieces(r, rep ? &rep->bound : nullptr, "J");
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline Table cmd_phase_case1(const ExperimentConfig& c) {
  Table t;
  const std::uint64_t onset = case1_onset(c.n_grid);
  for (auto n : c.n_grid) {
    std::vector<std::pair<logval, double>> points;
    if (c.log_p_threshold || (c.log_p_grid.empty() && c.alpha_grid.empty())) {
      points.emplace_back(case1_threshold_log_p(n), detail::kNaN);
    } else {
      points = c.log_p_values(n);
    }
    for (const auto& [log_p, alpha] : points) {
      const auto res = case1_rho_lower(n, log_p);
      Row r = detail::base_row(c, n, log_p, alpha);
      r.add("threshold_log_p", case1_threshold_log_p(n))
          .add("gaussian_side", res.gaussian_side)
          .add("mills_bound", res.mills_bound.cdf())
          .add("rho_lower", res.rho_lower)
          .add("within_two_over_e", res.within_two_over_e)
          .add("onset", onset);
      t.rows.push_back(std::move(r));
    }
  }
  return t;
}

namespace detail {

// must match the order in add_case2
inline constexpr const char* kCase2Columns[] = {
    "f",         "f_target",  "n1",        "branch",           "clamped", "log_g_n",          "log_e1n",      "log_e2n",
    "log_p_e1n", "log_p_e2n", "walk_tail_log_sf", "rho", "rho_lower", "chain_exact_ge_g", "chain_g_ge_e1"};

inline void add_case2(Row& r, const CaseIIConfig& cfg, const FSelection& f) {
  const auto q = case2_quantities(cfg);
  const auto ex = case2_exact_rho_lower(cfg);
  r.add("f", f.f)
      .add("f_target", f.f_target)
      .add("n1", f.n1)
      .add("branch", to_string(f.branch))
      .add("clamped", f.clamped)
      .add("log_g_n", q.log_g_n)
      .add("log_e1n", q.log_e1n)
      .add("log_e2n", q.log_e2n)
      .add("log_p_e1n", q.log_p_e1n)
      .add("log_p_e2n", q.log_p_e2n)
      .add("walk_tail_log_sf", ex.walk_tail.log_sf)
      .add("rho", ex.rho.to_double())
      .add("rho_lower", ex.rho_lower)
      .add("chain_exact_ge_g", ex.chain_exact_ge_g)
      .add("chain_g_ge_e1", ex.chain_g_ge_e1);
}

}  // namespace detail

inline Table cmd_phase_case2(const ExperimentConfig& c) {
  Table t;
  const double eta = c.resolved_eta();
  for (auto n : c.n_grid) {
    for (const auto& [log_p, alpha] : c.log_p_values(n)) {
      const auto f = select_f(n, log_p, c.delta, eta);
      const auto cfg = make_case2_config(n, log_p, c.delta, eta);
      Row r = detail::base_row(c, n, log_p, alpha);
      r.add("delta", c.delta).add("eta", eta);
      detail::add_case2(r, cfg, f);
      t.rows.push_back(std::move(r));
    }
  }
  return t;
}

// n x alpha grid. Case II uses delta = alpha - 1/2 and only applies to the
// Rademacher model with even n; otherwise the note column says why not.
inline Table cmd_sweep(const ExperimentConfig& c) {
  struct Cell {
    std::uint64_t n;
    double alpha;
  };
  std::vector<Cell> cells;
  for (auto n : c.n_grid) {
    for (double a : c.alpha_grid) cells.push_back({n, a});
  }
  const double eta = c.resolved_eta();
  const EqualSide side = detail::parse_side(c.side);

  auto one = [&](std::size_t i) {
    const auto [n, alpha] = cells[i];
    const double nd = static_cast<double>(n);
    const logval log_p = std::pow(static_cast<logval>(n), static_cast<logval>(alpha));
    const auto model = c.model.build(n);
    const auto marginal = detail::lattice_marginal(model, "sweep");
    const auto sup = sup_diff_equal_coords(marginal, log_p, side);

    Row r = detail::base_row(c, n, log_p, alpha);
    r.add("side", c.side).add("rho_exact", sup.rho).add("t_star", sup.t_star).add("left_limit", sup.left_limit);

    std::string bound_note;
    Theorem1Aggregates agg{detail::kNaN, detail::kNaN, detail::kNaN};
    try {
      agg = theorem1_aggregates(nd, log_p, c.l, c.constants);
    } catch (const config_error& e) {
      bound_note = e.what();
    }
    r.add("A1n", agg.a1).add("A2n", agg.a2).add("A3n", agg.a3).add("A_total", agg.total());

    const double delta = alpha - 0.5;
    bool applicable = false;
    std::string note;
    CaseIIConfig cfg;
    FSelection f;
    if (model.kind() != ModelKind::Rademacher) {
      note = "case II needs the rademacher model";
    } else if (n % 2 != 0) {
      note = "case II needs even n";
    } else if (!(delta > 0)) {
      note = "alpha <= 1/2";
    } else {
      try {
        f = select_f(n, log_p, delta, eta);
        cfg = make_case2_config(n, log_p, delta, eta);
        applicable = true;
      } catch (const domain_error& e) {
        note = e.what();
      }
    }
    r.add("eta", eta).add("case2_applicable", applicable).add("delta", applicable ? delta : detail::kNaN);
    if (applicable) {
      detail::add_case2(r, cfg, f);
    } else {
      for (const char* k : detail::kCase2Columns) r.add(k, std::string_view(k) == "branch" ? "" : "nan");
    }
    r.add("note", note.empty() ? bound_note : note);
    return r;
  };

  Table t;
  t.rows = detail::parallel_rows(cells.size(), c.workers, one);
  return t;
}

inline Table run_command(const ExperimentConfig& c) {
  switch (c.command) {
    case Command::CheckAssumptions: return cmd_check_assumptions(c);
    case Command::RhoExact: return cmd_rho_exact(c);
    case Command::Lemma3Bound: return cmd_lemma3_bound(c);
    case Command::RhoMc: return cmd_rho_mc(c);
    case Command::BoundThm1: return cmd_bound_thm1(c);
    case Command::BoundThm2: return cmd_bound_thm2(c);
    case Command::PhaseCase1: return cmd_phase_case1(c);
    case Command::PhaseCase2: return cmd_phase_case2(c);
    case Command::Sweep: return cmd_sweep(c);
  }
  throw config_error("command", "unhandled command");
}

inline nlohmann::json manifest_for(const ExperimentConfig& c) {
  nlohmann::json m;
  m["engine"] = "hdclt";
  m["engine_version"] = kVersion;
  m["config"] = to_json(c);
  return m;
}

}  // namespace hdclt::harness
