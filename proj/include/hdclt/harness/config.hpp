#pragma once

// Experiment configuration: one JSON document, validated into a resolved
// ExperimentConfig that is echoed back verbatim into the run manifest.

#include <cmath>
#include <cstdint>
#include <json.hpp>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hdclt/errors.hpp"
#include "hdclt/exact.hpp"
#include "hdclt/model.hpp"
#include "hdclt/nonuniform_be.hpp"
#include "hdclt/phase_transition.hpp"

namespace hdclt::harness {

using json = nlohmann::json;

enum class Command {
  CheckAssumptions,
  RhoExact,
  Lemma3Bound,
  RhoMc,
  BoundThm1,
  BoundThm2,
  PhaseCase1,
  PhaseCase2,
  Sweep,
};

struct CommandName {
  Command cmd;
  const char* name;
};

inline constexpr CommandName kCommands[] = {
    {Command::CheckAssumptions, "check-assumptions"},
    {Command::RhoExact, "rho-exact"},
    {Command::Lemma3Bound, "lemma3-bound"},
    {Command::RhoMc, "rho-mc"},
    {Command::BoundThm1, "bound-thm1"},
    {Command::BoundThm2, "bound-thm2"},
    {Command::PhaseCase1, "phase-case1"},
    {Command::PhaseCase2, "phase-case2"},
    {Command::Sweep, "sweep"},
};

inline std::string to_string(Command c) {
  for (const auto& e : kCommands) {
    if (e.cmd == c) return e.name;
  }
  return "unknown";
}

inline Command parse_command(const std::string& s) {
  for (const auto& e : kCommands) {
    if (s == e.name) return e.cmd;
  }
  throw config_error("command", "unknown command '" + s + "'");
}

struct ModelSpec {
  std::string kind = "rademacher";
  // lattice only: masses[k] on offset + step * k, as exact rational strings
  std::string offset = "0", step = "1";
  std::vector<std::string> masses;

  ComponentModel build(std::uint64_t n) const {
    if (kind == "rademacher") return ComponentModel::rademacher(n);
    if (kind == "gaussian") return ComponentModel::gaussian(n);
    if (kind == "uniform") return ComponentModel::uniform(n);
    if (kind == "lattice") {
      std::vector<Rational> m;
      for (const auto& s : masses) m.push_back(parse_rational("model.masses", s));
      return ComponentModel::lattice(LatticeDistribution(parse_rational("model.offset", offset),
                                                         parse_rational("model.step", step), m),
                                     n);
    }
    throw config_error("model.kind", "unknown model kind '" + kind + "'");
  }

  static Rational parse_rational(const std::string& field, const std::string& s) {
    try {
      return Rational(s);
    } catch (const std::exception&) {
      throw config_error(field, "not a rational number: '" + s + "'");
    }
  }
};

struct McSpec {
  std::uint64_t trials = 10'000;
  std::size_t p = 1;
  std::vector<double> t_grid;
  std::string side = "max";
};

struct ExperimentConfig {
  Command command = Command::Sweep;
  ModelSpec model;
  std::vector<std::uint64_t> n_grid;
  // exactly one of these two is used; log p = n^alpha for the alpha grid
  std::vector<double> log_p_grid;
  std::vector<double> alpha_grid;
  // phase-case1: log p at the Case I edge for each n
  bool log_p_threshold = false;
  BoundConstants constants;
  bool constants_calibrated = true;
  double l = 2.0;
  double epsilon = 0;
  double delta = 0;
  std::optional<double> eta;  // unset: 0.9 * eta_max
  std::string side = "max";
  unsigned m_max = 50;
  // lemma3-bound rectangle, bound-thm1 endpoint list
  std::vector<double> rect_a, rect_b, endpoints;
  McSpec mc;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  double resolved_eta() const { return eta ? *eta : 0.9 * eta_max(); }
  bool uses_alpha() const { return !alpha_grid.empty(); }

  // (log p, alpha or NaN) pairs for a given n.
  std::vector<std::pair<logval, double>> log_p_values(std::uint64_t n) const {
    std::vector<std::pair<logval, double>> out;
    if (uses_alpha()) {
      for (double a : alpha_grid) out.emplace_back(std::pow(static_cast<logval>(n), static_cast<logval>(a)), a);
    } else {
      for (double v : log_p_grid) out.emplace_back(v, std::numeric_limits<double>::quiet_NaN());
    }
    return out;
  }
};

namespace detail {

// Endpoints may be given as numbers or as "inf" / "-inf".
inline double endpoint_value(const json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw config_error(field, "expected a number or \"inf\" / \"-inf\"");
}

template <class T>
T get_as(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw config_error(field, "has the wrong type");
  }
}

template <class T>
std::vector<T> scalar_or_list(const json& j, const std::string& field) {
  if (j.is_array()) {
    std::vector<T> out;
    for (const auto& v : j) out.push_back(get_as<T>(v, field));
    return out;
  }
  return {get_as<T>(j, field)};
}

inline std::vector<double> endpoint_list(const json& j, const std::string& field) {
  if (!j.is_array()) throw config_error(field, "must be an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(endpoint_value(v, field));
  return out;
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok |= it.key() == k;
    if (!ok) throw config_error(where + it.key(), "unknown field");
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j, std::optional<Command> command_override = std::nullopt) {
  if (!j.is_object()) throw config_error("", "configuration must be a JSON object");
  detail::reject_unknown(j,
                         {"command", "model", "n", "n_grid", "log_p", "alpha", "constants", "l", "epsilon", "delta",
                          "eta", "side", "m_max", "rect", "endpoints", "mc", "seed", "workers"},
                         "");
  ExperimentConfig c;
  if (command_override) {
    c.command = *command_override;
  } else if (j.contains("command")) {
    c.command = parse_command(detail::get_as<std::string>(j["command"], "command"));
  } else {
    throw config_error("command", "missing (give it in the config or as a subcommand)");
  }

  if (j.contains("model")) {
    const json& m = j["model"];
    if (m.is_string()) {
      c.model.kind = m.get<std::string>();
    } else {
      detail::reject_unknown(m, {"kind", "offset", "step", "masses"}, "model.");
      if (m.contains("kind")) c.model.kind = detail::get_as<std::string>(m["kind"], "model.kind");
      if (m.contains("offset")) c.model.offset = m["offset"].is_string() ? m["offset"].get<std::string>() : m["offset"].dump();
      if (m.contains("step")) c.model.step = m["step"].is_string() ? m["step"].get<std::string>() : m["step"].dump();
      if (m.contains("masses")) {
        for (const auto& v : m["masses"]) c.model.masses.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      }
    }
    if (c.model.kind == "lattice" && c.model.masses.empty()) throw config_error("model.masses", "required for a lattice model");
  }

  if (j.contains("n") && j.contains("n_grid")) throw config_error("n_grid", "give either n or n_grid");
  if (j.contains("n")) c.n_grid = detail::scalar_or_list<std::uint64_t>(j["n"], "n");
  if (j.contains("n_grid")) c.n_grid = detail::scalar_or_list<std::uint64_t>(j["n_grid"], "n_grid");
  if (c.n_grid.empty()) throw config_error("n_grid", "n-grid empty");
  for (auto n : c.n_grid) {
    if (n == 0) throw config_error("n_grid", "entries must be positive");
  }

  if (j.contains("log_p") && j.contains("alpha")) throw config_error("alpha", "give either log_p or alpha");
  if (j.contains("log_p") && j["log_p"].is_string()) {
    if (j["log_p"].get<std::string>() != "threshold") throw config_error("log_p", "expected a number, a list or \"threshold\"");
    if (c.command != Command::PhaseCase1) throw config_error("log_p", "\"threshold\" only applies to phase-case1");
    c.log_p_threshold = true;
  } else if (j.contains("log_p")) {
    c.log_p_grid = detail::scalar_or_list<double>(j["log_p"], "log_p");
  }
  if (j.contains("alpha")) {
    c.alpha_grid = detail::scalar_or_list<double>(j["alpha"], "alpha");
    if (c.alpha_grid.empty()) throw config_error("alpha", "alpha-grid empty");
    for (double a : c.alpha_grid) {
      if (!(a > 0 && a < 1)) throw config_error("alpha", "exponents must lie in (0, 1)");
    }
  }
  if (j.contains("log_p") && !c.log_p_threshold && c.log_p_grid.empty()) throw config_error("log_p", "log_p-grid empty");
  for (double v : c.log_p_grid) {
    if (!std::isfinite(v) || v < 0) throw config_error("log_p", "must be finite and >= 0");
  }

  if (j.contains("constants")) {
    const json& k = j["constants"];
    if (k.is_string()) {
      if (k.get<std::string>() != "calibrated") throw config_error("constants", "expected \"calibrated\" or an object");
    } else {
      detail::reject_unknown(k, {"b1", "b2", "a_n_exponent", "a_n_coeff", "mn_coeff"}, "constants.");
      c.constants_calibrated = false;
      if (k.contains("b1")) c.constants.b1 = detail::get_as<double>(k["b1"], "constants.b1");
      if (k.contains("b2")) c.constants.b2 = detail::get_as<double>(k["b2"], "constants.b2");
      if (k.contains("a_n_exponent")) c.constants.a_n.exponent = detail::get_as<double>(k["a_n_exponent"], "constants.a_n_exponent");
      if (k.contains("a_n_coeff")) c.constants.a_n.coeff = detail::get_as<double>(k["a_n_coeff"], "constants.a_n_coeff");
      if (k.contains("mn_coeff")) c.constants.mn_coeff = detail::get_as<double>(k["mn_coeff"], "constants.mn_coeff");
    }
  }
  if (c.constants_calibrated) c.constants = default_constants();
  c.constants.validate();

  if (j.contains("l")) c.l = detail::get_as<double>(j["l"], "l");
  if (!(c.l > 1 && c.l <= 2)) throw config_error("l", "must lie in (1, 2]");
  if (j.contains("epsilon")) c.epsilon = detail::get_as<double>(j["epsilon"], "epsilon");
  if (j.contains("delta")) c.delta = detail::get_as<double>(j["delta"], "delta");
  if (j.contains("eta")) {
    const json& e = j["eta"];
    if (e.is_string()) {
      if (e.get<std::string>() != "auto") throw config_error("eta", "expected a number or \"auto\"");
    } else {
      c.eta = detail::get_as<double>(e, "eta");
      if (!(*c.eta > 0 && *c.eta < 1)) throw config_error("eta", "must lie in (0, 1)");
    }
  }
  if (j.contains("side")) c.side = detail::get_as<std::string>(j["side"], "side");
  if (c.side != "max" && c.side != "symmetric") throw config_error("side", "must be \"max\" or \"symmetric\"");
  if (j.contains("m_max")) c.m_max = detail::get_as<unsigned>(j["m_max"], "m_max");

  if (j.contains("rect")) {
    const json& r = j["rect"];
    detail::reject_unknown(r, {"a", "b"}, "rect.");
    if (!r.contains("a") || !r.contains("b")) throw config_error("rect", "needs both a and b");
    c.rect_a = detail::endpoint_list(r["a"], "rect.a");
    c.rect_b = detail::endpoint_list(r["b"], "rect.b");
  }
  if (j.contains("endpoints")) c.endpoints = detail::endpoint_list(j["endpoints"], "endpoints");

  if (j.contains("mc")) {
    const json& m = j["mc"];
    detail::reject_unknown(m, {"trials", "p", "t_grid", "side"}, "mc.");
    if (m.contains("trials")) c.mc.trials = detail::get_as<std::uint64_t>(m["trials"], "mc.trials");
    if (m.contains("p")) c.mc.p = detail::get_as<std::size_t>(m["p"], "mc.p");
    if (m.contains("t_grid")) c.mc.t_grid = detail::endpoint_list(m["t_grid"], "mc.t_grid");
    if (m.contains("side")) c.mc.side = detail::get_as<std::string>(m["side"], "mc.side");
    if (c.mc.side != "max" && c.mc.side != "symmetric") throw config_error("mc.side", "must be \"max\" or \"symmetric\"");
  }
  if (j.contains("seed")) c.seed = detail::get_as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("workers")) c.workers = detail::get_as<unsigned>(j["workers"], "workers");
  if (c.workers == 0) throw config_error("workers", "must be >= 1");

  // per-command requirements
  // bound-thm1 with an endpoint list takes p from the list
  const bool needs_log_p = c.command == Command::RhoExact || c.command == Command::PhaseCase2 ||
                           c.command == Command::Sweep || (c.command == Command::BoundThm1 && c.endpoints.empty());
  if (needs_log_p && c.log_p_grid.empty() && c.alpha_grid.empty()) throw config_error("log_p", "give log_p or alpha");
  if (c.command == Command::Sweep && c.alpha_grid.empty()) throw config_error("alpha", "sweep needs an alpha grid");
  if (c.command == Command::Lemma3Bound && c.rect_a.empty()) throw config_error("rect", "lemma3-bound needs rect.a and rect.b");
  if (c.command == Command::RhoMc && c.mc.t_grid.empty()) throw config_error("mc.t_grid", "rho-mc needs a t grid");
  if (c.command == Command::BoundThm2 && !(c.epsilon > 0)) throw config_error("epsilon", "bound-thm2 needs epsilon > 0");
  if (c.command == Command::PhaseCase2 && !(c.delta > 0 && c.delta < 1)) throw config_error("delta", "must lie in (0, 1)");
  return c;
}

// Fully resolved configuration, for the manifest.
inline json to_json(const ExperimentConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  json m;
  m["kind"] = c.model.kind;
  if (c.model.kind == "lattice") {
    m["offset"] = c.model.offset;
    m["step"] = c.model.step;
    m["masses"] = c.model.masses;
  }
  j["model"] = m;
  j["n_grid"] = c.n_grid;
  if (c.uses_alpha()) {
    j["alpha"] = c.alpha_grid;
  } else if (c.log_p_threshold) {
    j["log_p"] = "threshold";
  } else {
    j["log_p"] = c.log_p_grid;
  }
  j["constants"] = {{"b1", c.constants.b1},
                    {"b2", c.constants.b2},
                    {"a_n_exponent", c.constants.a_n.exponent},
                    {"a_n_coeff", c.constants.a_n.coeff},
                    {"mn_coeff", c.constants.mn_coeff},
                    {"calibrated", c.constants_calibrated}};
  j["l"] = c.l;
  j["epsilon"] = c.epsilon;
  j["delta"] = c.delta;
  j["eta"] = c.resolved_eta();
  j["eta_auto"] = !c.eta.has_value();
  j["side"] = c.side;
  j["m_max"] = c.m_max;
  auto finite_or_string = [](const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) {
      if (std::isfinite(x)) {
        out.push_back(x);
      } else {
        out.push_back(x > 0 ? "inf" : "-inf");
      }
    }
    return out;
  };
  if (!c.rect_a.empty()) j["rect"] = {{"a", finite_or_string(c.rect_a)}, {"b", finite_or_string(c.rect_b)}};
  if (!c.endpoints.empty()) j["endpoints"] = finite_or_string(c.endpoints);
  j["mc"] = {{"trials", c.mc.trials}, {"p", c.mc.p}, {"t_grid", finite_or_string(c.mc.t_grid)}, {"side", c.mc.side}};
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  return j;
}

}  // namespace hdclt::harness
