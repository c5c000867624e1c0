#pragma once

// Component models for the coordinates X_{i1}: the law of one summand,
// the number of summands n, and s_n^2 = sum_i Var(X_{i1}).

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "hdclt/errors.hpp"
#include "hdclt/exact.hpp"
#include "hdclt/lattice.hpp"

namespace hdclt {

enum class ModelKind {
  Rademacher,
  Lattice,
  // Continuous unit-variance components; only sampled, never convolved.
  Gaussian,
  Uniform,
};

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Rademacher: return "rademacher";
    case ModelKind::Lattice: return "lattice";
    case ModelKind::Gaussian: return "gaussian";
    case ModelKind::Uniform: return "uniform";
  }
  return "unknown";
}

class ComponentModel {
 public:
  static ComponentModel rademacher(std::uint64_t n) { return {ModelKind::Rademacher, std::nullopt, n}; }
  static ComponentModel lattice(LatticeDistribution law, std::uint64_t n) {
    return {ModelKind::Lattice, std::move(law), n};
  }
  static ComponentModel gaussian(std::uint64_t n) { return {ModelKind::Gaussian, std::nullopt, n}; }
  static ComponentModel uniform(std::uint64_t n) { return {ModelKind::Uniform, std::nullopt, n}; }

  ModelKind kind() const { return kind_; }
  std::uint64_t n() const { return n_; }
  bool lattice_backed() const { return kind_ == ModelKind::Rademacher || kind_ == ModelKind::Lattice; }

  // Law of a single summand X_{i1}.
  LatticeDistribution component_law() const {
    if (kind_ == ModelKind::Rademacher) return LatticeDistribution::rademacher();
    if (kind_ == ModelKind::Lattice) return *law_;
    throw domain_error("component_law: model " + to_string(kind_) + " is not lattice-backed");
  }

  // Var(X_{i1}).
  Rational component_variance() const {
    switch (kind_) {
      case ModelKind::Rademacher:
      case ModelKind::Gaussian:
      case ModelKind::Uniform: return 1;
      case ModelKind::Lattice: return law_->variance();
    }
    return 1;
  }

  Rational s_n_sq_exact() const { return component_variance() * Rational(static_cast<long long>(n_)); }
  double s_n_sq() const { return s_n_sq_exact().convert_to<double>(); }
  logval s_n() const { return std::sqrt(static_cast<logval>(s_n_sq_exact().convert_to<long double>())); }

  // Law of sum_i X_{i1}.
  LatticeDistribution sum_law(std::size_t support_cap = kDefaultSupportCap) const {
    if (kind_ == ModelKind::Rademacher) return LatticeDistribution::rademacher_sum(n_, support_cap);
    return convolve_iid(component_law(), n_, support_cap);
  }

  // Law of T_{n1} = s_n^{-1} sum_i X_{i1}.
  LatticeMarginal normalized_marginal(std::size_t support_cap = kDefaultSupportCap) const {
    return LatticeMarginal(sum_law(support_cap), s_n());
  }

 private:
  ComponentModel(ModelKind kind, std::optional<LatticeDistribution> law, std::uint64_t n)
      : kind_(kind), law_(std::move(law)), n_(n) {
    if (n_ == 0) throw domain_error("ComponentModel: n must be positive");
    if (kind_ == ModelKind::Lattice && law_->variance() <= 0) {
      throw domain_error("ComponentModel: lattice law must be non-degenerate");
    }
  }

  ModelKind kind_;
  std::optional<LatticeDistribution> law_;
  std::uint64_t n_;
};

inline constexpr unsigned kMomentOrderCap = 400;

// n^{m-1} sum_i E(X_{i1}/s_n)^{2m}, computed exactly and rounded once.
inline Rational moment_2m_exact(const ComponentModel& model, unsigned m) {
  if (m == 0) throw domain_error("moment_2m: m must be >= 1");
  if (!model.lattice_backed()) throw domain_error("moment_2m: model must be lattice-backed");
  if (2 * m > kMomentOrderCap) throw resource_error("moment_2m: order 2m exceeds cap");
  const Rational n(static_cast<long long>(model.n()));
  const Rational even_moment = model.component_law().raw_moment(2 * m);
  Rational n_pow = 1;
  Rational s_pow = 1;
  const Rational s_sq = model.s_n_sq_exact();
  for (unsigned i = 0; i < m; ++i) {
    s_pow *= s_sq;
    if (i + 1 < m) n_pow *= n;
  }
  return n_pow * n * even_moment / s_pow;
}

inline double moment_2m(const ComponentModel& model, unsigned m) {
  return moment_2m_exact(model, m).convert_to<double>();
}

}  // namespace hdclt
