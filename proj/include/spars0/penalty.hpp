#pragma once

// Separable penalties p(y) = sum_i p_i(y_i) on the auxiliary variable y.
// Every member is convex with a unique minimizer s > 0 and satisfies
// p_i(0) - p_i(s) = rho.

#include "spars0/types.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace spars0 {

enum class PenaltyKind {
  QuadraticShifted,  // rho * t * (t - 2)
  NaturalQuadratic,  // 0.5 * (t - sqrt(2 rho))^2
  HuberShifted,      // scaled Huber smoothing centred at sqrt(2 rho)
  ShiftedAbsolute,   // rho * |t - 1|, value queries only (not differentiable)
};

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::NaturalQuadratic;
  double rho = 1.0;
  double huber_eps = 0.1;
  Index n = 0;

  static PenaltySpec quadratic(double rho, Index n = 1) { return {PenaltyKind::QuadraticShifted, rho, 0.0, n}; }
  static PenaltySpec natural(double rho, Index n = 1) { return {PenaltyKind::NaturalQuadratic, rho, 0.0, n}; }
  static PenaltySpec huber(double rho, double eps, Index n = 1) { return {PenaltyKind::HuberShifted, rho, eps, n}; }
  static PenaltySpec shifted_absolute(double rho, Index n = 1) { return {PenaltyKind::ShiftedAbsolute, rho, 0.0, n}; }

  PenaltySpec with_dimension(Index dim) const {
    PenaltySpec copy = *this;
    copy.n = dim;
    return copy;
  }
};

inline std::string to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::QuadraticShifted: return "quadratic";
    case PenaltyKind::NaturalQuadratic: return "natural";
    case PenaltyKind::HuberShifted: return "huber";
    case PenaltyKind::ShiftedAbsolute: return "absolute";
  }
  return "unknown";
}

inline PenaltyKind penalty_kind_from_string(const std::string& name) {
  if (name == "quadratic") return PenaltyKind::QuadraticShifted;
  if (name == "natural") return PenaltyKind::NaturalQuadratic;
  if (name == "huber") return PenaltyKind::HuberShifted;
  if (name == "absolute") return PenaltyKind::ShiftedAbsolute;
  throw DomainError("unknown penalty kind '" + name + "'");
}

namespace penalty_detail {

inline double centre(const PenaltySpec& spec) { return std::sqrt(2.0 * spec.rho); }

// Scaling that makes the Huber member satisfy p(0) - p(s) = rho.
inline double huber_scale(const PenaltySpec& spec) {
  const double e = spec.huber_eps;
  return spec.rho / (e * centre(spec) - 0.5 * e * e);
}

}  // namespace penalty_detail

/// Minimizer s of a single component.
inline double component_minimizer(const PenaltySpec& spec) {
  switch (spec.kind) {
    case PenaltyKind::QuadraticShifted:
    case PenaltyKind::ShiftedAbsolute: return 1.0;
    case PenaltyKind::NaturalQuadratic:
    case PenaltyKind::HuberShifted: return penalty_detail::centre(spec);
  }
  return 1.0;
}

inline double component_value(const PenaltySpec& spec, double t) {
  switch (spec.kind) {
    case PenaltyKind::QuadraticShifted: return spec.rho * t * (t - 2.0);
    case PenaltyKind::NaturalQuadratic: {
      const double d = t - penalty_detail::centre(spec);
      return 0.5 * d * d;
    }
    case PenaltyKind::HuberShifted: {
      // Branch thresholds are centred at the minimizer; the closed interval
      // belongs to the quadratic branch.
      const double c = penalty_detail::centre(spec);
      const double e = spec.huber_eps;
      const double xi = penalty_detail::huber_scale(spec);
      if (t > c + e) return xi * (e * (t - c - e) + 0.5 * e * e);
      if (t < c - e) return xi * (-e * (t - c + e) + 0.5 * e * e);
      return xi * 0.5 * (t - c) * (t - c);
    }
    case PenaltyKind::ShiftedAbsolute: return spec.rho * std::abs(t - 1.0);
  }
  return 0.0;
}

inline double component_derivative(const PenaltySpec& spec, double t) {
  switch (spec.kind) {
    case PenaltyKind::QuadraticShifted: return spec.rho * (2.0 * t - 2.0);
    case PenaltyKind::NaturalQuadratic: return t - penalty_detail::centre(spec);
    case PenaltyKind::HuberShifted: {
      const double c = penalty_detail::centre(spec);
      const double e = spec.huber_eps;
      const double xi = penalty_detail::huber_scale(spec);
      if (t > c + e) return xi * e;
      if (t < c - e) return -xi * e;
      return xi * (t - c);
    }
    case PenaltyKind::ShiftedAbsolute:
      throw DomainError("shifted absolute-value penalty has no gradient");
  }
  return 0.0;
}

inline double component_second_derivative(const PenaltySpec& spec, double t) {
  switch (spec.kind) {
    case PenaltyKind::QuadraticShifted: return 2.0 * spec.rho;
    case PenaltyKind::NaturalQuadratic: return 1.0;
    case PenaltyKind::HuberShifted: {
      const double c = penalty_detail::centre(spec);
      return std::abs(t - c) <= spec.huber_eps ? penalty_detail::huber_scale(spec) : 0.0;
    }
    case PenaltyKind::ShiftedAbsolute:
      throw DomainError("shifted absolute-value penalty has no second derivative");
  }
  return 0.0;
}

inline double penalty_value(const PenaltySpec& spec, const Vector& y) {
  if (!all_finite(y)) throw DomainError("penalty_value: non-finite input");
  double total = 0.0;
  for (Index i = 0; i < y.size(); ++i) total += component_value(spec, y[i]);
  return total;
}

inline Vector penalty_gradient(const PenaltySpec& spec, const Vector& y) {
  if (!all_finite(y)) throw DomainError("penalty_gradient: non-finite input");
  Vector g(y.size());
  for (Index i = 0; i < y.size(); ++i) g[i] = component_derivative(spec, y[i]);
  return g;
}

/// Diagonal of the penalty Hessian.
inline Vector penalty_hessian_diagonal(const PenaltySpec& spec, const Vector& y) {
  Vector d(y.size());
  for (Index i = 0; i < y.size(); ++i) d[i] = component_second_derivative(spec, y[i]);
  return d;
}

struct PenaltyMinimizer {
  Vector s;  // per-component minimizers
  Vector m;  // per-component minimal values
  double M = 0.0;
};

inline PenaltyMinimizer penalty_minimizer(const PenaltySpec& spec) {
  const double s = component_minimizer(spec);
  const double m = component_value(spec, s);
  PenaltyMinimizer out;
  out.s = Vector::Constant(spec.n, s);
  out.m = Vector::Constant(spec.n, m);
  out.M = m * static_cast<double>(spec.n);
  return out;
}

/// Checks the penalty axioms numerically. An empty list means the spec is valid.
inline std::vector<std::string> validate_spec(const PenaltySpec& spec) {
  std::vector<std::string> violations;
  if (!(spec.rho > 0.0) || !std::isfinite(spec.rho)) {
    violations.emplace_back("rho must be positive and finite");
    return violations;
  }
  if (spec.kind == PenaltyKind::HuberShifted) {
    const double e = spec.huber_eps;
    // For eps >= sqrt(2 rho) the origin leaves the left linear branch and the
    // scaling no longer yields p(0) - p(s) = rho.
    if (!(e > 0.0) || !(e < penalty_detail::centre(spec))) {
      violations.emplace_back("huber_eps must satisfy 0 < eps < sqrt(2 rho)");
      return violations;
    }
  }

  const double s = component_minimizer(spec);
  if (!(s > 0.0)) violations.emplace_back("minimizer must be positive");

  const double gap = component_value(spec, 0.0) - component_value(spec, s);
  if (std::abs(gap - spec.rho) > 1e-12) {
    violations.emplace_back("p(0) - p(s) differs from rho");
  }

  // Grid over [s - 3w, s + 3w] that also contains every Huber kink region.
  const double width = std::max({3.0 * s, 3.0, 3.0 * spec.huber_eps});
  constexpr int kPoints = 2001;
  const double lo = s - width;
  const double h = 2.0 * width / (kPoints - 1);
  std::vector<double> vals(kPoints);
  for (int k = 0; k < kPoints; ++k) vals[k] = component_value(spec, lo + h * k);

  const double scale = std::max(1.0, std::abs(vals.front()) + std::abs(vals.back()));
  bool convex = true;
  for (int k = 1; k + 1 < kPoints; ++k) {
    const double left = (vals[k] - vals[k - 1]) / h;
    const double right = (vals[k + 1] - vals[k]) / h;
    if (right - left < -1e-9 * scale / h) convex = false;
  }
  if (!convex) violations.emplace_back("finite-difference slopes decrease (not convex)");

  const double ps = component_value(spec, s);
  bool unique = true;
  for (int k = 0; k < kPoints; ++k) {
    const double t = lo + h * k;
    if (std::abs(t - s) < 0.5 * h) continue;
    if (!(vals[k] > ps)) unique = false;
  }
  for (int k = 1; k < kPoints; ++k) {
    const double t0 = lo + h * (k - 1);
    const double t1 = lo + h * k;
    if (t1 <= s && !(vals[k] < vals[k - 1])) unique = false;
    if (t0 >= s && !(vals[k] > vals[k - 1])) unique = false;
  }
  if (!unique) violations.emplace_back("minimizer is not unique");
  return violations;
}

}  // namespace spars0
