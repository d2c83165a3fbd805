#pragma once

// Problems whose objective and constraints are all quadratic forms
// 1/2 x^T P x + q^T x + c. Small fixtures and the generic JSON family use these.

#include "spars0/problem.hpp"

namespace spars0 {

struct QuadraticForm {
  Matrix P;  // empty means zero
  Vector q;  // empty means zero
  double c = 0.0;

  double value(const Vector& x) const {
    double v = c;
    if (P.size() > 0) v += 0.5 * x.dot(P * x);
    if (q.size() > 0) v += q.dot(x);
    return v;
  }
  /// Gradient with P symmetrized, so non-symmetric input is harmless.
  Vector gradient(const Vector& x) const {
    Vector g = Vector::Zero(x.size());
    if (P.size() > 0) g.noalias() += 0.5 * (P + P.transpose()) * x;
    if (q.size() > 0) g += q;
    return g;
  }
  void check(Index n, const std::string& what) const {
    if (P.size() > 0 && (P.rows() != n || P.cols() != n)) throw PreconditionError(what + ": P must be n x n");
    if (q.size() > 0 && q.size() != n) throw PreconditionError(what + ": q must have length n");
    if (!std::isfinite(c) || !P.allFinite() || !q.allFinite()) throw PreconditionError(what + ": non-finite entry");
  }
};

inline ConstraintBlock quadratic_block(const std::vector<QuadraticForm>& forms) {
  ConstraintBlock b;
  b.count = static_cast<Index>(forms.size());
  if (forms.empty()) return b;
  b.evaluate = [forms](const Vector& x, Vector& v, Matrix* jac) {
    v.resize(static_cast<Index>(forms.size()));
    if (jac) jac->resize(static_cast<Index>(forms.size()), x.size());
    for (std::size_t i = 0; i < forms.size(); ++i) {
      const auto r = static_cast<Index>(i);
      v[r] = forms[i].value(x);
      if (jac) jac->row(r) = forms[i].gradient(x).transpose();
    }
  };
  return b;
}

struct QcqpSpec {
  std::string name = "qcqp";
  Index n = 0;
  double rho = 1.0;
  QuadraticForm objective;
  std::vector<QuadraticForm> ineq;  // each <= 0
  std::vector<QuadraticForm> eq;    // each == 0
  Vector lower;                     // empty means 0
  Vector upper;                     // empty means +inf
  std::vector<bool> sparse_mask;    // empty means all sparse
};

inline SparseProblem build_qcqp(const QcqpSpec& spec) {
  if (spec.n < 1) throw PreconditionError("qcqp: n must be positive");
  spec.objective.check(spec.n, "qcqp objective");
  for (const auto& f : spec.ineq) f.check(spec.n, "qcqp inequality");
  for (const auto& f : spec.eq) f.check(spec.n, "qcqp equality");
  SparseProblem p;
  p.name = spec.name;
  p.n = spec.n;
  p.rho = spec.rho;
  const QuadraticForm obj = spec.objective;
  p.objective = [obj](const Vector& x, Vector* grad) {
    if (grad) *grad = obj.gradient(x);
    return obj.value(x);
  };
  p.ineq = quadratic_block(spec.ineq);
  p.eq = quadratic_block(spec.eq);
  p.lower = spec.lower.size() == 0 ? Vector(Vector::Zero(spec.n)) : spec.lower;
  p.upper = spec.upper.size() == 0 ? Vector(Vector::Constant(spec.n, kInf)) : spec.upper;
  if (p.lower.size() != spec.n || p.upper.size() != spec.n) throw PreconditionError("qcqp: bounds must have length n");
  p.sparse_mask = spec.sparse_mask.empty() ? std::vector<bool>(static_cast<std::size_t>(spec.n), true) : spec.sparse_mask;
  if (static_cast<Index>(p.sparse_mask.size()) != spec.n) throw PreconditionError("qcqp: mask must have length n");
  return p;
}

}  // namespace spars0
