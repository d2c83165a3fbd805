#pragma once

// Safeguarded augmented Lagrangian (PHR) for g(z) <= 0, h(z) = 0 on top of
// the spectral projected gradient, plus the KKT bookkeeping shared with the
// outer penalty loop.

#include "spars0/problem.hpp"
#include "spars0/spg.hpp"

#include <algorithm>

namespace spars0 {

/// A smooth program over a box (and optional ball blocks) with g/h
/// constraints. The sparse mask of a SparseProblem is ignored here.
using SmoothProgram = SparseProblem;

struct BoundMultipliers {
  Vector lower;
  Vector upper;
};

/// nu_lower = max(0, grad) on lower-active coordinates, nu_upper = max(0, -grad)
/// on upper-active ones; activity means within tau of the bound.
inline BoundMultipliers extract_bound_multipliers(const Vector& x, const Vector& grad, const Vector& lo,
                                                  const Vector& hi, double tau) {
  BoundMultipliers nu{Vector::Zero(x.size()), Vector::Zero(x.size())};
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] <= lo[i] + tau) nu.lower[i] = std::max(0.0, grad[i]);
    if (x[i] >= hi[i] - tau) nu.upper[i] = std::max(0.0, -grad[i]);
  }
  return nu;
}

inline Vector lagrangian_gradient(const SmoothProgram& prog, const Vector& z, const Vector& lambda,
                                  const Vector& mu) {
  Vector grad = prog.grad_f(z);
  if (prog.m() > 0) grad.noalias() += prog.jac_g(z).transpose() * lambda;
  if (prog.p() > 0) grad.noalias() += prog.jac_h(z).transpose() * mu;
  return grad;
}

struct NlpResiduals {
  Vector stationarity;  // per coordinate, after bound multipliers / ball projection
  BoundMultipliers nu;
  double feas_g = 0.0;     // max_i |min(-g_i, lambda_i)|
  double infeas_g = 0.0;   // max_i max(g_i, 0)
  double feas_h = 0.0;     // ||h||_inf
  Vector comp;             // per coordinate max(min(z-lo, nu_l), min(hi-z, nu_u))
  Vector projected;        // P(z - grad L) - z, multiplier-free
};

inline NlpResiduals nlp_residuals(const SmoothProgram& prog, const Vector& z, const Vector& grad_lagrangian,
                                  const Vector& g, const Vector& h, const Vector& lambda, double tau) {
  NlpResiduals r;
  r.nu = extract_bound_multipliers(z, grad_lagrangian, prog.lower, prog.upper, tau);
  r.stationarity = grad_lagrangian - r.nu.lower + r.nu.upper;
  r.projected = prog.project(Vector(z - grad_lagrangian)) - z;
  if (!prog.balls.empty()) {
    const Vector& step = r.projected;
    for (const auto& b : prog.balls) {
      const Index len = b.count * b.dim;
      r.stationarity.segment(b.offset, len) = -step.segment(b.offset, len);
    }
  }
  r.comp = Vector::Zero(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double cl = std::min(z[i] - prog.lower[i], r.nu.lower[i]);
    const double cu = std::min(prog.upper[i] - z[i], r.nu.upper[i]);
    r.comp[i] = std::max({0.0, cl, cu});
  }
  for (Index i = 0; i < g.size(); ++i) {
    r.feas_g = std::max(r.feas_g, std::abs(std::min(-g[i], lambda[i])));
    r.infeas_g = std::max(r.infeas_g, g[i]);
  }
  r.feas_h = inf_norm(h);
  return r;
}

struct AlmConfig {
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double infeasibility_decrease = 0.5;
  double multiplier_bound = 1e12;
  double max_penalty = 1e12;
  double feasibility_tol = 1e-8;
  int max_outer = 60;
  int max_inner = 20000;
  int max_total_inner = 300000;  // SPG iterations over all ALM rounds
  double inner_tol_factor = 0.1;
  double inner_tol_floor = 1e-10;
  bool projected_stationarity = false;  // accept on the projected residual instead of bound multipliers
};

struct AlmOutcome {
  Vector z;
  Vector lambda;
  Vector mu;
  NlpResiduals residuals;
  double pg_residual = kInf;
  int inner_iterations = 0;
  int outer_iterations = 0;
  double penalty = 0.0;
  SolveStatus status = SolveStatus::IterLimit;
};

namespace alm_detail {

inline bool accepted(const NlpResiduals& r, double eps, double feas_tol, bool projected) {
  const bool stationary =
      projected ? inf_norm(r.projected) <= eps : inf_norm(r.stationarity) <= eps && inf_norm(r.comp) <= eps;
  return stationary && r.feas_g <= eps && r.infeas_g <= feas_tol && r.feas_h <= feas_tol;
}

}  // namespace alm_detail

/// Finds (z, lambda, mu) with all KKT residuals <= eps and g/h feasibility
/// <= min(eps, cfg.feasibility_tol). Without g/h the SPG result is returned
/// directly.
inline AlmOutcome alm_minimize(const SmoothProgram& prog, const Vector& z0, const Vector& lambda0,
                               const Vector& mu0, double eps, const AlmConfig& cfg) {
  if (!(eps > 0.0)) throw PreconditionError("alm_minimize: eps must be positive");
  const Index m = prog.m();
  const Index p = prog.p();
  const double feas_tol = std::min(eps, cfg.feasibility_tol);
  auto project = [&prog](const Vector& v) { return prog.project(v); };

  SpgOptions spg;
  spg.tol = std::max(cfg.inner_tol_factor * eps, cfg.inner_tol_floor);
  spg.max_iter = cfg.max_inner;

  AlmOutcome out;
  out.lambda = lambda0.size() == m ? Vector(lambda0.cwiseMax(0.0).cwiseMin(cfg.multiplier_bound)) : Vector(Vector::Zero(m));
  out.mu = mu0.size() == p ? Vector(mu0.cwiseMax(-cfg.multiplier_bound).cwiseMin(cfg.multiplier_bound))
                                : Vector(Vector::Zero(p));

  auto finish = [&](const Vector& z, const Vector& lambda, const Vector& mu) {
    out.z = z;
    const Vector g = prog.g(z);
    const Vector h = prog.h(z);
    out.residuals = nlp_residuals(prog, z, lagrangian_gradient(prog, z, lambda, mu), g, h, lambda, eps);
  };

  if (m == 0 && p == 0) {
    auto fg = [&prog](const Vector& z, Vector& grad) { return prog.objective(z, &grad); };
    const SpgResult r = spg_solve(fg, project, z0, spg);
    out.inner_iterations = r.iterations;
    out.pg_residual = r.pg_residual;
    finish(r.x, out.lambda, out.mu);
    out.status = r.status == SolveStatus::Converged ? SolveStatus::Converged : r.status;
    if (out.status == SolveStatus::Converged && !alm_detail::accepted(out.residuals, eps, feas_tol, cfg.projected_stationarity))
      out.status = SolveStatus::IterLimit;
    return out;
  }

  double penalty = cfg.initial_penalty;
  Vector lambda_bar = out.lambda;
  Vector mu_bar = out.mu;
  Vector z = prog.project(z0);
  double prev_infeasibility = kInf;
  Vector gv(m), hv(p);
  Matrix jg(m, prog.n), jh(p, prog.n);

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    auto fg = [&](const Vector& x, Vector& grad) {
      double v = prog.objective(x, &grad);
      if (m > 0) {
        prog.ineq.evaluate(x, gv, &jg);
        const Vector shifted = (lambda_bar + penalty * gv).cwiseMax(0.0);
        v += 0.5 / penalty * (shifted.squaredNorm() - lambda_bar.squaredNorm());
        grad.noalias() += jg.transpose() * shifted;
      }
      if (p > 0) {
        prog.eq.evaluate(x, hv, &jh);
        const Vector shifted = mu_bar + penalty * hv;
        v += 0.5 / penalty * (shifted.squaredNorm() - mu_bar.squaredNorm());
        grad.noalias() += jh.transpose() * shifted;
      }
      return v;
    };
    spg.max_iter = std::min(cfg.max_inner, std::max(1, cfg.max_total_inner - out.inner_iterations));
    const SpgResult r = spg_solve(fg, project, z, spg);
    z = r.x;
    out.inner_iterations += r.iterations;
    out.pg_residual = r.pg_residual;
    out.outer_iterations = outer + 1;

    const Vector g = prog.g(z);
    const Vector h = prog.h(z);
    const Vector lambda = (lambda_bar + penalty * g).cwiseMax(0.0);
    const Vector mu = mu_bar + penalty * h;
    out.lambda = lambda;
    out.mu = mu;
    finish(z, lambda, mu);
    out.penalty = penalty;
    if (r.status == SolveStatus::Converged && alm_detail::accepted(out.residuals, eps, feas_tol, cfg.projected_stationarity)) {
      out.status = SolveStatus::Converged;
      return out;
    }

    double infeasibility = inf_norm(h);
    for (Index i = 0; i < m; ++i)
      infeasibility = std::max(infeasibility, std::abs(std::max(g[i], -lambda_bar[i] / penalty)));
    const double violation = std::max(inf_norm(h), g.size() > 0 ? std::max(0.0, g.maxCoeff()) : 0.0);
    // Already-feasible iterates keep their penalty; only stationarity is missing.
    if (outer > 0 && infeasibility > feas_tol && infeasibility > cfg.infeasibility_decrease * prev_infeasibility) {
      if (penalty >= cfg.max_penalty && violation > feas_tol) {
        out.status = SolveStatus::Infeasible;
        return out;
      }
      penalty = std::min(penalty * cfg.penalty_growth, cfg.max_penalty);
    }
    if (out.inner_iterations >= cfg.max_total_inner) break;
    prev_infeasibility = infeasibility;
    lambda_bar = lambda.cwiseMin(cfg.multiplier_bound);
    mu_bar = mu.cwiseMax(-cfg.multiplier_bound).cwiseMin(cfg.multiplier_bound);
  }
  const double violation = std::max(out.residuals.feas_h, out.residuals.infeas_g);
  out.status = violation > 1e3 * feas_tol && penalty >= cfg.max_penalty ? SolveStatus::Infeasible
                                                                         : SolveStatus::IterLimit;
  return out;
}

/// Step-2 residuals of the penalized subproblem.
struct KKTResiduals {
  double stat_x = 0.0;
  double stat_y = 0.0;
  double feas_g = 0.0;
  double feas_h = 0.0;
  double comp_x = 0.0;
  double comp_y = 0.0;

  double max() const { return std::max({stat_x, stat_y, feas_g, feas_h, comp_x, comp_y}); }
};

struct InnerResult {
  Vector x, y;
  Vector lambda, mu;
  Vector nu_x, nu_y;
  Vector nu_x_upper;  // multipliers of x <= upper
  KKTResiduals residuals;
  double infeas_g = 0.0;
  double pg_residual = kInf;
  int inner_iters = 0;
  double penalty = 0.0;  // final ALM penalty
  SolveStatus status = SolveStatus::IterLimit;
};

/// Pen(alpha) as a smooth program over z = (x, y).
inline SmoothProgram penalized_program(const PenalizedSubproblem& sub) {
  const Index n = sub.base.n;
  const Index ny = sub.ny();
  SmoothProgram prog;
  prog.name = sub.base.name + "/pen";
  prog.n = n + ny;
  prog.rho = sub.base.rho;
  prog.lower.resize(prog.n);
  prog.upper.resize(prog.n);
  prog.lower << sub.base.lower, Vector::Zero(ny);
  prog.upper << sub.base.upper, Vector::Constant(ny, kInf);
  prog.sparse_mask.assign(static_cast<std::size_t>(prog.n), false);
  prog.balls = sub.base.balls;

  prog.objective = [sub, n, ny](const Vector& z, Vector* grad) {
    const Vector x = z.head(n);
    const Vector y = z.tail(ny);
    if (!grad) return sub.value(x, y);
    Vector gx, gy;
    const double v = sub.value_gradient(x, y, gx, gy);
    grad->resize(n + ny);
    *grad << gx, gy;
    return v;
  };
  auto lift = [n, ny](const ConstraintBlock& block) {
    ConstraintBlock out;
    out.count = block.count;
    if (block.count == 0) return out;
    auto eval = block.evaluate;
    out.evaluate = [eval, n, ny](const Vector& z, Vector& value, Matrix* jac) {
      const Vector x = z.head(n);
      if (!jac) {
        eval(x, value, nullptr);
        return;
      }
      Matrix jx(value.size(), n);
      eval(x, value, &jx);
      jac->resize(value.size(), n + ny);
      jac->leftCols(n) = jx;
      jac->rightCols(ny).setZero();
    };
    return out;
  };
  prog.ineq = lift(sub.base.ineq);
  prog.eq = lift(sub.base.eq);
  return prog;
}

inline KKTResiduals split_residuals(const NlpResiduals& r, Index n) {
  KKTResiduals k;
  const Index ny = r.stationarity.size() - n;
  k.stat_x = inf_norm(r.stationarity.head(n));
  k.stat_y = inf_norm(r.stationarity.tail(ny));
  k.feas_g = r.feas_g;
  k.feas_h = r.feas_h;
  k.comp_x = inf_norm(r.comp.head(n));
  k.comp_y = inf_norm(r.comp.tail(ny));
  return k;
}

/// Step-2 residuals of Pen(alpha) at (x, y, lambda, mu) with bound
/// multipliers extracted at activity tolerance tau.
inline InnerResult penalized_residuals(const PenalizedSubproblem& sub, const Vector& x, const Vector& y,
                                       const Vector& lambda, const Vector& mu, double tau) {
  const SmoothProgram prog = penalized_program(sub);
  Vector z(prog.n);
  z << x, y;
  const NlpResiduals r =
      nlp_residuals(prog, z, lagrangian_gradient(prog, z, lambda, mu), prog.g(z), prog.h(z), lambda, tau);
  InnerResult out;
  out.x = x;
  out.y = y;
  out.lambda = lambda;
  out.mu = mu;
  out.nu_x = r.nu.lower.head(sub.base.n);
  out.nu_x_upper = r.nu.upper.head(sub.base.n);
  out.nu_y = r.nu.lower.tail(sub.ny());
  out.residuals = split_residuals(r, sub.base.n);
  out.infeas_g = r.infeas_g;
  return out;
}

/// Solves Pen(alpha) to step-2 accuracy eps_k from a warm start.
inline InnerResult alm_solve(const PenalizedSubproblem& sub, const Vector& x0, const Vector& y0,
                             const Vector& lambda0, const Vector& mu0, double eps_k, const AlmConfig& cfg) {
  if (!(eps_k > 0.0)) throw PreconditionError("alm_solve: eps_k must be positive");
  const SmoothProgram prog = penalized_program(sub);
  Vector z0(prog.n);
  z0 << x0, y0;
  const AlmOutcome a = alm_minimize(prog, z0, lambda0, mu0, eps_k, cfg);

  const Index n = sub.base.n;
  InnerResult out;
  out.x = a.z.head(n);
  out.y = a.z.tail(sub.ny());
  out.lambda = a.lambda;
  out.mu = a.mu;
  out.nu_x = a.residuals.nu.lower.head(n);
  out.nu_x_upper = a.residuals.nu.upper.head(n);
  out.nu_y = a.residuals.nu.lower.tail(sub.ny());
  out.residuals = split_residuals(a.residuals, n);
  out.infeas_g = a.residuals.infeas_g;
  out.pg_residual = a.pg_residual;
  out.inner_iters = a.inner_iterations;
  out.penalty = a.penalty;
  out.status = a.status;
  return out;
}

inline InnerResult alm_solve(const PenalizedSubproblem& sub, const Vector& x0, const Vector& y0, double eps_k,
                             const AlmConfig& cfg = {}) {
  return alm_solve(sub, x0, y0, Vector(), Vector(), eps_k, cfg);
}

}  // namespace spars0
