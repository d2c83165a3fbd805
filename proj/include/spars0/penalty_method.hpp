#pragma once

// Exact penalty outer loop: solve Pen(alpha_k) to accuracy eps_k, stop once
// eps_k and x^T y are both below delta, otherwise grow alpha by beta.

#include "spars0/alm.hpp"
#include "spars0/stationarity.hpp"

#include <chrono>
#include <optional>

namespace spars0 {

struct EpsSchedule {
  enum class Kind { Geometric, Coupled };
  Kind kind = Kind::Geometric;
  double eps0 = 1e-2;
  double factor = 0.5;
  double eps_min = 1e-8;
  double c = 1.0;  // Coupled: eps_k = c / (alpha_k (k + 1))

  static EpsSchedule geometric(double eps0, double factor, double eps_min) {
    EpsSchedule s;
    s.eps0 = eps0;
    s.factor = factor;
    s.eps_min = eps_min;
    return s;
  }
  static EpsSchedule coupled(double c) {
    EpsSchedule s;
    s.kind = Kind::Coupled;
    s.c = c;
    s.eps_min = 0.0;
    return s;
  }

  double at(int k, double alpha_k) const {
    if (kind == Kind::Coupled) return c / (alpha_k * static_cast<double>(k + 1));
    return std::max(eps0 * std::pow(factor, k), eps_min);
  }
};

struct OuterConfig {
  double alpha0 = 1.0;
  double beta = 1.1;
  double delta = 1e-6;
  EpsSchedule eps;
  int max_outer = 200;
  bool multiplier_free = false;
  std::uint64_t seed = 0;
  double tau0 = 1e-6;
  bool keep_iterates = false;
  AlmConfig alm;

  void validate() const {
    if (!(alpha0 > 0.0)) throw PreconditionError("alpha0 must be positive");
    if (!(beta > 1.0)) throw PreconditionError("beta must exceed 1");
    if (!(delta >= 0.0)) throw PreconditionError("delta must be nonnegative");
    if (max_outer < 1) throw PreconditionError("max_outer must be at least 1");
    if (eps.kind == EpsSchedule::Kind::Geometric) {
      if (!(eps.eps0 > 0.0) || !(eps.factor > 0.0 && eps.factor < 1.0) || eps.eps_min < 0.0)
        throw PreconditionError("geometric eps schedule needs eps0 > 0, 0 < factor < 1, eps_min >= 0");
    } else if (!(eps.c > 0.0)) {
      throw PreconditionError("coupled eps schedule needs c > 0");
    }
  }
};

enum class Termination { Step3, MaxOuter, InnerFailure };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Step3: return "step3";
    case Termination::MaxOuter: return "max_outer";
    case Termination::InnerFailure: return "inner_failure";
  }
  return "unknown";
}

struct TraceEntry {
  int k = 0;
  double alpha = 0.0;
  double eps = 0.0;
  KKTResiduals residuals;
  double mf_rx = 0.0;  // multiplier-free residuals
  double mf_ry = 0.0;
  double comp = 0.0;
  double f = 0.0;
  Index l0 = 0;
  int inner_iters = 0;
  SolveStatus inner_status = SolveStatus::Converged;
  // Present only with keep_iterates.
  Vector x, y, lambda, mu;
};

struct SolveReport {
  Vector x, y;
  Vector lambda, mu;
  double objective = 0.0;
  double l0_objective = 0.0;
  IndexSet support;
  double comp = 0.0;
  KKTResiduals residuals;
  Termination termination = Termination::MaxOuter;
  std::vector<TraceEntry> trace;
  double s_residual = kInf;       // with the carried multipliers
  double best_s_residual = kInf;  // with least-squares multipliers
  IndexSet biactive;
  double final_alpha = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double wall_time_ms = 0.0;
};

/// ||P(x - (grad_x L + alpha y)) - x||_inf and ||P(y - (grad p + alpha x_S)) - y||_inf.
inline std::pair<double, double> multiplier_free_residuals(const PenalizedSubproblem& sub, const Vector& x,
                                                           const Vector& y, const Vector& lambda,
                                                           const Vector& mu) {
  const SparseProblem& base = sub.base;
  const Vector lam = lambda.size() == base.m() ? lambda : Vector::Zero(base.m());
  const Vector mu_ = mu.size() == base.p() ? mu : Vector::Zero(base.p());
  const Vector gx = sp_lagrangian_gradient(base, x, lam, mu_) + sub.alpha * sub.scatter(y);
  const Vector gy = penalty_gradient(sub.penalty, y) + sub.alpha * sub.gather(x);
  const double rx = inf_norm(base.project(Vector(x - gx)) - x);
  const double ry = inf_norm(Vector((y - gy).cwiseMax(0.0) - y));
  return {rx, ry};
}

inline std::pair<double, double> multiplier_free_residuals(const PenalizedSubproblem& sub, const Vector& x,
                                                           const Vector& y) {
  return multiplier_free_residuals(sub, x, y, Vector(), Vector());
}

inline bool step3_check(double eps_k, double comp, double delta) { return eps_k <= delta && comp <= delta; }

inline bool step3_check(const TraceEntry& it, double delta) { return step3_check(it.eps, it.comp, delta); }

/// Smallest alpha for which (x, y*(x)) is a stationary point of Pen(alpha),
/// given multipliers that make x S-stationary.
inline double exactness_threshold(const SparseProblem& problem, const PenaltySpec& penalty, const Vector& x,
                                  const Vector& lambda, const Vector& mu, double tau0) {
  const Vector grad_l = sp_lagrangian_gradient(problem, x, lambda, mu);
  const double s = component_minimizer(penalty);
  const double dp0 = component_derivative(penalty, 0.0);
  double alpha = 0.0;
  for (Index i : problem.sparse_indices()) {
    if (std::abs(x[i]) <= tau0) alpha = std::max(alpha, -grad_l[i] / s);
    else alpha = std::max(alpha, -dp0 / x[i]);
  }
  return alpha;
}

struct StartPoint {
  Vector x;
  Vector y;  // over the sparse coordinates; empty means y*(x)
  Vector lambda;
  Vector mu;
};

inline SolveReport solve(const SparseProblem& problem, const PenaltySpec& penalty, const OuterConfig& cfg,
                         const StartPoint& start = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  problem.validate();
  cfg.validate();
  {
    const auto bad = validate_spec(penalty);
    if (!bad.empty()) throw PreconditionError("penalty: " + bad.front());
    if (std::abs(penalty.rho - problem.rho) > 1e-12 * std::max(1.0, problem.rho))
      throw PreconditionError("penalty rho differs from problem rho");
  }
  PenalizedSubproblem sub = build_penalized(problem, penalty, cfg.alpha0);
  if (start.x.size() != 0 && start.x.size() != problem.n) throw PreconditionError("start x has wrong dimension");
  if (start.y.size() != 0 && start.y.size() != sub.ny()) throw PreconditionError("start y has wrong dimension");

  Vector x = problem.project(start.x.size() == problem.n ? start.x : Vector(Vector::Zero(problem.n)));
  Vector y = start.y.size() == sub.ny() ? Vector(start.y.cwiseMax(0.0)) : y_star(problem, sub.penalty, x, cfg.tau0);
  Vector lambda = start.lambda.size() == problem.m() ? start.lambda : Vector::Zero(problem.m());
  Vector mu = start.mu.size() == problem.p() ? start.mu : Vector::Zero(problem.p());

  AlmConfig alm = cfg.alm;
  alm.projected_stationarity = cfg.multiplier_free;

  SolveReport rep;
  int failures = 0;
  for (int k = 0; k < cfg.max_outer; ++k) {
    sub.alpha = cfg.alpha0 * std::pow(cfg.beta, k);
    const double eps_k = cfg.eps.at(k, sub.alpha);
    const InnerResult in = alm_solve(sub, x, y, lambda, mu, eps_k, alm);
    x = in.x;
    y = in.y;
    lambda = in.lambda;
    mu = in.mu;

    TraceEntry e;
    e.k = k;
    e.alpha = sub.alpha;
    e.eps = eps_k;
    e.residuals = in.residuals;
    std::tie(e.mf_rx, e.mf_ry) = multiplier_free_residuals(sub, x, y, lambda, mu);
    e.comp = sub.complementarity(x, y);
    e.f = problem.f(x);
    e.l0 = static_cast<Index>(support(problem, x, cfg.tau0).size());
    e.inner_iters = in.inner_iters;
    e.inner_status = in.status;
    if (cfg.keep_iterates) {
      e.x = x;
      e.y = y;
      e.lambda = lambda;
      e.mu = mu;
    }
    rep.trace.push_back(std::move(e));
    rep.residuals = in.residuals;
    rep.inner_iterations += in.inner_iters;
    rep.outer_iterations = k + 1;
    rep.final_alpha = sub.alpha;

    if (in.status != SolveStatus::Converged) {
      if (++failures >= 2) {
        rep.termination = Termination::InnerFailure;
        break;
      }
      continue;
    }
    failures = 0;
    if (step3_check(rep.trace.back(), cfg.delta)) {
      rep.termination = Termination::Step3;
      break;
    }
  }

  rep.x = x;
  rep.y = y;
  rep.lambda = lambda;
  rep.mu = mu;
  rep.objective = problem.f(x);
  rep.support = support(problem, x, cfg.tau0);
  rep.l0_objective = rep.objective + problem.rho * static_cast<double>(rep.support.size());
  rep.comp = sub.complementarity(x, y);
  rep.s_residual = s_residual(problem, x, lambda, mu, cfg.tau0);
  rep.best_s_residual = std::min(rep.s_residual, best_multiplier_residual(problem, x, cfg.tau0).residual);
  rep.biactive = biactive(sub.gather(x), y, cfg.tau0);
  for (Index& i : rep.biactive) i = sub.sparse_index[static_cast<std::size_t>(i)];
  rep.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Replaces x by the shrunk representative min(a+, a-) = 0 of a split
/// problem and recomputes the fields that depend on x. Reporting only.
inline void shrink_report(SolveReport& rep, const SparseProblem& problem, const SplitMap& map, double tau0) {
  rep.x = map.shrink(rep.x);
  rep.objective = problem.f(rep.x);
  rep.support = support(problem, rep.x, tau0);
  rep.l0_objective = rep.objective + problem.rho * static_cast<double>(rep.support.size());
  const IndexSet idx = problem.sparse_indices();
  double comp = 0.0;
  for (std::size_t k = 0; k < idx.size() && static_cast<Index>(k) < rep.y.size(); ++k)
    comp += rep.x[idx[k]] * rep.y[static_cast<Index>(k)];
  rep.comp = comp;
}

}  // namespace spars0
