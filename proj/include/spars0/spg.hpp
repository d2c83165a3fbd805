#pragma once

// Spectral projected gradient with a nonmonotone (max of last M values)
// Armijo line search and safeguarded Barzilai-Borwein steps.

#include "spars0/types.hpp"

#include <algorithm>
#include <deque>

namespace spars0 {

enum class SolveStatus { Converged, IterLimit, Stalled, Infeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::IterLimit: return "iter_limit";
    case SolveStatus::Stalled: return "stalled";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

/// Componentwise clamp onto [lo, hi].
inline Vector project_box(const Vector& v, const Vector& lo, const Vector& hi) {
  if (v.size() != lo.size() || v.size() != hi.size()) throw DomainError("project_box: size mismatch");
  for (Index i = 0; i < lo.size(); ++i)
    if (lo[i] > hi[i]) throw DomainError("project_box: lower bound exceeds upper bound");
  return v.cwiseMax(lo).cwiseMin(hi);
}

struct SpgOptions {
  double tol = 1e-8;
  int max_iter = 20000;
  int memory = 10;
  double step_min = 1e-10;
  double step_max = 1e10;
  double armijo = 1e-4;
};

struct SpgResult {
  Vector x;
  double value = 0.0;
  double pg_residual = kInf;
  int iterations = 0;
  int evaluations = 0;
  SolveStatus status = SolveStatus::IterLimit;
};

/// Minimizes F over a closed convex set given by `project`.
///
/// `fg(x, grad)` returns F(x) and writes the gradient; `project(v)` returns the
/// projection of v. Stops when ||P(x - grad F(x)) - x||_inf <= tol. The
/// returned point is the best one visited, so its value never exceeds F(P(x0)).
template <class ValueGrad, class Projection>
SpgResult spg_solve(ValueGrad&& fg, Projection&& project, const Vector& x0, const SpgOptions& opt) {
  SpgResult out;
  Vector x = project(x0);
  Vector g(x.size());
  double f = fg(x, g);
  ++out.evaluations;
  if (!std::isfinite(f)) {
    out.x = x;
    out.value = f;
    out.status = SolveStatus::Stalled;
    return out;
  }

  auto pg_residual = [&](const Vector& at, const Vector& grad) { return inf_norm(project(Vector(at - grad)) - at); };

  double res = pg_residual(x, g);
  Vector best_x = x;
  double best_f = f;
  double best_res = res;
  std::deque<double> history{f};

  double step = res > 0.0 ? std::clamp(1.0 / res, opt.step_min, opt.step_max) : 1.0;
  Vector xn(x.size()), gn(x.size()), d(x.size());

  int it = 0;
  for (; it < opt.max_iter; ++it) {
    if (res <= opt.tol) {
      out.status = SolveStatus::Converged;
      break;
    }
    d = project(Vector(x - step * g)) - x;
    const double gtd = g.dot(d);
    const double f_ref = *std::max_element(history.begin(), history.end());

    double t = 1.0;
    double fn = 0.0;
    bool accepted = false;
    while (t > 1e-20) {
      xn = x + t * d;
      fn = fg(xn, gn);
      ++out.evaluations;
      if (std::isfinite(fn) && fn <= f_ref + opt.armijo * t * gtd) {
        accepted = true;
        break;
      }
      if (!std::isfinite(fn)) {
        t *= 0.1;
        continue;
      }
      // Safeguarded quadratic interpolation.
      const double denom = fn - f - t * gtd;
      double t_new = denom > 0.0 ? -0.5 * t * t * gtd / denom : 0.5 * t;
      if (t_new < 0.1 * t || t_new > 0.9 * t) t_new = 0.5 * t;
      t = t_new;
    }
    if (!accepted) {
      out.status = SolveStatus::Stalled;
      break;
    }

    const Vector s = xn - x;
    const Vector yv = gn - g;
    const double sty = s.dot(yv);
    step = sty <= 0.0 ? opt.step_max : std::clamp(s.squaredNorm() / sty, opt.step_min, opt.step_max);

    x.swap(xn);
    g.swap(gn);
    f = fn;
    history.push_back(f);
    if (static_cast<int>(history.size()) > opt.memory) history.pop_front();
    res = pg_residual(x, g);
    if (f < best_f || (res <= opt.tol && f <= best_f)) {
      best_x = x;
      best_f = f;
      best_res = res;
    }
  }
  out.iterations = it;
  if (it == opt.max_iter && res <= opt.tol) out.status = SolveStatus::Converged;

  if (out.status == SolveStatus::Converged) {
    out.x = x;
    out.value = f;
    out.pg_residual = res;
  } else {
    out.x = best_x;
    out.value = best_f;
    out.pg_residual = best_res;
  }
  return out;
}

}  // namespace spars0
