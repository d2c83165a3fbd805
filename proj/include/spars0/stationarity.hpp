#pragma once

// Stationarity diagnostics for sparse problems: S-stationarity residuals,
// problem-tailored constraint qualifications, second-order checks, and
// sequential (approximate) stationarity traces.

#include "spars0/lp.hpp"
#include "spars0/penalty.hpp"
#include "spars0/problem.hpp"

#include <random>

namespace spars0 {

struct SPLagrangianEval {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;  // empty unless requested
};

inline Vector sp_lagrangian_gradient(const SparseProblem& problem, const Vector& x, const Vector& lambda,
                                     const Vector& mu) {
  Vector grad = problem.grad_f(x);
  if (problem.m() > 0) grad.noalias() += problem.jac_g(x).transpose() * lambda;
  if (problem.p() > 0) grad.noalias() += problem.jac_h(x).transpose() * mu;
  return grad;
}

/// L(x, lambda, mu) = f + lambda^T g + mu^T h; the Hessian is a central
/// difference of the analytic gradient.
inline SPLagrangianEval sp_lagrangian(const SparseProblem& problem, const Vector& x, const Vector& lambda,
                                      const Vector& mu, bool with_hessian = false) {
  SPLagrangianEval out;
  out.value = problem.f(x);
  if (problem.m() > 0) out.value += lambda.dot(problem.g(x));
  if (problem.p() > 0) out.value += mu.dot(problem.h(x));
  out.gradient = sp_lagrangian_gradient(problem, x, lambda, mu);
  if (with_hessian) {
    const Index n = x.size();
    const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    out.hessian.resize(n, n);
    Vector xp = x, xm = x;
    for (Index i = 0; i < n; ++i) {
      const double h = root_eps * (1.0 + std::abs(x[i]));
      xp[i] = x[i] + h;
      xm[i] = x[i] - h;
      out.hessian.col(i) = (sp_lagrangian_gradient(problem, xp, lambda, mu) -
                            sp_lagrangian_gradient(problem, xm, lambda, mu)) / (2.0 * h);
      xp[i] = x[i];
      xm[i] = x[i];
    }
    out.hessian = 0.5 * (out.hessian + out.hessian.transpose()).eval();
  }
  return out;
}

namespace stationarity_detail {

// Per-coordinate residual of grad L on coordinates outside the zero set.
// Active box bounds absorb a sign-correct multiplier; ball-block coordinates
// use the projected-gradient step.
inline Vector support_residuals(const SparseProblem& problem, const Vector& x, const Vector& grad_l,
                                double tau0) {
  Vector r = Vector::Zero(x.size());
  const std::vector<bool> in_ball = problem.ball_mask();
  Vector ball_step;
  if (!problem.balls.empty()) ball_step = problem.project(Vector(x - grad_l)) - x;
  for (Index i = 0; i < x.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (in_ball[k]) {
      r[i] = std::abs(ball_step[i]);
      continue;
    }
    if (problem.is_sparse(i) && std::abs(x[i]) <= tau0) continue;
    const bool upper_active = x[i] >= problem.upper[i] - kActiveTol;
    const bool lower_active = !problem.is_sparse(i) && x[i] <= problem.lower[i] + kActiveTol;
    if (upper_active && lower_active) continue;
    if (upper_active) r[i] = std::max(0.0, grad_l[i]);
    else if (lower_active) r[i] = std::max(0.0, -grad_l[i]);
    else r[i] = std::abs(grad_l[i]);
  }
  return r;
}

inline double feasibility_residual(const Vector& g, const Vector& h, const Vector& lambda) {
  double r = inf_norm(h);
  for (Index i = 0; i < g.size(); ++i) {
    r = std::max(r, std::abs(std::min(-g[i], lambda[i])));
    r = std::max(r, std::max(0.0, g[i]));
    r = std::max(r, std::max(0.0, -lambda[i]));
  }
  return r;
}

// min ||A v - b||_2 with v_j >= 0 for j < n_nonneg and free otherwise
// (Lawson-Hanson active set with permanently passive free columns).
inline Vector bounded_least_squares(const Matrix& a, const Vector& b, Index n_nonneg) {
  const Index nv = a.cols();
  Vector v = Vector::Zero(nv);
  if (nv == 0) return v;
  std::vector<bool> passive(static_cast<std::size_t>(nv), false);
  for (Index j = n_nonneg; j < nv; ++j) passive[static_cast<std::size_t>(j)] = true;

  auto solve_passive = [&](Vector& s) {
    std::vector<Index> cols;
    for (Index j = 0; j < nv; ++j)
      if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
    s = Vector::Zero(nv);
    if (cols.empty()) return;
    Matrix sub(a.rows(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Index>(k)) = a.col(cols[k]);
    const Vector coef = sub.completeOrthogonalDecomposition().solve(b);
    for (std::size_t k = 0; k < cols.size(); ++k) s[cols[k]] = coef[static_cast<Index>(k)];
  };

  solve_passive(v);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff() * std::max(1.0, inf_norm(b)));
  for (int outer = 0; outer < 3 * static_cast<int>(nv) + 10; ++outer) {
    const Vector w = a.transpose() * (b - a * v);
    Index enter = -1;
    double best = 1e-12 * scale;
    for (Index j = 0; j < n_nonneg; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best) {
        best = w[j];
        enter = j;
      }
    }
    if (enter < 0) break;
    passive[static_cast<std::size_t>(enter)] = true;
    for (int inner = 0; inner < static_cast<int>(nv) + 5; ++inner) {
      Vector s;
      solve_passive(s);
      bool ok = true;
      for (Index j = 0; j < n_nonneg; ++j)
        if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0) ok = false;
      if (ok) {
        v = s;
        break;
      }
      double step = 1.0;
      for (Index j = 0; j < n_nonneg; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0) {
          const double denom = v[j] - s[j];
          if (denom > 0.0) step = std::min(step, v[j] / denom);
        }
      }
      v += step * (s - v);
      for (Index j = 0; j < n_nonneg; ++j) {
        if (passive[static_cast<std::size_t>(j)] && v[j] <= 1e-14) {
          passive[static_cast<std::size_t>(j)] = false;
          v[j] = 0.0;
        }
      }
    }
  }
  return v;
}

inline Index numerical_rank(const Matrix& rows) {
  if (rows.rows() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(rows);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  const double thr = 1e-10 * sv[0];
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > thr) ++rank;
  return rank;
}

inline Matrix unit_rows(const IndexSet& idx, Index n) {
  Matrix e = Matrix::Zero(static_cast<Index>(idx.size()), n);
  for (std::size_t k = 0; k < idx.size(); ++k) e(static_cast<Index>(k), idx[k]) = 1.0;
  return e;
}

inline Matrix select_rows(const Matrix& m, const IndexSet& idx) {
  Matrix out(static_cast<Index>(idx.size()), m.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Index>(k)) = m.row(idx[k]);
  return out;
}

inline Matrix vstack(std::initializer_list<Matrix> blocks, Index cols) {
  Index rows = 0;
  for (const auto& b : blocks) rows += b.rows();
  Matrix out(rows, cols);
  Index r = 0;
  for (const auto& b : blocks) {
    if (b.rows() == 0) continue;
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

}  // namespace stationarity_detail

/// Residual of the S-stationarity system for the given multipliers; zero iff
/// grad L vanishes off the zero set, h = 0, and (g, lambda) are complementary.
inline double s_residual(const SparseProblem& problem, const Vector& x, const Vector& lambda, const Vector& mu,
                         double tau0) {
  const Vector grad_l = sp_lagrangian_gradient(problem, x, lambda, mu);
  const double stat = inf_norm(stationarity_detail::support_residuals(problem, x, grad_l, tau0));
  return std::max(stat, stationarity_detail::feasibility_residual(problem.g(x), problem.h(x), lambda));
}

struct MultiplierFit {
  double residual = 0.0;
  Vector lambda;
  Vector mu;
};

/// Fits (lambda >= 0 on active g, mu free) minimizing the off-zero-set part of
/// grad L in the least-squares sense and reports the S-residual there.
inline MultiplierFit best_multiplier_residual(const SparseProblem& problem, const Vector& x, double tau0) {
  using namespace stationarity_detail;
  const Index n = problem.n;
  const Vector gf = problem.grad_f(x);
  const Vector g = problem.g(x);
  const IndexSet active = active_inequalities(g);
  const Matrix jg = problem.jac_g(x);
  const Matrix jh = problem.jac_h(x);
  const std::vector<bool> in_ball = problem.ball_mask();

  // Rows: coordinates outside the zero set that carry a two-sided condition.
  // Columns: lambda (active), implicit bound multipliers, then mu (free).
  IndexSet rows;
  IndexSet upper_cols, lower_cols;
  for (Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (in_ball[k]) continue;
    if (problem.is_sparse(i) && std::abs(x[i]) <= tau0) continue;
    rows.push_back(i);
    if (x[i] >= problem.upper[i] - kActiveTol) upper_cols.push_back(i);
    if (!problem.is_sparse(i) && x[i] <= problem.lower[i] + kActiveTol) lower_cols.push_back(i);
  }
  const Index na = static_cast<Index>(active.size());
  const Index nu = static_cast<Index>(upper_cols.size());
  const Index nl = static_cast<Index>(lower_cols.size());
  const Index np = problem.p();
  Matrix a = Matrix::Zero(static_cast<Index>(rows.size()), na + nu + nl + np);
  Vector b(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index i = rows[r];
    const auto ri = static_cast<Index>(r);
    b[ri] = -gf[i];
    for (Index c = 0; c < na; ++c) a(ri, c) = jg(active[static_cast<std::size_t>(c)], i);
    for (Index c = 0; c < nu; ++c)
      if (upper_cols[static_cast<std::size_t>(c)] == i) a(ri, na + c) = 1.0;
    for (Index c = 0; c < nl; ++c)
      if (lower_cols[static_cast<std::size_t>(c)] == i) a(ri, na + nu + c) = -1.0;
    for (Index c = 0; c < np; ++c) a(ri, na + nu + nl + c) = jh(c, i);
  }
  const Vector v = bounded_least_squares(a, b, na + nu + nl);

  MultiplierFit fit;
  fit.lambda = Vector::Zero(problem.m());
  for (Index c = 0; c < na; ++c) fit.lambda[active[static_cast<std::size_t>(c)]] = v[c];
  fit.mu = v.tail(np);
  fit.residual = s_residual(problem, x, fit.lambda, fit.mu, tau0);
  return fit;
}

/// Indices where both x and y vanish.
inline IndexSet biactive(const Vector& x, const Vector& y, double tau0) {
  IndexSet out;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) <= tau0 && std::abs(y[i]) <= tau0) out.push_back(i);
  return out;
}

/// Stacked gradients of active g, all h, and unit vectors on the zero set.
inline Matrix sp_constraint_rows(const SparseProblem& problem, const Vector& x, double tau0) {
  using namespace stationarity_detail;
  const IndexSet active = active_inequalities(problem.g(x));
  return vstack({select_rows(problem.jac_g(x), active), problem.jac_h(x),
                 unit_rows(sparse_zero_set(problem, x, tau0), problem.n)},
                problem.n);
}

inline bool check_sp_licq(const SparseProblem& problem, const Vector& x, double tau0) {
  const Matrix rows = sp_constraint_rows(problem, x, tau0);
  if (rows.rows() == 0) return true;
  if (rows.rows() > problem.n) return false;
  return stationarity_detail::numerical_rank(rows) == rows.rows();
}

enum class CqStatus { Holds, Fails, Indeterminate };

inline const char* to_string(CqStatus s) {
  switch (s) {
    case CqStatus::Holds: return "holds";
    case CqStatus::Fails: return "fails";
    case CqStatus::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

/// Positive linear independence of the sparse constraint gradients: the
/// equality-type rows must be independent and some direction d with d = 0 on
/// the zero set, grad h^T d = 0 must make every active g strictly decrease.
inline CqStatus check_sp_mfcq(const SparseProblem& problem, const Vector& x, double tau0) {
  using namespace stationarity_detail;
  const Index n = problem.n;
  const IndexSet zeros = sparse_zero_set(problem, x, tau0);
  const Matrix jh = problem.jac_h(x);
  const Matrix eq_rows = vstack({jh, unit_rows(zeros, n)}, n);
  if (eq_rows.rows() > 0 && (eq_rows.rows() > n || numerical_rank(eq_rows) < eq_rows.rows()))
    return CqStatus::Fails;

  const IndexSet active = active_inequalities(problem.g(x));
  if (active.empty()) return CqStatus::Holds;
  const Matrix jg = select_rows(problem.jac_g(x), active);

  // Free coordinates of d (those not pinned to zero).
  std::vector<bool> pinned(static_cast<std::size_t>(n), false);
  for (Index i : zeros) pinned[static_cast<std::size_t>(i)] = true;
  IndexSet free;
  for (Index i = 0; i < n; ++i)
    if (!pinned[static_cast<std::size_t>(i)]) free.push_back(i);
  const Index nf = static_cast<Index>(free.size());
  if (nf == 0) return CqStatus::Fails;

  // Variables: p (nf), q (nf), t;  d = p - q;  maximize t.
  const Index nv = 2 * nf + 1;
  Vector c = Vector::Zero(nv);
  c[nv - 1] = -1.0;
  const Index na = static_cast<Index>(active.size());
  Matrix a_ub = Matrix::Zero(na + 2 * nf + 1, nv);
  Vector b_ub = Vector::Zero(na + 2 * nf + 1);
  for (Index r = 0; r < na; ++r) {
    for (Index k = 0; k < nf; ++k) {
      a_ub(r, k) = jg(r, free[static_cast<std::size_t>(k)]);
      a_ub(r, nf + k) = -jg(r, free[static_cast<std::size_t>(k)]);
    }
    a_ub(r, nv - 1) = 1.0;
  }
  for (Index k = 0; k < 2 * nf + 1; ++k) {
    a_ub(na + k, k) = 1.0;
    b_ub[na + k] = 1.0;
  }
  Matrix a_eq = Matrix::Zero(jh.rows(), nv);
  for (Index r = 0; r < jh.rows(); ++r) {
    for (Index k = 0; k < nf; ++k) {
      a_eq(r, k) = jh(r, free[static_cast<std::size_t>(k)]);
      a_eq(r, nf + k) = -jh(r, free[static_cast<std::size_t>(k)]);
    }
  }
  const LpResult lp = lp_minimize(c, a_ub, b_ub, a_eq, Vector::Zero(jh.rows()));
  if (lp.status != LpStatus::Optimal) return CqStatus::Indeterminate;
  return -lp.value > 1e-10 ? CqStatus::Holds : CqStatus::Fails;
}

enum class SoscStatus { Holds, Fails, Inconclusive };

inline const char* to_string(SoscStatus s) {
  switch (s) {
    case SoscStatus::Holds: return "holds";
    case SoscStatus::Fails: return "fails";
    case SoscStatus::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct SoscReport {
  SoscStatus status = SoscStatus::Inconclusive;
  double min_curvature = 0.0;  // min eigenvalue of the reduced Hessian
  Index cone_dimension = 0;
  bool weakly_active = false;
};

/// Second-order sufficiency over the sparse critical cone, pinned on the zero
/// set. Requires an S-stationary point (s_residual <= 1e-6).
inline SoscReport check_sp_sosc(const SparseProblem& problem, const Vector& x, const Vector& lambda,
                                const Vector& mu, double tau0, std::uint64_t seed = 0) {
  using namespace stationarity_detail;
  if (s_residual(problem, x, lambda, mu, tau0) > 1e-6)
    throw PreconditionError("check_sp_sosc: point is not S-stationary for these multipliers");
  const Index n = problem.n;
  const IndexSet active = active_inequalities(problem.g(x));
  IndexSet strong, weak;
  for (Index i : active) (lambda[i] > 1e-8 ? strong : weak).push_back(i);
  const Matrix jg = problem.jac_g(x);
  const Matrix rows = vstack({problem.jac_h(x), select_rows(jg, strong),
                              unit_rows(sparse_zero_set(problem, x, tau0), n)},
                             n);
  Matrix basis;
  if (rows.rows() == 0) {
    basis = Matrix::Identity(n, n);
  } else {
    Eigen::JacobiSVD<Matrix> svd(rows, Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double thr = sv.size() > 0 && sv[0] > 0.0 ? 1e-10 * sv[0] : 0.0;
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
      if (sv[i] > thr) ++rank;
    basis = svd.matrixV().rightCols(n - rank);
  }
  SoscReport rep;
  rep.cone_dimension = basis.cols();
  rep.weakly_active = !weak.empty();
  if (basis.cols() == 0) {
    rep.status = SoscStatus::Holds;
    rep.min_curvature = kInf;
    return rep;
  }
  const Matrix hess = sp_lagrangian(problem, x, lambda, mu, true).hessian;
  const Matrix reduced = basis.transpose() * hess * basis;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (reduced + reduced.transpose()));
  rep.min_curvature = eig.eigenvalues()[0];
  constexpr double kCurv = 1e-10;
  if (rep.min_curvature > kCurv) {
    rep.status = SoscStatus::Holds;  // positive on the subspace, hence on the cone
    return rep;
  }
  if (weak.empty()) {
    rep.status = rep.min_curvature < -kCurv ? SoscStatus::Fails : SoscStatus::Inconclusive;
    return rep;
  }
  // Polyhedral cone: search for a cone direction with negative curvature.
  const Matrix jw = select_rows(jg, weak);
  auto in_cone = [&](const Vector& d) { return (jw * d).maxCoeff() <= 1e-12 * std::max(1.0, d.norm()); };
  auto negative = [&](const Vector& d) { return d.dot(hess * d) < -kCurv * d.squaredNorm(); };
  const Vector lowest = basis * eig.eigenvectors().col(0);
  for (const Vector& d : {Vector(lowest), Vector(-lowest)})
    if (in_cone(d) && negative(d)) {
      rep.status = SoscStatus::Fails;
      return rep;
    }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 1000; ++trial) {
    Vector w(basis.cols());
    for (Index k = 0; k < w.size(); ++k) w[k] = normal(rng);
    Vector d = basis * w;
    if (!in_cone(d)) d = -d;
    if (in_cone(d) && negative(d)) {
      rep.status = SoscStatus::Fails;
      return rep;
    }
  }
  rep.status = SoscStatus::Inconclusive;
  return rep;
}

struct SequencePoint {
  Vector x;
  Vector lambda;
  Vector mu;
};

struct AsTrace {
  std::vector<double> residuals;
  bool consistent = false;
};

/// Approximate S-stationarity residual along a sequence. The zero set is taken
/// at the limit point (the last iterate unless `limit` is given).
inline AsTrace as_trace(const SparseProblem& problem, const std::vector<SequencePoint>& seq, double tau0,
                        double tol = 1e-3, const Vector* limit = nullptr) {
  if (seq.empty()) throw PreconditionError("as_trace: empty sequence");
  const Vector x_lim = limit ? *limit : seq.back().x;
  const IndexSet zeros = sparse_zero_set(problem, x_lim, tau0);
  std::vector<bool> pinned(static_cast<std::size_t>(problem.n), false);
  for (Index i : zeros) pinned[static_cast<std::size_t>(i)] = true;

  AsTrace out;
  for (const auto& pt : seq) {
    const Vector lambda = pt.lambda.size() == problem.m() ? pt.lambda : Vector::Zero(problem.m());
    const Vector mu = pt.mu.size() == problem.p() ? pt.mu : Vector::Zero(problem.p());
    const Vector grad_l = sp_lagrangian_gradient(problem, pt.x, lambda, mu);
    double r = 0.0;
    for (Index i = 0; i < problem.n; ++i)
      if (!pinned[static_cast<std::size_t>(i)]) r = std::max(r, std::abs(grad_l[i]));
    const Vector g = problem.g(pt.x);
    for (Index i = 0; i < g.size(); ++i) r = std::max(r, std::abs(std::min(-g[i], lambda[i])));
    r = std::max(r, inf_norm(problem.h(pt.x)));
    r = std::max(r, inf_norm(pt.x - x_lim));
    out.residuals.push_back(r);
  }
  out.consistent = out.residuals.back() <= tol;
  return out;
}

/// KKT residual of the complementarity reformulation at (x, y) built from the
/// explicit multiplier construction: gamma_i = -dL/dx_i / y_i on the zero set
/// and gamma_i = -p_i'(y_i) / x_i elsewhere (multipliers of x_i y_i = 0).
inline double reformulation_kkt_residual(const SparseProblem& problem, const PenaltySpec& penalty,
                                         const Vector& x, const Vector& y, const Vector& lambda,
                                         const Vector& mu, double tau0) {
  const IndexSet idx = problem.sparse_indices();
  const PenaltySpec spec = penalty.with_dimension(static_cast<Index>(idx.size()));
  const Vector grad_l = sp_lagrangian_gradient(problem, x, lambda, mu);
  const Vector grad_p = penalty_gradient(spec, y);

  Vector x_row = grad_l;
  Vector y_row = grad_p;
  double comp = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Index i = idx[k];
    const auto ki = static_cast<Index>(k);
    double gamma = 0.0;
    if (std::abs(x[i]) <= tau0) {
      if (y[ki] > 0.0) gamma = -grad_l[i] / y[ki];
    } else {
      gamma = -grad_p[ki] / x[i];
    }
    x_row[i] += gamma * y[ki];
    y_row[ki] += gamma * x[i];
    comp = std::max(comp, std::abs(x[i] * y[ki]));
  }
  // Non-sparse coordinates: bound-aware residual as for S-stationarity.
  double r = 0.0;
  const Vector support_r = stationarity_detail::support_residuals(problem, x, grad_l, tau0);
  for (Index i = 0; i < problem.n; ++i) {
    if (!problem.is_sparse(i)) {
      r = std::max(r, support_r[i]);
    } else if (x[i] >= problem.upper[i] - kActiveTol) {
      r = std::max(r, std::max(0.0, x_row[i]));  // active upper bound absorbs the negative part
    } else {
      r = std::max(r, std::abs(x_row[i]));
    }
  }
  r = std::max(r, inf_norm(y_row));
  r = std::max(r, comp);
  return std::max(r, stationarity_detail::feasibility_residual(problem.g(x), problem.h(x), lambda));
}

}  // namespace spars0
