#pragma once

#include "spars0/penalty.hpp"
#include "spars0/types.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace spars0 {

/// A block of smooth constraints c(x) with dense Jacobian.
struct ConstraintBlock {
  Index count = 0;
  /// Writes c(x) into `value`; fills `jacobian` (count x n) when non-null.
  std::function<void(const Vector& x, Vector& value, Matrix* jacobian)> evaluate;

  Vector value(const Vector& x) const {
    Vector v(count);
    if (count > 0) evaluate(x, v, nullptr);
    return v;
  }
  Matrix jacobian(const Vector& x) const {
    Vector v(count);
    Matrix jac(count, x.size());
    if (count > 0) evaluate(x, v, &jac);
    return jac;
  }
};

/// `count` consecutive vectors of length `dim` starting at `offset`, each
/// constrained to the Euclidean ball of the given radius.
struct BallBlock {
  Index offset = 0;
  Index count = 0;
  Index dim = 0;
  double radius = 1.0;
};

/// min f(x) + rho * ||x_S||_0  s.t. g(x) <= 0, h(x) = 0, lower <= x <= upper,
/// where S is the sparse mask. Sparse coordinates always have lower bound 0.
struct SparseProblem {
  std::string name;
  Index n = 0;
  double rho = 1.0;
  std::function<double(const Vector& x, Vector* grad)> objective;
  ConstraintBlock ineq;
  ConstraintBlock eq;
  Vector lower;
  Vector upper;
  std::vector<bool> sparse_mask;
  std::vector<BallBlock> balls;

  Index m() const { return ineq.count; }
  Index p() const { return eq.count; }

  double f(const Vector& x) const { return objective(x, nullptr); }
  Vector grad_f(const Vector& x) const {
    Vector g(n);
    objective(x, &g);
    return g;
  }
  Vector g(const Vector& x) const { return ineq.value(x); }
  Vector h(const Vector& x) const { return eq.value(x); }
  Matrix jac_g(const Vector& x) const { return ineq.jacobian(x); }
  Matrix jac_h(const Vector& x) const { return eq.jacobian(x); }

  bool is_sparse(Index i) const { return sparse_mask[static_cast<std::size_t>(i)]; }

  IndexSet sparse_indices() const {
    IndexSet out;
    for (Index i = 0; i < n; ++i)
      if (is_sparse(i)) out.push_back(i);
    return out;
  }

  /// Coordinates governed by a ball block instead of box bounds.
  std::vector<bool> ball_mask() const {
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    for (const auto& b : balls)
      for (Index k = 0; k < b.count * b.dim; ++k) mask[static_cast<std::size_t>(b.offset + k)] = true;
    return mask;
  }

  /// Projection onto the box and the ball blocks.
  Vector project(const Vector& x) const {
    Vector out = x.cwiseMax(lower).cwiseMin(upper);
    for (const auto& b : balls) {
      for (Index r = 0; r < b.count; ++r) {
        auto row = out.segment(b.offset + r * b.dim, b.dim);
        const double norm = row.norm();
        if (norm > b.radius) row *= b.radius / norm;
      }
    }
    return out;
  }

  /// With `nonneg_sparse`, sparse coordinates must have lower bound exactly 0
  /// (the penalty method's setting); otherwise 0 must merely lie in the box.
  void validate(bool nonneg_sparse = true) const {
    if (n <= 0) throw PreconditionError("problem '" + name + "': dimension must be positive");
    if (!objective) throw PreconditionError("problem '" + name + "': missing objective");
    if (lower.size() != n || upper.size() != n || static_cast<Index>(sparse_mask.size()) != n)
      throw PreconditionError("problem '" + name + "': bounds or mask have wrong size");
    if (!(rho > 0.0)) throw PreconditionError("problem '" + name + "': rho must be positive");
    if ((ineq.count > 0 && !ineq.evaluate) || (eq.count > 0 && !eq.evaluate))
      throw PreconditionError("problem '" + name + "': constraint block without evaluator");
    for (Index i = 0; i < n; ++i) {
      if (lower[i] > upper[i]) throw PreconditionError("problem '" + name + "': lower > upper");
      if (is_sparse(i) && nonneg_sparse && lower[i] != 0.0)
        throw PreconditionError("problem '" + name + "': sparse coordinates need lower bound 0");
      if (is_sparse(i) && (lower[i] > 0.0 || upper[i] < 0.0))
        throw PreconditionError("problem '" + name + "': sparse coordinates must admit 0");
    }
  }
};

/// Problem over x >= 0 with every coordinate sparse and no constraints.
inline SparseProblem make_problem(std::string name, Index n, double rho,
                                  std::function<double(const Vector&, Vector*)> objective) {
  SparseProblem p;
  p.name = std::move(name);
  p.n = n;
  p.rho = rho;
  p.objective = std::move(objective);
  p.lower = Vector::Zero(n);
  p.upper = Vector::Constant(n, kInf);
  p.sparse_mask.assign(static_cast<std::size_t>(n), true);
  return p;
}

inline IndexSet zero_set(const Vector& x, double tau0) {
  IndexSet out;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) <= tau0) out.push_back(i);
  return out;
}

/// Zero set restricted to the sparse coordinates of the problem.
inline IndexSet sparse_zero_set(const SparseProblem& problem, const Vector& x, double tau0) {
  IndexSet out;
  for (Index i = 0; i < problem.n; ++i)
    if (problem.is_sparse(i) && std::abs(x[i]) <= tau0) out.push_back(i);
  return out;
}

inline IndexSet active_inequalities(const Vector& g, double tau_g = kActiveTol) {
  IndexSet out;
  for (Index i = 0; i < g.size(); ++i)
    if (g[i] >= -tau_g) out.push_back(i);
  return out;
}

inline IndexSet support(const SparseProblem& problem, const Vector& x, double tau0) {
  IndexSet out;
  for (Index i = 0; i < problem.n; ++i)
    if (problem.is_sparse(i) && std::abs(x[i]) > tau0) out.push_back(i);
  return out;
}

inline double l0_objective(const SparseProblem& problem, const Vector& x, double tau0) {
  return problem.f(x) + problem.rho * static_cast<double>(support(problem, x, tau0).size());
}

inline double l0_objective(const SparseProblem& problem, const Vector& x) {
  return l0_objective(problem, x, default_zero_tol(x));
}

/// Canonical auxiliary vector: s on the zero set of x, 0 elsewhere.
inline Vector y_star(const Vector& x, const PenaltySpec& penalty, double tau0) {
  const double s = component_minimizer(penalty);
  Vector y(x.size());
  for (Index i = 0; i < x.size(); ++i) y[i] = std::abs(x[i]) <= tau0 ? s : 0.0;
  return y;
}

/// y* over the sparse coordinates of the problem only.
inline Vector y_star(const SparseProblem& problem, const PenaltySpec& penalty, const Vector& x,
                     double tau0) {
  const IndexSet idx = problem.sparse_indices();
  Vector xs(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) xs[static_cast<Index>(k)] = x[idx[k]];
  return y_star(xs, penalty, tau0);
}

struct ReformulationGap {
  double lhs = 0.0;  // rho * ||x||_0
  double rhs = 0.0;  // p(y) - M
  bool tight = false;
};

/// Compares rho*||x||_0 with p(y) - M at a complementary pair (x, y).
inline ReformulationGap reformulation_gap(double rho, const PenaltySpec& penalty, const Vector& x,
                                          const Vector& y, double tau0 = 1e-6) {
  if (x.size() != y.size()) throw PreconditionError("reformulation_gap: size mismatch");
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i] * y[i]) > 1e-8)
      throw PreconditionError("reformulation_gap: x and y are not complementary");
  const PenaltySpec spec = penalty.with_dimension(y.size());
  ReformulationGap gap;
  Index nnz = 0;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > tau0) ++nnz;
  gap.lhs = rho * static_cast<double>(nnz);
  gap.rhs = penalty_value(spec, y) - penalty_minimizer(spec).M;
  gap.tight = std::abs(gap.lhs - gap.rhs) <= 1e-10;
  if (gap.lhs > gap.rhs + 1e-10)
    throw std::logic_error("reformulation_gap: lower bound violated (penalty axioms broken?)");
  return gap;
}

/// Pen(alpha): f(x) + p(y) + alpha * x_S^T y over the constraints of the base
/// problem plus y >= 0. y lives on the sparse coordinates S only.
struct PenalizedSubproblem {
  SparseProblem base;
  PenaltySpec penalty;
  double alpha = 1.0;
  IndexSet sparse_index;

  Index ny() const { return static_cast<Index>(sparse_index.size()); }

  /// y placed on the sparse coordinates of an n-vector.
  Vector scatter(const Vector& y) const {
    Vector out = Vector::Zero(base.n);
    for (std::size_t k = 0; k < sparse_index.size(); ++k) out[sparse_index[k]] = y[static_cast<Index>(k)];
    return out;
  }
  Vector gather(const Vector& x) const {
    Vector out(ny());
    for (std::size_t k = 0; k < sparse_index.size(); ++k) out[static_cast<Index>(k)] = x[sparse_index[k]];
    return out;
  }

  double complementarity(const Vector& x, const Vector& y) const { return gather(x).dot(y); }

  double value(const Vector& x, const Vector& y) const {
    return base.f(x) + penalty_value(penalty, y) + alpha * complementarity(x, y);
  }

  /// Gradient blocks (grad f + alpha*y, grad p + alpha*x_S).
  double value_gradient(const Vector& x, const Vector& y, Vector& gx, Vector& gy) const {
    gx.resize(base.n);
    const double fx = base.objective(x, &gx);
    gx += alpha * scatter(y);
    gy = penalty_gradient(penalty, y) + alpha * gather(x);
    return fx + penalty_value(penalty, y) + alpha * complementarity(x, y);
  }
};

inline PenalizedSubproblem build_penalized(const SparseProblem& problem, const PenaltySpec& penalty,
                                           double alpha) {
  if (!(alpha > 0.0)) throw PreconditionError("build_penalized: alpha must be positive");
  PenalizedSubproblem sub;
  sub.base = problem;
  sub.sparse_index = problem.sparse_indices();
  sub.penalty = penalty.with_dimension(static_cast<Index>(sub.sparse_index.size()));
  sub.alpha = alpha;
  return sub;
}

/// Maps a split point (a+, a-) back to a = a+ - a- and collapses representatives.
struct SplitMap {
  Index original_n = 0;
  std::vector<Index> plus;   // position of a_i (or a_i+) in the split vector
  std::vector<Index> minus;  // position of a_i-, or -1 when coordinate i was not free

  Vector reconstruct(const Vector& split) const {
    Vector a(original_n);
    for (Index i = 0; i < original_n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      a[i] = split[plus[k]] - (minus[k] >= 0 ? split[minus[k]] : 0.0);
    }
    return a;
  }

  /// Subtracts min(a+, a-) from both halves so at most one is nonzero.
  Vector shrink(const Vector& split) const {
    Vector out = split;
    for (Index i = 0; i < original_n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (minus[k] < 0) continue;
      const double common = std::min(out[plus[k]], out[minus[k]]);
      if (common > 0.0) {
        out[plus[k]] -= common;
        out[minus[k]] -= common;
      }
    }
    return out;
  }
};

struct SplitProblem {
  SparseProblem problem;
  SplitMap map;
};

/// Rewrites every coordinate with a negative lower bound as a = a+ - a- with
/// a+ in [0, upper], a- in [0, -lower]. The sparse mask carries over to both
/// halves. Ball blocks are not supported on free coordinates.
inline SplitProblem split_free_variables(const SparseProblem& original) {
  SplitMap map;
  map.original_n = original.n;
  map.plus.resize(static_cast<std::size_t>(original.n));
  map.minus.assign(static_cast<std::size_t>(original.n), -1);
  if (!original.balls.empty()) throw PreconditionError("split_free_variables: ball blocks unsupported");

  std::vector<double> lo, hi;
  std::vector<bool> mask;
  for (Index i = 0; i < original.n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    map.plus[k] = static_cast<Index>(lo.size());
    if (original.lower[i] < 0.0) {
      lo.push_back(0.0);
      hi.push_back(std::max(0.0, original.upper[i]));
      mask.push_back(original.sparse_mask[k]);
      map.minus[k] = static_cast<Index>(lo.size());
      lo.push_back(0.0);
      hi.push_back(-original.lower[i]);
      mask.push_back(original.sparse_mask[k]);
    } else {
      lo.push_back(original.lower[i]);
      hi.push_back(original.upper[i]);
      mask.push_back(original.sparse_mask[k]);
    }
  }

  SparseProblem split;
  split.name = original.name + "/split";
  split.n = static_cast<Index>(lo.size());
  split.rho = original.rho;
  split.lower = Eigen::Map<Vector>(lo.data(), split.n);
  split.upper = Eigen::Map<Vector>(hi.data(), split.n);
  split.sparse_mask = mask;

  // Chain rule through a = T z with T having entries +1 / -1.
  auto pull_back = [map](const Vector& g_orig, Index split_n) {
    Vector g = Vector::Zero(split_n);
    for (Index i = 0; i < map.original_n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      g[map.plus[k]] += g_orig[i];
      if (map.minus[k] >= 0) g[map.minus[k]] -= g_orig[i];
    }
    return g;
  };
  auto pull_back_rows = [map](const Matrix& j_orig, Index split_n) {
    Matrix j = Matrix::Zero(j_orig.rows(), split_n);
    for (Index i = 0; i < map.original_n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      j.col(map.plus[k]) += j_orig.col(i);
      if (map.minus[k] >= 0) j.col(map.minus[k]) -= j_orig.col(i);
    }
    return j;
  };

  const Index split_n = split.n;
  auto objective = original.objective;
  split.objective = [objective, map, pull_back, split_n](const Vector& z, Vector* grad) {
    const Vector a = map.reconstruct(z);
    if (!grad) return objective(a, nullptr);
    Vector ga(map.original_n);
    const double v = objective(a, &ga);
    *grad = pull_back(ga, split_n);
    return v;
  };
  auto wrap_block = [&](const ConstraintBlock& block) {
    ConstraintBlock out;
    out.count = block.count;
    if (block.count == 0) return out;
    auto eval = block.evaluate;
    const Index orig_n = original.n;
    out.evaluate = [eval, map, pull_back_rows, split_n, orig_n](const Vector& z, Vector& value, Matrix* jac) {
      const Vector a = map.reconstruct(z);
      if (!jac) {
        eval(a, value, nullptr);
        return;
      }
      Matrix ja(value.size(), orig_n);
      eval(a, value, &ja);
      *jac = pull_back_rows(ja, split_n);
    };
    return out;
  };
  split.ineq = wrap_block(original.ineq);
  split.eq = wrap_block(original.eq);
  return {std::move(split), std::move(map)};
}

}  // namespace spars0
