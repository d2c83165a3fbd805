#pragma once

// Dense two-phase tableau simplex with Bland's rule, sized for the small
// constraint-qualification LPs built by the stationarity diagnostics.

#include "spars0/types.hpp"

#include <vector>

namespace spars0 {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::IterationLimit;
  Vector z;
  double value = 0.0;
};

namespace lp_detail {

class Tableau {
 public:
  Tableau(Matrix t, std::vector<Index> basis) : t_(std::move(t)), basis_(std::move(basis)) {}

  Index rows() const { return t_.rows() - 1; }
  Index cols() const { return t_.cols() - 1; }
  Matrix& data() { return t_; }
  std::vector<Index>& basis() { return basis_; }

  // Minimizes the objective stored in the last row over columns [0, allowed).
  LpStatus run(Index allowed, int max_iter) {
    constexpr double kTol = 1e-11;
    for (int it = 0; it < max_iter; ++it) {
      Index enter = -1;
      for (Index j = 0; j < allowed; ++j) {
        if (t_(rows(), j) < -kTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::Optimal;
      Index leave = -1;
      double best = kInf;
      for (Index i = 0; i < rows(); ++i) {
        const double a = t_(i, enter);
        if (a > kTol) {
          const double ratio = t_(i, cols()) / a;
          if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && leave >= 0 &&
                                       basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
    }
    return LpStatus::IterationLimit;
  }

  void pivot(Index r, Index c) {
    t_.row(r) /= t_(r, c);
    for (Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double factor = t_(i, c);
      if (factor != 0.0) t_.row(i) -= factor * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

 private:
  Matrix t_;
  std::vector<Index> basis_;
};

}  // namespace lp_detail

/// Solves  min c^T z  s.t.  A_ub z <= b_ub,  A_eq z = b_eq,  z >= 0.
inline LpResult lp_minimize(const Vector& c, const Matrix& a_ub, const Vector& b_ub, const Matrix& a_eq,
                            const Vector& b_eq, int max_iter = 10000) {
  const Index nv = c.size();
  const Index mu = a_ub.rows();
  const Index me = a_eq.rows();
  const Index rows = mu + me;
  // Columns: original | slacks (mu) | artificials (rows) | rhs
  const Index n_slack = mu;
  const Index n_art = rows;
  const Index total = nv + n_slack + n_art;
  Matrix t = Matrix::Zero(rows + 1, total + 1);
  std::vector<Index> basis(static_cast<std::size_t>(rows));

  for (Index i = 0; i < rows; ++i) {
    const bool is_ub = i < mu;
    Eigen::RowVectorXd row = is_ub ? Eigen::RowVectorXd(a_ub.row(i)) : Eigen::RowVectorXd(a_eq.row(i - mu));
    double rhs = is_ub ? b_ub[i] : b_eq[i - mu];
    double slack = is_ub ? 1.0 : 0.0;
    if (rhs < 0.0) {
      row = -row;
      rhs = -rhs;
      slack = -slack;
    }
    t.block(i, 0, 1, nv) = row;
    if (is_ub) t(i, nv + i) = slack;
    t(i, nv + n_slack + i) = 1.0;
    t(i, total) = rhs;
    basis[static_cast<std::size_t>(i)] = nv + n_slack + i;
  }
  // Phase 1 objective: sum of artificials, expressed in nonbasic terms.
  for (Index i = 0; i < rows; ++i) t.row(rows) -= t.row(i);
  for (Index i = 0; i < rows; ++i) t(rows, nv + n_slack + i) = 0.0;

  lp_detail::Tableau tab(std::move(t), std::move(basis));
  LpResult out;
  LpStatus s = tab.run(total, max_iter);
  if (s == LpStatus::IterationLimit) return out;
  if (tab.data()(rows, total) < -1e-9) {
    out.status = LpStatus::Infeasible;
    return out;
  }
  // Drive remaining artificials out of the basis where possible.
  for (Index i = 0; i < rows; ++i) {
    if (tab.basis()[static_cast<std::size_t>(i)] >= nv + n_slack) {
      for (Index j = 0; j < nv + n_slack; ++j) {
        if (std::abs(tab.data()(i, j)) > 1e-9) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }
  // Phase 2 objective row.
  Matrix& d = tab.data();
  d.row(rows).setZero();
  d.block(rows, 0, 1, nv) = c.transpose();
  for (Index i = 0; i < rows; ++i) {
    const Index b = tab.basis()[static_cast<std::size_t>(i)];
    if (b < nv && c[b] != 0.0) d.row(rows) -= c[b] * d.row(i);
  }
  // Artificial columns are excluded from entering.
  s = tab.run(nv + n_slack, max_iter);
  out.status = s;
  if (s != LpStatus::Optimal) return out;
  out.z = Vector::Zero(nv);
  for (Index i = 0; i < rows; ++i) {
    const Index b = tab.basis()[static_cast<std::size_t>(i)];
    if (b < nv) out.z[b] = d(i, total);
  }
  out.value = c.dot(out.z);
  return out;
}

}  // namespace spars0
