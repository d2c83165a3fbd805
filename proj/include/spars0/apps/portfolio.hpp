#pragma once

// Sparse portfolio selection: min x^T Q x + rho ||x||_0 subject to
// e^T x = 1, mean^T x >= s, 0 <= x <= u.

#include "spars0/problem.hpp"

#include <random>

namespace spars0::apps {

struct PortfolioInstance {
  std::string name = "portfolio";
  Matrix Q;
  Vector mean;
  double s = 0.0;
  Vector u;
  double rho = 1.0;
};

struct PortfolioParams {
  double factor_scale = 10.0;  // Q = factor_scale * B^T B / k + sigma I
  double sigma = 0.1;
  Index factors = 0;            // 0 means n
  double return_fraction = 0.8;
  double rho = 1.0;
};

inline double min_eigenvalue(const Matrix& q) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (q + q.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()[0];
}

/// Q_hat(alpha) = 1/2 [[2Q, alpha I], [alpha I, I]], the Hessian (up to a
/// factor) of the penalized objective with the natural quadratic penalty.
/// Positive definite exactly when alpha^2 < 2 lambda_min(Q).
inline Matrix q_hat(const Matrix& q, double alpha) {
  const Index n = q.rows();
  Matrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = 2.0 * q;
  out.topRightCorner(n, n) = alpha * Matrix::Identity(n, n);
  out.bottomLeftCorner(n, n) = alpha * Matrix::Identity(n, n);
  out.bottomRightCorner(n, n) = Matrix::Identity(n, n);
  return 0.5 * out;
}

/// alpha0 = c * sqrt(2 lambda_min(Q)); c < 1 keeps the first subproblem
/// strictly convex.
inline double recommended_alpha0(const Matrix& q, double c = 0.95) {
  return c * std::sqrt(2.0 * std::max(0.0, min_eigenvalue(q)));
}

inline bool portfolio_feasible(const PortfolioInstance& inst) {
  const Index n = inst.Q.rows();
  if (inst.u.cwiseMin(1.0).sum() < 1.0) return false;
  // Largest return with e^T x = 1 and 0 <= x <= u: fill the best assets first.
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return inst.mean[a] > inst.mean[b]; });
  double left = 1.0, best = 0.0;
  for (Index i : order) {
    const double take = std::min(left, inst.u[i]);
    best += take * inst.mean[i];
    left -= take;
    if (left <= 0.0) break;
  }
  return left <= 1e-12 && best >= inst.s;
}

inline PortfolioInstance gen_portfolio(Index n, std::uint64_t seed, const PortfolioParams& prm = {}) {
  if (n < 2) throw PreconditionError("gen_portfolio: n must be at least 2");
  const Index k = prm.factors > 0 ? prm.factors : n;
  for (std::uint64_t stream = 0;; ++stream) {
    std::mt19937_64 rng(seed * 1000003ULL + stream);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.05, 0.3);
    Matrix b(k, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < k; ++i) b(i, j) = normal(rng);
    PortfolioInstance inst;
    inst.name = "portfolio_n" + std::to_string(n) + "_s" + std::to_string(seed);
    inst.Q = prm.factor_scale / static_cast<double>(k) * (b.transpose() * b);
    inst.Q.diagonal().array() += prm.sigma;
    inst.Q = 0.5 * (inst.Q + inst.Q.transpose()).eval();
    inst.mean.resize(n);
    for (Index i = 0; i < n; ++i) inst.mean[i] = unif(rng);
    inst.s = prm.return_fraction * inst.mean.maxCoeff();
    inst.u = Vector::Ones(n);
    inst.rho = prm.rho;
    if (portfolio_feasible(inst) && min_eigenvalue(inst.Q) > 0.0) return inst;
  }
}

inline SparseProblem build_portfolio(const PortfolioInstance& inst) {
  const Index n = inst.Q.rows();
  if (inst.Q.cols() != n || inst.mean.size() != n || inst.u.size() != n)
    throw PreconditionError("portfolio: inconsistent dimensions");
  SparseProblem p = make_problem(inst.name, n, inst.rho, nullptr);
  const Matrix q = inst.Q;
  p.objective = [q](const Vector& x, Vector* grad) {
    const Vector qx = q * x;
    if (grad) *grad = 2.0 * qx;
    return x.dot(qx);
  };
  p.upper = inst.u;
  p.eq.count = 1;
  p.eq.evaluate = [](const Vector& x, Vector& v, Matrix* jac) {
    v.resize(1);
    v[0] = x.sum() - 1.0;
    if (jac) *jac = Matrix::Ones(1, x.size());
  };
  const Vector mean = inst.mean;
  const double s = inst.s;
  p.ineq.count = 1;
  p.ineq.evaluate = [mean, s](const Vector& x, Vector& v, Matrix* jac) {
    v.resize(1);
    v[0] = s - mean.dot(x);
    if (jac) *jac = -mean.transpose();
  };
  return p;
}

}  // namespace spars0::apps
