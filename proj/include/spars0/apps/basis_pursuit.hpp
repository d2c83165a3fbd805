#pragma once

// Nonnegative basis pursuit denoising: min ||x||_0 s.t. ||Ax - b||^2 <= eps, x >= 0.

#include "spars0/problem.hpp"

#include <random>

namespace spars0::apps {

struct BasisPursuitInstance {
  std::string name = "basis_pursuit";
  Matrix A;
  Vector b;
  double eps_ball = 0.0;
  Vector true_signal;
  Vector noise;
};

inline BasisPursuitInstance gen_basis_pursuit(Index m, Index n, Index k, double noise_sigma, double delta_slack,
                                              std::uint64_t seed) {
  if (k < 0 || k > n) throw PreconditionError("gen_basis_pursuit: need 0 <= k <= n");
  if (!(delta_slack > 0.0)) throw PreconditionError("gen_basis_pursuit: slack must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  BasisPursuitInstance inst;
  inst.name = "bp_" + std::to_string(m) + "x" + std::to_string(n) + "_k" + std::to_string(k) + "_s" +
              std::to_string(seed);
  inst.A.resize(m, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) inst.A(i, j) = scale * normal(rng);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  inst.true_signal = Vector::Zero(n);
  for (Index i = 0; i < k; ++i) inst.true_signal[perm[static_cast<std::size_t>(i)]] = unif(rng);
  inst.noise.resize(m);
  for (Index i = 0; i < m; ++i) inst.noise[i] = noise_sigma * normal(rng);
  inst.b = inst.A * inst.true_signal + inst.noise;
  inst.eps_ball = inst.noise.squaredNorm() * (1.0 + delta_slack);
  if (!(inst.eps_ball > 0.0)) inst.eps_ball = delta_slack;  // noiseless draw: keep a strict interior
  return inst;
}

inline SparseProblem build_basis_pursuit(const BasisPursuitInstance& inst, double rho = 1.0) {
  const Index n = inst.A.cols();
  if (inst.b.size() != inst.A.rows()) throw PreconditionError("basis pursuit: A and b disagree");
  if (!(inst.eps_ball > 0.0)) throw PreconditionError("basis pursuit: eps must be positive");
  SparseProblem p = make_problem(inst.name, n, rho, [](const Vector& x, Vector* grad) {
    if (grad) grad->setZero(x.size());
    return 0.0;
  });
  const Matrix a = inst.A;
  const Vector b = inst.b;
  const double eps = inst.eps_ball;
  p.ineq.count = 1;
  p.ineq.evaluate = [a, b, eps](const Vector& x, Vector& v, Matrix* jac) {
    const Vector r = a * x - b;
    v.resize(1);
    v[0] = r.squaredNorm() - eps;
    if (jac) *jac = 2.0 * (a.transpose() * r).transpose();
  };
  return p;
}

}  // namespace spars0::apps
