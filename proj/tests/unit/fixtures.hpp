#pragma once

#include "spars0/qcqp.hpp"

#include <cmath>

namespace spars0::testing {

// (x - 2)^2 over x >= 0
inline SparseProblem shifted_square(double rho = 1.0) {
  return make_problem("shifted_square", 1, rho, [](const Vector& x, Vector* g) {
    if (g) *g = Vector::Constant(1, 2.0 * (x[0] - 2.0));
    return (x[0] - 2.0) * (x[0] - 2.0);
  });
}

// (x1 - 2)^2 + (x2 - 0.5)^2 over x >= 0
inline SparseProblem two_targets(double rho = 1.0) {
  return make_problem("two_targets", 2, rho, [](const Vector& x, Vector* g) {
    const Vector c = (Vector(2) << 2.0, 0.5).finished();
    if (g) *g = 2.0 * (x - c);
    return (x - c).squaredNorm();
  });
}

// f = -x over x >= 0; Pen(alpha) has the stationary family (1/alpha)(sqrt 2 - 1/alpha, 1).
inline SparseProblem linear_descent() {
  return make_problem("linear_descent", 1, 1.0, [](const Vector& x, Vector* g) {
    if (g) *g = Vector::Constant(1, -1.0);
    return -x[0];
  });
}

// sum(x) with ||x||^2 <= 1, x >= 0; the origin is the only AS-stationary point.
inline SparseProblem ball_linear(Index n = 3) {
  QcqpSpec s;
  s.name = "ball_linear";
  s.n = n;
  s.objective.q = Vector::Ones(n);
  QuadraticForm ball;
  ball.P = 2.0 * Matrix::Identity(n, n);
  ball.c = -1.0;
  s.ineq.push_back(ball);
  return build_qcqp(s);
}

// f = x1 with h = 1/2 ||x - e||^2 = 0; feasible set is {e}, grad h vanishes there.
inline SparseProblem degenerate_equality(Index n = 3) {
  QcqpSpec s;
  s.name = "degenerate_equality";
  s.n = n;
  s.objective.q = Vector::Unit(n, 0);
  QuadraticForm h;
  h.P = Matrix::Identity(n, n);
  h.q = -Vector::Ones(n);
  h.c = 0.5 * static_cast<double>(n);
  s.eq.push_back(h);
  return build_qcqp(s);
}

// x^T Q x with e^T x = 1, mean^T x >= s, 0 <= x <= u; Q = I, mean = (1, 2), s = 1.5.
inline SparseProblem portfolio_toy(double rho = 0.1) {
  QcqpSpec s;
  s.name = "portfolio_toy";
  s.n = 2;
  s.rho = rho;
  s.objective.P = 2.0 * Matrix::Identity(2, 2);
  QuadraticForm ret;
  ret.q = (Vector(2) << -1.0, -2.0).finished();
  ret.c = 1.5;
  s.ineq.push_back(ret);
  QuadraticForm budget;
  budget.q = Vector::Ones(2);
  budget.c = -1.0;
  s.eq.push_back(budget);
  s.upper = Vector::Ones(2);
  return build_qcqp(s);
}

}  // namespace spars0::testing
