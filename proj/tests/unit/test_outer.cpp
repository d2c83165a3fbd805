#include "fixtures.hpp"
#include "spars0/penalty_method.hpp"

#include <gtest/gtest.h>

using namespace spars0;
using namespace spars0::testing;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST(Step3Check, Conditions) {
  EXPECT_TRUE(step3_check(1e-7, 1e-8, 1e-6));
  EXPECT_FALSE(step3_check(1e-7, 1e-3, 1e-6));
  EXPECT_TRUE(step3_check(0.0, 0.0, 0.0));
  EXPECT_FALSE(step3_check(1e-5, 0.0, 1e-6));
}

TEST(MultiplierFreeResiduals, Cases) {
  const PenalizedSubproblem sub = build_penalized(linear_descent(), PenaltySpec::natural(1.0), 1.0);
  auto [rx, ry] = multiplier_free_residuals(sub, vec({std::sqrt(2.0) - 1.0}), vec({1.0}));
  EXPECT_NEAR(rx, 0.0, 1e-15);
  EXPECT_NEAR(ry, 0.0, 1e-15);

  // x = 0 with gradient block +3 holds the bound; -3 moves by 3.
  const PenalizedSubproblem up = build_penalized(make_problem("up", 1, 1.0, [](const Vector& x, Vector* g) {
                                                   if (g) *g = Vector::Constant(1, 3.0);
                                                   return 3.0 * x[0];
                                                 }),
                                                 PenaltySpec::natural(1.0), 1.0);
  EXPECT_DOUBLE_EQ(multiplier_free_residuals(up, vec({0}), vec({0})).first, 0.0);
  const PenalizedSubproblem down = build_penalized(make_problem("down", 1, 1.0, [](const Vector& x, Vector* g) {
                                                     if (g) *g = Vector::Constant(1, -3.0);
                                                     return -3.0 * x[0];
                                                   }),
                                                   PenaltySpec::natural(1.0), 1.0);
  EXPECT_DOUBLE_EQ(multiplier_free_residuals(down, vec({0}), vec({0})).first, 3.0);
}

TEST(EpsSchedule, GeometricAndCoupled) {
  const EpsSchedule g = EpsSchedule::geometric(1e-2, 0.5, 1e-8);
  EXPECT_DOUBLE_EQ(g.at(0, 1.0), 1e-2);
  EXPECT_DOUBLE_EQ(g.at(3, 1.0), 1.25e-3);
  EXPECT_DOUBLE_EQ(g.at(100, 1.0), 1e-8);
  const EpsSchedule c = EpsSchedule::coupled(2.0);
  EXPECT_DOUBLE_EQ(c.at(3, 5.0), 2.0 / 20.0);
}

TEST(OuterConfig, Validation) {
  OuterConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.beta = 1.0;
  EXPECT_THROW(cfg.validate(), PreconditionError);
  cfg = {};
  cfg.alpha0 = 0.0;
  EXPECT_THROW(cfg.validate(), PreconditionError);
  cfg = {};
  cfg.eps.factor = 1.0;
  EXPECT_THROW(cfg.validate(), PreconditionError);
}

TEST(Solve, ShiftedSquare) {
  OuterConfig cfg;
  cfg.alpha0 = 0.5;
  cfg.beta = 2.0;
  const SolveReport r = solve(shifted_square(), PenaltySpec::natural(1.0), cfg);
  EXPECT_EQ(r.termination, Termination::Step3);
  EXPECT_NEAR(r.x[0], 2.0, 1e-6);
  EXPECT_NEAR(r.y[0], 0.0, 1e-6);
  EXPECT_NEAR(r.l0_objective, 1.0, 1e-8);
  EXPECT_EQ(r.support, IndexSet{0});
}

TEST(Solve, AlphaGrowthLaw) {
  OuterConfig cfg;
  cfg.alpha0 = 0.3;
  cfg.beta = 1.7;
  const SolveReport r = solve(two_targets(), PenaltySpec::natural(1.0), cfg);
  for (const auto& e : r.trace) EXPECT_DOUBLE_EQ(e.alpha, 0.3 * std::pow(1.7, e.k));
}

TEST(Solve, LinearDescentStationaryFamily) {
  // Start on the stationary family; each Pen(alpha) iterate stays on it.
  OuterConfig cfg;
  cfg.alpha0 = 1.0;
  cfg.beta = 2.0;
  cfg.max_outer = 1;
  cfg.eps = EpsSchedule::geometric(1e-9, 0.5, 1e-10);
  StartPoint start;
  start.x = vec({std::sqrt(2.0) - 1.0});
  start.y = vec({1.0});
  const SolveReport r = solve(linear_descent(), PenaltySpec::natural(1.0), cfg, start);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_NEAR(r.trace[0].comp, std::sqrt(2.0) - 1.0, 1e-6);
}

TEST(Solve, BallLinearEndsAtOrigin) {
  const SolveReport r = solve(ball_linear(), PenaltySpec::natural(1.0), OuterConfig{});
  EXPECT_EQ(r.termination, Termination::Step3);
  EXPECT_LE(inf_norm(r.x), 1e-6);
  EXPECT_LE(r.residuals.feas_g, 1e-6);
}

TEST(Solve, PortfolioToyStep3IsSStationary) {
  const SparseProblem p = portfolio_toy();
  OuterConfig cfg;
  cfg.alpha0 = 0.95 * std::sqrt(2.0);
  const SolveReport r = solve(p, PenaltySpec::natural(p.rho), cfg);
  ASSERT_EQ(r.termination, Termination::Step3);
  EXPECT_LE(r.comp, cfg.delta);
  EXPECT_LE(r.best_s_residual, 1e-6);
  EXPECT_TRUE(r.biactive.empty());
  EXPECT_NEAR(r.x.sum(), 1.0, 1e-8);
}

TEST(Solve, HuberAndQuadraticPenaltiesTerminate) {
  for (const PenaltySpec& pen : {PenaltySpec::huber(1.0, 0.5), PenaltySpec::quadratic(1.0)}) {
    OuterConfig cfg;
    cfg.alpha0 = 0.5;
    cfg.beta = 2.0;
    const SolveReport r = solve(shifted_square(), pen, cfg);
    EXPECT_EQ(r.termination, Termination::Step3);
    EXPECT_NEAR(r.l0_objective, 1.0, 1e-6);
  }
}

TEST(Solve, MultiplierFreeVariant) {
  OuterConfig cfg;
  cfg.alpha0 = 0.5;
  cfg.beta = 2.0;
  cfg.multiplier_free = true;
  const SolveReport r = solve(two_targets(), PenaltySpec::natural(1.0), cfg);
  EXPECT_EQ(r.termination, Termination::Step3);
  EXPECT_NEAR(r.l0_objective, 1.25, 1e-6);
}

TEST(Solve, CoupledScheduleDrivesAlphaYToZeroOffZeroSet) {
  OuterConfig cfg;
  cfg.alpha0 = 0.5;
  cfg.beta = 2.0;
  cfg.eps = EpsSchedule::coupled(1.0);
  cfg.delta = 1e-6;
  cfg.max_outer = 40;
  cfg.keep_iterates = true;
  const SolveReport r = solve(two_targets(), PenaltySpec::natural(1.0), cfg);
  const IndexSet supp = r.support;
  ASSERT_FALSE(supp.empty());
  const std::size_t t = r.trace.size();
  for (std::size_t k = t > 5 ? t - 5 : 0; k < t; ++k) {
    const auto& e = r.trace[k];
    for (Index i : supp) EXPECT_LE(e.alpha * e.y[i], 10.0 * cfg.eps.c / static_cast<double>(e.k + 1));
  }
}

TEST(Solve, MaxOuterReported) {
  OuterConfig cfg;
  cfg.alpha0 = 0.01;
  cfg.max_outer = 2;
  const SolveReport r = solve(two_targets(), PenaltySpec::natural(1.0), cfg);
  EXPECT_EQ(r.termination, Termination::MaxOuter);
  EXPECT_EQ(r.outer_iterations, 2);
}

TEST(Solve, RejectsMismatchedRho) {
  EXPECT_THROW(solve(shifted_square(1.0), PenaltySpec::natural(2.0), OuterConfig{}), PreconditionError);
}

TEST(Solve, Deterministic) {
  const SparseProblem p = portfolio_toy();
  const SolveReport a = solve(p, PenaltySpec::natural(p.rho), OuterConfig{});
  const SolveReport b = solve(p, PenaltySpec::natural(p.rho), OuterConfig{});
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.trace.size(), b.trace.size());
}

TEST(ExactnessThreshold, ShiftedSquareOrigin) {
  // At x = 0 with y = s: dL/dx = -4, so alpha must reach 4 / sqrt(2).
  const double a = exactness_threshold(shifted_square(), PenaltySpec::natural(1.0), vec({0}), Vector(), Vector(), 1e-6);
  EXPECT_NEAR(a, 4.0 / std::sqrt(2.0), 1e-12);
}
