#include "fixtures.hpp"
#include "spars0/apps/classification.hpp"
#include "spars0/apps/portfolio.hpp"
#include "spars0/oracle.hpp"
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

TEST(RestrictedSolve, TwoTargets) {
  const RestrictedResult one = restricted_solve(two_targets(), {0});
  ASSERT_TRUE(one.feasible);
  EXPECT_NEAR(one.value, 0.25, 1e-10);
  EXPECT_NEAR(one.x[0], 2.0, 1e-6);
  EXPECT_DOUBLE_EQ(one.x[1], 0.0);

  const RestrictedResult none = restricted_solve(two_targets(), {});
  ASSERT_TRUE(none.feasible);
  EXPECT_NEAR(none.value, 4.25, 1e-12);
}

TEST(RestrictedSolve, EmptySupportInfeasibleForBudget) {
  EXPECT_FALSE(restricted_solve(portfolio_toy(), {}).feasible);
}

TEST(EnumerateSupports, Examples) {
  const OracleResult a = enumerate_supports(two_targets());
  EXPECT_EQ(a.best_support, IndexSet{0});
  EXPECT_NEAR(a.best_value, 1.25, 1e-9);
  EXPECT_EQ(a.enumerated_count, 4u);

  const OracleResult b = enumerate_supports(shifted_square(10.0));
  EXPECT_TRUE(b.best_support.empty());
  EXPECT_NEAR(b.best_value, 4.0, 1e-12);

  const OracleResult c = enumerate_supports(ball_linear());
  EXPECT_TRUE(c.best_support.empty());
  EXPECT_NEAR(c.best_value, 0.0, 1e-12);
  EXPECT_TRUE(c.best_x.isZero());

  const OracleResult d = enumerate_supports(portfolio_toy());
  EXPECT_EQ(d.best_support, (IndexSet{0, 1}));
  EXPECT_NEAR(d.best_value, 0.7, 1e-7);
}

TEST(EnumerateSupports, TieGoesToSparserSupport) {
  // rho = 4 makes {} and {0} tie at 4.
  const OracleResult r = enumerate_supports(shifted_square(4.0));
  EXPECT_TRUE(r.best_support.empty());
}

TEST(EnumerateSupports, RefusesLargeProblems) {
  const SparseProblem p = make_problem("big", 20, 1.0, [](const Vector& x, Vector* g) {
    if (g) *g = x;
    return 0.5 * x.squaredNorm();
  });
  EXPECT_THROW(enumerate_supports(p), PreconditionError);
  OracleOptions opt;
  opt.max_n = 1;
  EXPECT_THROW(enumerate_supports(two_targets(), opt), PreconditionError);
}

TEST(EnumerateSupports, MonotoneInRho) {
  const auto inst = apps::gen_portfolio(6, 4);
  double prev_value = -kInf;
  std::size_t prev_size = 7;
  for (double rho : {0.01, 0.1, 0.5, 1.0, 3.0}) {
    SparseProblem p = apps::build_portfolio(inst);
    p.rho = rho;
    const OracleResult r = enumerate_supports(p);
    EXPECT_GE(r.best_value, prev_value - 1e-9);
    EXPECT_LE(r.best_support.size(), prev_size);
    prev_value = r.best_value;
    prev_size = r.best_support.size();
  }
}

TEST(EnumerateSupports, SeedIndependentOnConvexFamily) {
  const SparseProblem p = apps::build_portfolio(apps::gen_portfolio(6, 9));
  OracleOptions a, b;
  b.seed = 12345;
  EXPECT_NEAR(enumerate_supports(p, a).best_value, enumerate_supports(p, b).best_value, 1e-8);
}

TEST(EnumerateSupports, ThreadCountDoesNotChangeResult) {
  const SparseProblem p = apps::build_portfolio(apps::gen_portfolio(6, 2));
  OracleOptions one, four;
  four.threads = 4;
  const OracleResult a = enumerate_supports(p, one), b = enumerate_supports(p, four);
  EXPECT_EQ(a.best_support, b.best_support);
  EXPECT_EQ(a.best_value, b.best_value);
}

TEST(EnumerateSupports, SolverNeverBeatsOracle) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto inst = apps::gen_portfolio(6, seed);
    const SparseProblem p = apps::build_portfolio(inst);
    OuterConfig cfg;
    cfg.alpha0 = apps::recommended_alpha0(inst.Q);
    const SolveReport r = solve(p, PenaltySpec::natural(p.rho), cfg);
    EXPECT_GE(r.l0_objective, enumerate_supports(p).best_value - 1e-6);
  }
}

TEST(EnumerateSupports, SvmSeparableToyHasEmptySlackSupport) {
  apps::ClassificationDataset ds;
  ds.Z = (Matrix(2, 1) << 1.0, -1.0).finished();
  ds.t = vec({1, -1});
  const OracleResult r = enumerate_supports(apps::svm_problem(ds, 0.5));
  ASSERT_TRUE(r.feasible);
  EXPECT_TRUE(r.best_support.empty());
}

TEST(GradientCheck, Examples) {
  const SparseProblem q = two_targets();
  EXPECT_LE(gradient_check(q.objective, vec({0.3, 7.0}), 1e-5), 1e-9);
  apps::ClassificationDataset ds;
  ds.Z = (Matrix(3, 2) << 1, 2, -1, 0.5, 0.3, -2).finished();
  ds.t = vec({1, -1, 1});
  const SparseProblem lg = apps::logistic_problem(ds, 0.1, 10.0);
  EXPECT_LE(gradient_check(lg.objective, Vector::Zero(2)), 1e-6);
  EXPECT_THROW(gradient_check(q.objective, vec({0, 0}), 0.0), PreconditionError);
}

TEST(GradientCheck, DetectsWrongGradient) {
  auto wrong = [](const Vector& x, Vector* g) {
    if (g) *g = x;  // should be 2x
    return x.squaredNorm();
  };
  EXPECT_GT(gradient_check(wrong, vec({1, 1})), 0.1);
}
