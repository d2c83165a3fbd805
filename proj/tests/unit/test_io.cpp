#include "spars0/bench.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace spars0;
using io::Json;

namespace {

std::string data(const std::string& f) { return std::string(SPARS0_DATA_DIR) + "/" + f; }

}  // namespace

TEST(ProblemFile, LoadsQcqpFixture) {
  const io::LoadedProblem lp = io::load_problem(data("shifted_square.json"));
  EXPECT_EQ(lp.family, "qcqp");
  EXPECT_EQ(lp.problem.n, 1);
  EXPECT_DOUBLE_EQ(lp.problem.f(Vector::Constant(1, 2.0)), 0.0);
  EXPECT_FALSE(lp.split);
}

TEST(ProblemFile, FreeLowerBoundIsSplit) {
  const io::LoadedProblem lp = io::load_problem(data("split_quadratic.json"));
  ASSERT_TRUE(lp.split);
  EXPECT_EQ(lp.problem.n, 2);
  EXPECT_EQ(lp.original.n, 1);
}

TEST(ProblemFile, PortfolioAndClassification) {
  const io::LoadedProblem pf = io::load_problem(data("portfolio_small.json"));
  EXPECT_EQ(pf.problem.p(), 1);
  EXPECT_GT(pf.alpha0_hint, 0.0);
  const io::LoadedProblem svm = io::load_problem(data("svm_separable.json"));
  EXPECT_TRUE(svm.split);
  const io::LoadedProblem lg = io::load_problem(data("logistic_separable.json"));
  ASSERT_TRUE(lg.split);
  EXPECT_GT(lg.problem.rho, 0.0);
}

TEST(ProblemFile, Errors) {
  EXPECT_THROW(io::load_problem(data("malformed.json")), io::SchemaError);
  EXPECT_THROW(io::load_problem(data("does_not_exist.json")), std::runtime_error);
  EXPECT_THROW(io::problem_from_json(Json{{"name", "x"}, {"family", "unknown"}}), io::SchemaError);
  EXPECT_THROW(io::problem_from_json(Json::parse(R"({"name":"p","family":"portfolio","n":3,"Q":[[1,0],[0,1]],"mean":[1,2],"s":1,"u":[1,1]})")),
               io::SchemaError);
}

TEST(ProblemFile, RoundTripsGeneratedInstances) {
  const auto inst = apps::gen_portfolio(5, 2);
  const io::LoadedProblem lp = io::problem_from_json(io::portfolio_json(inst));
  const SparseProblem direct = apps::build_portfolio(inst);
  const Vector x = Vector::Constant(5, 0.2);
  EXPECT_DOUBLE_EQ(lp.problem.f(x), direct.f(x));

  const auto bp = apps::gen_basis_pursuit(4, 8, 1, 0.1, 0.1, 3);
  const io::LoadedProblem lb = io::problem_from_json(io::basis_pursuit_json(bp));
  EXPECT_DOUBLE_EQ(lb.problem.g(bp.true_signal)[0], apps::build_basis_pursuit(bp).g(bp.true_signal)[0]);

  const auto di = apps::gen_dictionary(3, 2, 4, 1, 5);
  const io::LoadedProblem ld = io::problem_from_json(io::dictionary_json(di, 9));
  EXPECT_EQ(ld.problem.n, apps::dictionary_layout(di).size());
  EXPECT_EQ(ld.start.size(), ld.problem.n);
}

TEST(ProblemFile, PenaltySelection) {
  Json j = io::read_json_file(data("shifted_square.json"));
  j["penalty"] = {{"kind", "huber"}, {"rho", 1.0}, {"huber_eps", 0.2}};
  const io::LoadedProblem lp = io::problem_from_json(j);
  ASSERT_TRUE(lp.penalty);
  EXPECT_EQ(lp.penalty->kind, PenaltyKind::HuberShifted);
  EXPECT_DOUBLE_EQ(lp.penalty->huber_eps, 0.2);
  EXPECT_EQ(io::penalty_from_json(io::penalty_to_json(*lp.penalty), 1.0).kind, PenaltyKind::HuberShifted);
}

TEST(PointFile, SequenceAndMultipliers) {
  const io::PointFile pt = io::load_point(data("degenerate_equality_point.json"));
  EXPECT_EQ(pt.x.size(), 3);
  EXPECT_EQ(pt.mu.size(), 1);
  EXPECT_EQ(pt.sequence.size(), 5u);
  EXPECT_THROW(io::point_from_json(Json{{"y", {1}}}), io::SchemaError);
}

TEST(Diagnose, DegenerateEquality) {
  const Json d = io::diagnose_to_json(io::load_problem(data("degenerate_equality.json")),
                                      io::load_point(data("degenerate_equality_point.json")), {});
  EXPECT_NEAR(d["s_residual"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(d["sp_mfcq"], false);
  EXPECT_EQ(d["sp_licq"], false);
  EXPECT_LT(d["as_trace"].back().get<double>(), 1e-3);
}

TEST(Diagnose, BallOrigin) {
  const Json d = io::diagnose_to_json(io::load_problem(data("ball_linear.json")),
                                      io::load_point(data("ball_linear_origin.json")), {});
  EXPECT_DOUBLE_EQ(d["s_residual"].get<double>(), 0.0);
  EXPECT_EQ(d["sp_licq"], true);
  EXPECT_TRUE(d["support"].empty());
}

TEST(Diagnose, InfeasiblePointReportsViolation) {
  io::PointFile pt;
  pt.x = Vector::Ones(3);
  const Json d = io::diagnose_to_json(io::load_problem(data("ball_linear.json")), pt, {});
  EXPECT_GT(d["feasibility"]["g"].get<double>(), 0.0);
  pt.x = Vector::Ones(5);
  EXPECT_THROW(io::diagnose_to_json(io::load_problem(data("ball_linear.json")), pt, {}), io::SchemaError);
}

TEST(Report, SerializesSolve) {
  const io::LoadedProblem lp = io::load_problem(data("shifted_square.json"));
  OuterConfig cfg;
  const PenaltySpec pen = PenaltySpec::natural(1.0);
  cfg.alpha0 = 0.5;
  cfg.beta = 2.0;
  const SolveReport r = solve(lp.problem, pen, cfg);
  const Json j = io::report_to_json(r, lp, cfg, pen);
  EXPECT_EQ(j["status"], "step3");
  EXPECT_EQ(j["support"], Json::array({0}));
  EXPECT_NEAR(j["l0_objective"].get<double>(), 1.0, 1e-8);
  EXPECT_EQ(j["trace"].size(), r.trace.size());
  EXPECT_TRUE(j.contains("wall_time_ms"));
}

TEST(Report, NonFiniteBecomesNull) {
  EXPECT_TRUE(io::number(kInf).is_null());
  EXPECT_TRUE(io::to_json(Vector(Vector::Constant(1, kInf)))[0].is_null());
  EXPECT_TRUE(std::isinf(io::vector_from_json(Json::array({nullptr}), "v")[0]));
}

TEST(Bench, DeterministicAndThreadIndependent) {
  BenchOptions opt;
  opt.suite = "portfolio";
  opt.count = 3;
  opt.size = 5;
  opt.oracle = true;
  const BenchSummary a = run_bench(opt);
  opt.threads = 3;
  const BenchSummary b = run_bench(opt);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].name, b.rows[i].name);
    EXPECT_EQ(a.rows[i].l0_objective, b.rows[i].l0_objective);
    EXPECT_EQ(a.rows[i].oracle_value, b.rows[i].oracle_value);
  }
  EXPECT_EQ(a.oracle_runs, 3);
}

TEST(Bench, MatchRule) {
  EXPECT_TRUE(match_values(1.00005, 1.0));
  EXPECT_FALSE(match_values(1.001, 1.0));
  EXPECT_TRUE(match_values(1e-5, 0.0));
}

TEST(Bench, SmallSuitesRun) {
  for (const std::string& suite : {"basis_pursuit", "logistic_synth", "svm_synth", "dictionary"}) {
    BenchOptions opt;
    opt.suite = suite;
    opt.count = 1;
    opt.size = suite == "basis_pursuit" ? 32 : suite == "dictionary" ? 5 : suite == "svm_synth" ? 4 : 4;
    opt.oracle = suite != "dictionary";
    const BenchSummary s = run_bench(opt);
    ASSERT_EQ(s.rows.size(), 1u);
    EXPECT_NE(s.rows[0].status, "error") << suite << ": " << s.rows[0].error;
  }
  BenchOptions bad;
  bad.suite = "nope";
  EXPECT_THROW(run_bench(bad), PreconditionError);
}

TEST(Bench, CsvHasHeaderAndRows) {
  BenchOptions opt;
  opt.suite = "portfolio";
  opt.count = 2;
  opt.size = 4;
  const std::string csv = bench_csv(run_bench(opt));
  EXPECT_EQ(csv.rfind(bench_csv_header(), 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Bench, SlowGrowthNoWorseThanFast) {
  BenchOptions slow;
  slow.suite = "portfolio";
  slow.count = 10;
  BenchOptions fast = slow;
  fast.adjust = [](OuterConfig& cfg, PenaltySpec&) { cfg.beta = 5.0; };
  const BenchSummary a = run_bench(slow);
  const BenchSummary b = run_bench(fast);
  int ok = 0;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].status, "step3") << a.rows[i].name;
    EXPECT_EQ(b.rows[i].status, "step3") << b.rows[i].name;
    // Same support on both runs differs only at the inner tolerance.
    if (a.rows[i].l0_objective <= b.rows[i].l0_objective + 1e-6) ++ok;
  }
  EXPECT_GE(ok, 8);
}
