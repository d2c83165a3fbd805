// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "spars0/bench.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#ifndef SPARS0_DATA_DIR
#define SPARS0_DATA_DIR "examples_data"
#endif

using namespace spars0;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string data(const std::string& file) { return std::string(SPARS0_DATA_DIR) + "/" + file; }

std::vector<PenaltySpec> random_specs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> log_rho(std::log(1e-3), std::log(1e2));
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  const double rho = std::exp(log_rho(rng));
  return {PenaltySpec::quadratic(rho), PenaltySpec::natural(rho), PenaltySpec::huber(rho, frac(rng) * std::sqrt(2.0 * rho))};
}

Outcome penalty_axioms() {
  std::mt19937_64 rng(1);
  int bad = 0;
  double worst = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    for (const auto& spec : random_specs(rng)) {
      if (!validate_spec(spec).empty()) ++bad;
      const double gap = component_value(spec, 0.0) - component_value(spec, component_minimizer(spec)) - spec.rho;
      worst = std::max(worst, std::abs(gap));
    }
  }
  return {bad == 0 && worst <= 1e-12, std::to_string(bad) + " invalid specs, max |p(0)-p(s)-rho| " + fmt("%.2e", worst)};
}

Outcome lower_bound_suite() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Index n = 6;
  int violations = 0, tight_mismatch = 0;
  for (int kind = 0; kind < 3; ++kind) {
    for (int trial = 0; trial < 10000; ++trial) {
      const PenaltySpec spec = random_specs(rng)[static_cast<std::size_t>(kind)];
      const double s = component_minimizer(spec);
      Vector x(n), y(n);
      std::vector<Index> zeros;
      for (Index i = 0; i < n; ++i) {
        x[i] = u(rng) < 0.5 ? 0.0 : 0.1 + 3.0 * u(rng);
        if (x[i] == 0.0) zeros.push_back(i);
        y[i] = x[i] == 0.0 ? s : 0.0;
      }
      bool at_star = true;
      if (!zeros.empty() && trial % 2 == 1) {
        for (Index i : zeros) {
          if (u(rng) < 0.5 && i != zeros.front()) continue;
          double t = 3.0 * s * u(rng);
          if (std::abs(t - s) < 1e-2 * std::max(1.0, s)) t = s + 1e-2 * std::max(1.0, s);
          y[i] = t;
          at_star = false;
        }
      }
      try {
        const ReformulationGap g = reformulation_gap(spec.rho, spec, x, y);
        if (g.tight != at_star) ++tight_mismatch;
      } catch (const std::logic_error&) {
        ++violations;
      }
    }
  }
  return {violations == 0 && tight_mismatch == 0,
          std::to_string(violations) + " bound violations, " + std::to_string(tight_mismatch) + " equality mismatches in 30000 pairs"};
}

SparseProblem linear_descent_problem() {
  return make_problem("linear", 1, 1.0, [](const Vector& x, Vector* g) {
    if (g) *g = Vector::Constant(1, -1.0);
    return -x[0];
  });
}

Outcome closed_form_stationarity() {
  const SparseProblem p = linear_descent_problem();
  const PenaltySpec pen = PenaltySpec::natural(1.0);
  double worst_res = 0.0, worst_comp = 0.0;
  int checked = 0;
  for (double alpha : {1.0, 2.0, 5.0}) {
    const double xs = (std::sqrt(2.0) - 1.0 / alpha) / alpha;
    const double ys = 1.0 / alpha;
    const Vector x = Vector::Constant(1, xs), y = Vector::Constant(1, ys);
    const PenalizedSubproblem sub = build_penalized(p, pen, alpha);
    const InnerResult r = penalized_residuals(sub, x, y, Vector(), Vector(), 1e-12);
    const auto [rx, ry] = multiplier_free_residuals(sub, x, y);
    worst_res = std::max({worst_res, r.residuals.max(), rx, ry});

    OuterConfig cfg;
    cfg.alpha0 = alpha;
    cfg.max_outer = 1;
    cfg.eps = EpsSchedule::geometric(1e-9, 0.5, 1e-10);
    StartPoint start;
    start.x = x;
    start.y = y;
    const SolveReport rep = solve(p, pen, cfg, start);
    for (const auto& e : rep.trace) {
      if (e.inner_status != SolveStatus::Converged) continue;
      const double a = e.alpha;
      worst_comp = std::max(worst_comp, std::abs(e.comp - (std::sqrt(2.0) - 1.0 / a) / (a * a)));
      ++checked;
    }
  }
  return {worst_res <= 1e-10 && worst_comp <= 1e-6 && checked == 3,
          "max residual " + fmt("%.2e", worst_res) + ", max comp error " + fmt("%.2e", worst_comp) + " over " +
              std::to_string(checked) + " converged iterations"};
}

struct BenchRuns {
  BenchSummary portfolio, basis_pursuit, dictionary;
  double t_portfolio = 0, t_basis = 0, t_dict = 0;
};

BenchSummary timed_bench(const std::string& suite, int count, bool oracle, double& secs) {
  const auto t0 = Clock::now();
  BenchOptions opt;
  opt.suite = suite;
  opt.count = count;
  opt.oracle = oracle;
  opt.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  BenchSummary s = run_bench(opt);
  secs = seconds_since(t0);
  return s;
}

Outcome oracle_equivalence(const BenchRuns& b) {
  int below = 0, errors = 0;
  for (const auto& r : b.portfolio.rows) {
    if (r.status == "error" || !r.oracle_value) ++errors;
    else if (r.l0_objective < *r.oracle_value - 1e-6) ++below;
  }
  const double rate = b.portfolio.match_rate();
  return {errors == 0 && below == 0 && rate >= 0.8 && b.t_portfolio < 120.0,
          "match rate " + fmt("%.2f", rate) + " over " + std::to_string(b.portfolio.oracle_runs) + ", " +
              std::to_string(below) + " below oracle, " + std::to_string(errors) + " errors, " + fmt("%.1f s", b.t_portfolio)};
}

std::vector<const BenchRow*> all_rows(const BenchRuns& b) {
  std::vector<const BenchRow*> rows;
  for (const auto* s : {&b.portfolio, &b.basis_pursuit, &b.dictionary})
    for (const auto& r : s->rows) rows.push_back(&r);
  return rows;
}

Outcome feasibility_in_limit(const BenchRuns& b) {
  int step3 = 0, max_outer = 0, bad = 0, other = 0;
  for (const BenchRow* r : all_rows(b)) {
    if (r->status == "step3") {
      ++step3;
      if (!(r->comp <= 1e-6)) ++bad;
    } else if (r->status == "max_outer") {
      ++max_outer;
      if (!r->comp_tail_nonincreasing) ++bad;
    } else {
      ++other;
    }
  }
  return {bad == 0 && other == 0, std::to_string(step3) + " step3, " + std::to_string(max_outer) + " max_outer, " +
                                      std::to_string(other) + " other exits, " + std::to_string(bad) + " violations"};
}

Outcome s_stationarity(const BenchRuns& b) {
  int step3 = 0, bad = 0;
  double worst = 0.0;
  for (const BenchRow* r : all_rows(b)) {
    if (r->status != "step3") continue;
    ++step3;
    worst = std::max(worst, r->best_s_residual);
    if (!(r->best_s_residual <= 1e-5) || r->biactive != 0) ++bad;
  }
  return {bad == 0 && step3 > 0, std::to_string(bad) + " of " + std::to_string(step3) +
                                     " step3 points fail, max residual " + fmt("%.2e", worst)};
}

Outcome basis_pursuit_run(const BenchRuns& b) {
  int feasible = 0, sparse = 0;
  const int total = static_cast<int>(b.basis_pursuit.rows.size());
  for (const auto& r : b.basis_pursuit.rows) {
    if (r.status != "error" && r.feasibility <= 1e-8) ++feasible;
    if (r.status != "error" && r.l0_norm <= 4) ++sparse;
  }
  return {feasible == total && sparse >= 0.7 * total && b.t_basis < 120.0,
          std::to_string(feasible) + "/" + std::to_string(total) + " feasible, " + std::to_string(sparse) + "/" +
              std::to_string(total) + " with ||x||_0 <= 4, " + fmt("%.1f s", b.t_basis)};
}

Outcome dictionary_run(const BenchRuns& b) {
  int ok = 0;
  double worst_d = 0.0;
  const int total = static_cast<int>(b.dictionary.rows.size());
  for (const auto& r : b.dictionary.rows) {
    worst_d = std::max(worst_d, r.extra);
    if (r.status != "error" && r.comp <= 1e-6 && r.l0_objective <= r.start_objective && r.extra <= 1e-3) ++ok;
  }
  return {ok == total && b.t_dict < 180.0, std::to_string(ok) + "/" + std::to_string(total) +
                                               " pass, max D residual " + fmt("%.2e", worst_d) + ", " + fmt("%.1f s", b.t_dict)};
}

Outcome q_hat_boundary() {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  int bad = 0;
  for (int t = 0; t < 20; ++t) {
    const Index n = 3 + t % 6;
    Matrix b(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) b(i, j) = nd(rng);
    const Matrix q = b.transpose() * b + 0.05 * Matrix::Identity(n, n);
    const double root = std::sqrt(2.0 * apps::min_eigenvalue(q));
    if (!(apps::min_eigenvalue(apps::q_hat(q, 0.95 * root)) > 1e-10)) ++bad;
    if (!(apps::min_eigenvalue(apps::q_hat(q, 1.05 * root)) <= 1e-10)) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " boundary violations in 20 matrices"};
}

Outcome counterexamples() {
  std::string why;
  const io::Json d =
      io::diagnose_to_json(io::load_problem(data("degenerate_equality.json")), io::load_point(data("degenerate_equality_point.json")), {});
  const double sres = d["s_residual"].get<double>();
  if (std::abs(sres - 1.0) > 1e-12) why += " s_residual " + fmt("%.3g", sres);
  if (!(d["sp_mfcq"].is_boolean() && !d["sp_mfcq"].get<bool>())) why += " sp_mfcq not false";
  const auto& tr = d["as_trace"];
  bool decreasing = !tr.empty();
  for (std::size_t k = 1; k < tr.size(); ++k)
    if (tr[k].get<double>() > tr[k - 1].get<double>()) decreasing = false;
  if (!decreasing || !(tr.back().get<double>() < 1e-3)) why += " as_trace does not decrease below 1e-3";

  const io::LoadedProblem ball = io::load_problem(data("ball_linear.json"));
  OuterConfig cfg;
  const SolveReport rep = solve(ball.problem, ball.penalty.value_or(PenaltySpec::natural(ball.problem.rho)), cfg);
  const double xn = inf_norm(rep.x);
  if (!(xn <= 1e-6)) why += " ball solve ends at ||x|| " + fmt("%.2e", xn);
  return {why.empty(), why.empty() ? "s_residual " + fmt("%.15g", sres) + ", final as_trace " +
                                          fmt("%.2e", tr.back().get<double>()) + ", ball ||x||_inf " + fmt("%.1e", xn)
                                    : why.substr(1)};
}

double jacobian_check(const ConstraintBlock& block, const Vector& x) {
  double worst = 0.0;
  for (Index r = 0; r < block.count; ++r) {
    auto row = [&](const Vector& z, Vector* grad) {
      Vector v(block.count);
      if (!grad) {
        block.evaluate(z, v, nullptr);
        return v[r];
      }
      Matrix jac(block.count, z.size());
      block.evaluate(z, v, &jac);
      *grad = jac.row(r).transpose();
      return v[r];
    };
    worst = std::max(worst, gradient_check(row, x));
  }
  return worst;
}

Outcome gradient_suites() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<std::string, SparseProblem>> problems;
  problems.emplace_back("portfolio", apps::build_portfolio(apps::gen_portfolio(8, 3)));
  problems.emplace_back("basis_pursuit", apps::build_basis_pursuit(apps::gen_basis_pursuit(8, 32, 2, 0.1, 0.1, 3)));
  const auto ds = apps::gen_classification(40, 8, 3, 0.05, 3);
  problems.emplace_back("logistic", apps::logistic_problem(ds, 1.0 / 40.0, 10.0));
  problems.emplace_back("svm", apps::svm_problem(apps::gen_classification(8, 2, 1, 0.1, 3), 1.0 / 8.0));
  problems.emplace_back("dictionary", apps::build_dictionary(apps::gen_dictionary(10, 20, 30, 3, 3)));

  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, p] : problems) {
    for (int t = 0; t < 20; ++t) {
      Vector x(p.n);
      for (Index i = 0; i < p.n; ++i) x[i] = p.lower[i] < 0.0 ? nd(rng) : u(rng);
      const double e = std::max({gradient_check(p.objective, x), jacobian_check(p.ineq, x), jacobian_check(p.eq, x)});
      if (e > worst) {
        worst = e;
        worst_name = name;
      }
    }
  }
  return {worst <= 1e-6, "max relative error " + fmt("%.2e", worst) + " (" + worst_name + ")"};
}

Outcome splitting_semantics() {
  std::string why;
  const io::LoadedProblem lp = io::load_problem(data("split_quadratic.json"));
  if (!lp.split) return {false, "fixture was not split"};
  const SplitMap& map = *lp.split;
  for (double lam : {0.0, 1.0, 10.0}) {
    Vector z(2);
    z << lam, lam;
    if (map.reconstruct(z)[0] != 0.0 || inf_norm(map.shrink(z)) != 0.0) why += " (" + fmt("%g", lam) + ") does not map to 0";
  }
  OuterConfig cfg;
  SolveReport rep = solve(lp.problem, lp.penalty.value_or(PenaltySpec::natural(lp.problem.rho)), cfg, {lp.start, lp.start_y, {}, {}});
  shrink_report(rep, lp.problem, map, cfg.tau0);
  if (!rep.support.empty()) why += " solver support has " + std::to_string(rep.support.size()) + " entries";

  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    QcqpSpec spec;
    spec.n = 2;
    spec.rho = 0.2 + std::abs(nd(rng));
    Matrix b(2, 2);
    b << nd(rng), nd(rng), nd(rng), nd(rng);
    spec.objective.P = b.transpose() * b + 0.5 * Matrix::Identity(2, 2);
    spec.objective.q = Vector::Zero(2);
    spec.objective.q << 2.0 * nd(rng), 2.0 * nd(rng);
    spec.lower = Vector::Constant(2, -10.0);
    spec.upper = Vector::Constant(2, 10.0);
    const SparseProblem original = build_qcqp(spec);
    const SplitProblem sp = split_free_variables(original);
    const double a = enumerate_supports(original).best_value;
    const double s = enumerate_supports(sp.problem).best_value;
    worst = std::max(worst, std::abs(a - s));
  }
  if (!(worst <= 1e-8)) why += " split oracle differs by " + fmt("%.2e", worst);
  return {why.empty(), why.empty() ? "shrink and reconstruct agree, max oracle gap " + fmt("%.2e", worst) : why.substr(1)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& run) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2d %-28s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  };

  report(1, "penalty axioms", [] {
    const auto t0 = Clock::now();
    Outcome o = penalty_axioms();
    if (seconds_since(t0) >= 1.0) o = {false, o.detail + ", too slow"};
    return o;
  });
  report(2, "reformulation lower bound", [] {
    const auto t0 = Clock::now();
    Outcome o = lower_bound_suite();
    if (seconds_since(t0) >= 5.0) o = {false, o.detail + ", too slow"};
    return o;
  });
  report(3, "closed-form stationarity", closed_form_stationarity);

  BenchRuns runs;
  runs.portfolio = timed_bench("portfolio", 30, true, runs.t_portfolio);
  runs.basis_pursuit = timed_bench("basis_pursuit", 50, false, runs.t_basis);
  runs.dictionary = timed_bench("dictionary", 20, false, runs.t_dict);
  report(4, "oracle equivalence", [&] { return oracle_equivalence(runs); });
  report(5, "feasibility in the limit", [&] { return feasibility_in_limit(runs); });
  report(6, "S-stationarity at exit", [&] { return s_stationarity(runs); });
  report(7, "basis pursuit", [&] { return basis_pursuit_run(runs); });
  report(8, "dictionary learning", [&] { return dictionary_run(runs); });
  report(9, "Q-hat definiteness boundary", q_hat_boundary);
  report(10, "counterexample fixtures", counterexamples);
  report(11, "gradient suites", gradient_suites);
  report(12, "splitting semantics", splitting_semantics);

  std::printf("%d of 12 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
