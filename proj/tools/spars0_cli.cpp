// spars0: solve, certify and diagnose l0-penalized nonlinear programs.
//
// Exit codes: 0 converged (step 3), 2 outer iteration limit, 3 inner solver
// failure, 1 any input or usage error.

#include "spars0/bench.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

using namespace spars0;
using io::Json;

namespace {

struct SolverFlags {
  std::string penalty = "natural";
  std::optional<double> rho, huber_eps, alpha0, beta, delta, eps0, eps_factor, eps_min, eps_coupled_c, tau0;
  std::optional<int> max_outer;
  bool multiplier_free = false;
  std::uint64_t seed = 0;
  int threads = 0;
  bool penalty_given = false;

  void add(CLI::App* app) {
    app->add_option("--penalty", penalty, "penalty kind")
        ->check(CLI::IsMember({"quadratic", "natural", "huber"}))
        ->each([this](const std::string&) { penalty_given = true; });
    app->add_option("--rho", rho, "l0 weight (overrides the problem file)")->check(CLI::PositiveNumber);
    app->add_option("--huber-eps", huber_eps, "Huber smoothing width")->check(CLI::PositiveNumber);
    app->add_option("--alpha0", alpha0, "initial penalty parameter")->check(CLI::PositiveNumber);
    app->add_option("--beta", beta, "penalty growth factor (> 1)");
    app->add_option("--delta", delta, "step-3 tolerance")->check(CLI::NonNegativeNumber);
    app->add_option("--eps0", eps0, "first inner tolerance")->check(CLI::PositiveNumber);
    app->add_option("--eps-factor", eps_factor, "geometric tolerance factor in (0, 1)");
    app->add_option("--eps-min", eps_min, "smallest inner tolerance")->check(CLI::NonNegativeNumber);
    app->add_option("--eps-coupled-c", eps_coupled_c, "use eps_k = c / (alpha_k (k + 1))")->check(CLI::PositiveNumber);
    app->add_option("--tau0", tau0, "zero tolerance for supports")->check(CLI::PositiveNumber);
    app->add_option("--max-outer", max_outer, "outer iteration limit")->check(CLI::PositiveNumber);
    app->add_flag("--multiplier-free", multiplier_free, "accept inner solves on the projected residual");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--threads", threads, "worker threads (default: SPARS0_THREADS or 1)")->check(CLI::NonNegativeNumber);
  }

  void apply(OuterConfig& cfg, PenaltySpec& pen) const {
    if (penalty_given || pen.kind == PenaltyKind::ShiftedAbsolute) pen.kind = penalty_kind_from_string(penalty);
    if (rho) pen.rho = *rho;
    if (huber_eps) pen.huber_eps = *huber_eps;
    if (alpha0) cfg.alpha0 = *alpha0;
    if (beta) cfg.beta = *beta;
    if (delta) cfg.delta = *delta;
    if (eps0) cfg.eps.eps0 = *eps0;
    if (eps_factor) cfg.eps.factor = *eps_factor;
    if (eps_min) cfg.eps.eps_min = *eps_min;
    if (eps_coupled_c) cfg.eps = EpsSchedule::coupled(*eps_coupled_c);
    if (tau0) cfg.tau0 = *tau0;
    if (max_outer) cfg.max_outer = *max_outer;
    if (multiplier_free) cfg.multiplier_free = true;
    cfg.seed = seed;
    cfg.validate();
    const auto bad = validate_spec(pen);
    if (!bad.empty()) throw PreconditionError("penalty: " + bad.front());
  }

  int thread_count() const {
    if (threads > 0) return threads;
    if (const char* env = std::getenv("SPARS0_THREADS")) {
      const int t = std::atoi(env);
      if (t > 0) return t;
    }
    return 1;
  }
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else io::write_text_file(path, text);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void set_rho(io::LoadedProblem& lp, double rho) {
  lp.problem.rho = rho;
  lp.original.rho = rho;
  if (lp.penalty) lp.penalty->rho = rho;
}

int exit_code(Termination t) {
  switch (t) {
    case Termination::Step3: return 0;
    case Termination::MaxOuter: return 2;
    case Termination::InnerFailure: return 3;
  }
  return 1;
}

int cmd_solve(const std::string& problem_path, const std::string& start_path, const std::string& out,
              const SolverFlags& flags) {
  io::LoadedProblem lp = io::load_problem(problem_path);
  if (flags.rho) set_rho(lp, *flags.rho);
  OuterConfig cfg;
  if (lp.alpha0_hint > 0.0) cfg.alpha0 = lp.alpha0_hint;
  PenaltySpec pen = lp.penalty.value_or(PenaltySpec::natural(lp.problem.rho));
  flags.apply(cfg, pen);

  StartPoint start;
  start.x = lp.start;
  start.y = lp.start_y;
  if (!start_path.empty()) {
    const io::PointFile pt = io::load_point(start_path);
    if (pt.x.size() != lp.problem.n) throw io::SchemaError("start point has the wrong dimension");
    start.x = pt.x;
    start.y = pt.y;
    start.lambda = pt.lambda;
    start.mu = pt.mu;
  }
  SolveReport rep = solve(lp.problem, pen, cfg, start);
  if (lp.split) shrink_report(rep, lp.problem, *lp.split, cfg.tau0);
  emit(out, dump(io::report_to_json(rep, lp, cfg, pen)));
  return exit_code(rep.termination);
}

int cmd_oracle(const std::string& problem_path, const std::string& out, const std::string& table,
               const std::optional<double>& rho, int max_n, int threads, std::uint64_t seed) {
  io::LoadedProblem lp = io::load_problem(problem_path);
  if (rho) set_rho(lp, *rho);
  OracleOptions opt;
  opt.max_n = max_n;
  opt.threads = threads;
  opt.seed = seed;
  opt.keep_table = !table.empty();
  const OracleResult o = enumerate_supports(lp.original, opt);
  emit(out, dump(io::oracle_to_json(o, lp.original)));
  if (!table.empty()) io::write_text_file(table, io::oracle_table_csv(o, lp.original.rho));
  return 0;
}

int cmd_diagnose(const std::string& problem_path, const std::string& point_path, const std::string& out,
                 const std::optional<double>& tau_flag) {
  emit(out, dump(io::diagnose_to_json(io::load_problem(problem_path), io::load_point(point_path), tau_flag)));
  return 0;
}

int cmd_generate(const std::string& family, Index size, std::uint64_t seed, const std::string& out) {
  Json j;
  if (family == "portfolio") {
    j = io::portfolio_json(apps::gen_portfolio(size > 0 ? size : 8, seed));
  } else if (family == "basis_pursuit") {
    const Index n = size > 0 ? size : 128;
    j = io::basis_pursuit_json(apps::gen_basis_pursuit(n / 4, n, std::max<Index>(1, n / 32), 0.1, 0.1, seed));
  } else if (family == "dictionary") {
    j = io::dictionary_json(apps::gen_dictionary(10, size > 0 ? size : 20, 30, 3, seed), seed);
  } else if (family == "logistic" || family == "svm") {
    if (out.empty() || out == "-") throw PreconditionError("generate " + family + " needs --out for the data file");
    const Index n = size > 0 ? size : 8;
    const auto ds = family == "logistic" ? apps::gen_classification(5 * n, n, std::max<Index>(1, n / 3), 0.05, seed)
                                         : apps::gen_classification(n, 2, 1, 0.1, seed);
    std::filesystem::path data = std::filesystem::path(out);
    data.replace_extension(".libsvm");
    io::write_text_file(data.string(), io::libsvm_text(ds));
    j = {{"name", family + "_" + ds.name}, {"family", family}, {"libsvm_path", data.filename().string()}};
    if (family == "logistic") {
      j["r"] = 10.0;
      j["rho_scale"] = 1.0;
    }
  } else {
    throw PreconditionError("unknown family '" + family + "'");
  }
  emit(out, dump(j));
  return 0;
}

int cmd_bench(const std::string& suite, int count, Index size, bool oracle, const std::string& out,
              const std::string& csv, const SolverFlags& flags) {
  BenchOptions opt;
  opt.suite = suite;
  opt.count = count;
  opt.seed = flags.seed;
  opt.threads = flags.thread_count();
  opt.oracle = oracle;
  opt.size = size;
  opt.adjust = [&flags](OuterConfig& cfg, PenaltySpec& pen) {
    const std::uint64_t keep = cfg.seed;
    flags.apply(cfg, pen);
    cfg.seed = keep;
  };
  const BenchSummary s = run_bench(opt);
  emit(out, dump(bench_json(s)));
  if (!csv.empty()) io::write_text_file(csv, bench_csv(s));
  return s.failures == static_cast<Index>(s.rows.size()) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact penalty solver for l0-penalized nonlinear programs"};
  app.require_subcommand(1);

  std::string problem, start, point, out, table, family = "portfolio", suite = "portfolio", csv;
  SolverFlags flags;
  int max_n = 14, count = 30;
  Index size = 0;
  bool oracle = false;

  auto* solve_cmd = app.add_subcommand("solve", "run the exact penalty method");
  solve_cmd->add_option("--problem", problem, "problem JSON")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--start", start, "start point JSON")->check(CLI::ExistingFile);
  solve_cmd->add_option("--out", out, "report path (default stdout)");
  flags.add(solve_cmd);

  auto* oracle_cmd = app.add_subcommand("oracle", "global minimum by support enumeration");
  oracle_cmd->add_option("--problem", problem, "problem JSON")->required()->check(CLI::ExistingFile);
  oracle_cmd->add_option("--out", out, "result path (default stdout)");
  oracle_cmd->add_option("--table", table, "per-support CSV path");
  oracle_cmd->add_option("--max-n", max_n, "largest number of sparse coordinates")->check(CLI::Range(1, 30));
  oracle_cmd->add_option("--rho", flags.rho, "l0 weight")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--seed", flags.seed, "random seed");
  oracle_cmd->add_option("--threads", flags.threads, "worker threads")->check(CLI::NonNegativeNumber);

  auto* diag_cmd = app.add_subcommand("diagnose", "stationarity and constraint qualifications at a point");
  diag_cmd->add_option("--problem", problem, "problem JSON")->required()->check(CLI::ExistingFile);
  diag_cmd->add_option("--point", point, "point JSON")->required()->check(CLI::ExistingFile);
  diag_cmd->add_option("--out", out, "result path (default stdout)");
  diag_cmd->add_option("--tau0", flags.tau0, "zero tolerance")->check(CLI::PositiveNumber);

  auto* gen_cmd = app.add_subcommand("generate", "write a seeded instance as a problem file");
  gen_cmd->add_option("--family", family, "instance family")
      ->check(CLI::IsMember({"portfolio", "basis_pursuit", "dictionary", "logistic", "svm"}));
  gen_cmd->add_option("--size", size, "family size parameter")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", flags.seed, "random seed");
  gen_cmd->add_option("--out", out, "problem path (default stdout)");

  auto* bench_cmd = app.add_subcommand("bench", "run a seeded suite");
  bench_cmd->add_option("--suite", suite, "suite name")->check(CLI::IsMember(bench_suites()));
  bench_cmd->add_option("--count", count, "number of instances")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--size", size, "suite size parameter")->check(CLI::NonNegativeNumber);
  bench_cmd->add_flag("--oracle", oracle, "compare against support enumeration when small enough");
  bench_cmd->add_option("--out", out, "summary JSON path (default stdout)");
  bench_cmd->add_option("--csv", csv, "per-instance CSV path");
  flags.add(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*solve_cmd) return cmd_solve(problem, start, out, flags);
    if (*oracle_cmd) return cmd_oracle(problem, out, table, flags.rho, max_n, flags.thread_count(), flags.seed);
    if (*diag_cmd) return cmd_diagnose(problem, point, out, flags.tau0);
    if (*gen_cmd) return cmd_generate(family, size, flags.seed, out);
    if (*bench_cmd) return cmd_bench(suite, count, size, oracle, out, csv, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
