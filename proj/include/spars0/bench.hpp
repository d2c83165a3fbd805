#pragma once

// Seeded benchmark suites over the application families, with optional
// oracle comparison. Rows come back in instance order regardless of threads.

#include "spars0/io.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <thread>

namespace spars0 {

struct BenchInstance {
  std::string name;
  SparseProblem problem;          // solver coordinates
  std::optional<SplitMap> split;
  SparseProblem original;         // unsplit, for the oracle
  OuterConfig cfg;
  PenaltySpec penalty;
  StartPoint start;
  std::function<double(const Vector&)> extra;  // suite-specific scalar, e.g. the D-block residual
};

struct BenchRow {
  std::string name;
  Index n = 0;
  std::string status;
  double l0_objective = 0.0;
  std::optional<double> oracle_value;
  bool match = false;
  Index l0_norm = 0;
  double comp = 0.0;
  double feasibility = 0.0;      // max(g+, |h|) at the final point
  double best_s_residual = 0.0;
  Index biactive = 0;
  double start_objective = 0.0;  // f + rho ||x||_0 at the start point
  double extra = 0.0;
  bool comp_tail_nonincreasing = true;  // over the last five outer iterations
  int outer_iterations = 0;
  double wall_time_ms = 0.0;
  std::string error;
};

struct BenchSummary {
  std::string suite;
  std::vector<BenchRow> rows;
  Index oracle_runs = 0;
  Index matches = 0;
  Index failures = 0;
  double mean_time_ms = 0.0;

  double match_rate() const { return oracle_runs ? static_cast<double>(matches) / static_cast<double>(oracle_runs) : 0.0; }
};

struct BenchOptions {
  std::string suite = "portfolio";
  int count = 30;
  std::uint64_t seed = 0;
  int threads = 1;
  bool oracle = false;
  Index size = 0;  // 0 keeps the suite default
  std::function<void(OuterConfig&, PenaltySpec&)> adjust;
};

inline const std::vector<std::string>& bench_suites() {
  static const std::vector<std::string> s{"portfolio", "basis_pursuit", "dictionary", "logistic_synth", "svm_synth"};
  return s;
}

inline bool match_values(double value, double oracle) { return std::abs(value - oracle) <= 1e-4 * (1.0 + std::abs(oracle)); }

namespace bench_detail {

inline BenchInstance from_split(std::string name, const SparseProblem& unsplit) {
  BenchInstance b;
  b.name = std::move(name);
  b.original = unsplit;
  SplitProblem sp = split_free_variables(unsplit);
  b.problem = std::move(sp.problem);
  b.split = std::move(sp.map);
  return b;
}

}  // namespace bench_detail

/// Instance `index` of a suite; the seed is base_seed + index.
inline BenchInstance make_bench_instance(const std::string& suite, int index, std::uint64_t base_seed, Index size = 0) {
  const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(index);
  BenchInstance b;
  if (suite == "portfolio") {
    const auto inst = apps::gen_portfolio(size > 0 ? size : 8, seed);
    b.name = inst.name;
    b.problem = apps::build_portfolio(inst);
    b.original = b.problem;
    b.cfg.alpha0 = apps::recommended_alpha0(inst.Q);
    b.cfg.beta = 1.1;
    b.penalty = PenaltySpec::natural(inst.rho);
  } else if (suite == "basis_pursuit") {
    const Index n = size > 0 ? size : 128;
    const auto inst = apps::gen_basis_pursuit(n / 4, n, std::max<Index>(1, n / 32), 0.1, 0.1, seed);
    b.name = inst.name;
    b.problem = apps::build_basis_pursuit(inst);
    b.original = b.problem;
    b.cfg.alpha0 = 1.0;
    b.cfg.beta = 1.1;
    b.penalty = PenaltySpec::natural(1.0);
    b.start.y = Vector::Ones(n);
  } else if (suite == "dictionary") {
    const Index l = size > 0 ? size : 20;
    const auto inst = apps::gen_dictionary(10, l, 30, std::min<Index>(3, l), seed);
    b.name = inst.name;
    b.problem = apps::build_dictionary(inst);
    b.original = b.problem;
    b.cfg.alpha0 = 0.1;
    b.cfg.beta = 10.0;
    b.cfg.eps.factor = 0.1;
    b.penalty = PenaltySpec::natural(inst.rho);
    b.start.x = apps::dictionary_random_start(b.problem, seed);
    const auto lay = apps::dictionary_layout(inst);
    const SparseProblem p = b.problem;
    b.extra = [p, lay](const Vector& x) { return apps::dictionary_d_residual(p, lay, x); };
  } else if (suite == "logistic_synth") {
    const Index n = size > 0 ? size : 8;
    const auto ds = apps::gen_classification(5 * n, n, std::max<Index>(1, n / 3), 0.05, seed);
    b = bench_detail::from_split("logistic_" + ds.name, apps::logistic_problem(ds, 1.0 / static_cast<double>(ds.m()), 10.0));
    b.cfg.alpha0 = 0.1;
    b.cfg.beta = 10.0;
    b.penalty = PenaltySpec::natural(b.problem.rho);
    b.start.x = Vector::Zero(b.problem.n);
    b.extra = [ds, map = *b.split](const Vector& z) { return apps::accuracy(ds, map.reconstruct(z)); };
  } else if (suite == "svm_synth") {
    const Index m = size > 0 ? size : 8;
    const auto ds = apps::gen_classification(m, 2, 1, 0.1, seed);
    const double rho = 1.0 / static_cast<double>(m);
    b = bench_detail::from_split("svm_" + ds.name, apps::svm_problem(ds, rho));
    b.cfg.alpha0 = rho;
    b.cfg.beta = 10.0;
    b.penalty = PenaltySpec::natural(rho);
    const auto lay = apps::svm_layout(ds);
    b.extra = [ds, lay, map = *b.split](const Vector& z) {
      const Vector v = map.reconstruct(z);
      return apps::accuracy(ds, v.head(lay.n_features), v[lay.gamma_index]);
    };
  } else {
    throw PreconditionError("unknown bench suite '" + suite + "'");
  }
  b.original.name = b.name;
  b.problem.name = b.name;
  return b;
}

inline double constraint_violation(const SparseProblem& p, const Vector& x) {
  double v = p.p() > 0 ? inf_norm(p.h(x)) : 0.0;
  if (p.m() > 0) v = std::max(v, std::max(0.0, p.g(x).maxCoeff()));
  return v;
}

inline BenchRow run_bench_instance(const BenchInstance& b, bool oracle, const OracleOptions& oopt = {}) {
  BenchRow row;
  row.name = b.name;
  row.n = b.original.n;
  const Vector x0 = b.problem.project(b.start.x.size() == b.problem.n ? b.start.x : Vector(Vector::Zero(b.problem.n)));
  row.start_objective = l0_objective(b.problem, x0, b.cfg.tau0);
  try {
    SolveReport rep = solve(b.problem, b.penalty, b.cfg, b.start);
    if (b.split) shrink_report(rep, b.problem, *b.split, b.cfg.tau0);
    row.status = to_string(rep.termination);
    row.l0_objective = rep.l0_objective;
    row.l0_norm = static_cast<Index>(rep.support.size());
    row.comp = rep.comp;
    row.feasibility = constraint_violation(b.problem, rep.x);
    row.best_s_residual = rep.best_s_residual;
    row.biactive = static_cast<Index>(rep.biactive.size());
    row.outer_iterations = rep.outer_iterations;
    row.wall_time_ms = rep.wall_time_ms;
    const std::size_t t = rep.trace.size();
    for (std::size_t k = t > 5 ? t - 5 : 0; k + 1 < t; ++k)
      if (rep.trace[k + 1].comp > rep.trace[k].comp * (1.0 + 1e-9) + 1e-15) row.comp_tail_nonincreasing = false;
    if (b.extra) row.extra = b.extra(rep.x);
    if (oracle && static_cast<Index>(b.original.sparse_indices().size()) <= oopt.max_n) {
      const OracleResult o = enumerate_supports(b.original, oopt);
      if (o.feasible) {
        row.oracle_value = o.best_value;
        row.match = match_values(row.l0_objective, o.best_value);
      }
    }
  } catch (const std::exception& e) {
    row.status = "error";
    row.error = e.what();
  }
  return row;
}

inline BenchSummary run_bench(const BenchOptions& opt) {
  if (opt.count < 1) throw PreconditionError("bench: count must be positive");
  std::vector<BenchInstance> instances;
  for (int i = 0; i < opt.count; ++i) {
    instances.push_back(make_bench_instance(opt.suite, i, opt.seed, opt.size));
    if (opt.adjust) opt.adjust(instances.back().cfg, instances.back().penalty);
  }
  BenchSummary s;
  s.suite = opt.suite;
  s.rows.resize(instances.size());
  const int threads = std::max(1, std::min(opt.threads, opt.count));
  if (threads == 1) {
    for (std::size_t i = 0; i < instances.size(); ++i) s.rows[i] = run_bench_instance(instances[i], opt.oracle);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < instances.size(); i = next++) s.rows[i] = run_bench_instance(instances[i], opt.oracle);
      });
    for (auto& th : pool) th.join();
  }
  double total = 0.0;
  for (const auto& r : s.rows) {
    if (r.oracle_value) {
      ++s.oracle_runs;
      if (r.match) ++s.matches;
    }
    if (r.status == "error") ++s.failures;
    total += r.wall_time_ms;
  }
  s.mean_time_ms = total / static_cast<double>(s.rows.size());
  return s;
}

inline std::vector<BenchRow> rows_by_name(const BenchSummary& s) {
  std::vector<BenchRow> rows = s.rows;
  std::stable_sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) { return a.name < b.name; });
  return rows;
}

inline const char* bench_csv_header() {
  return "name,n,status,l0_objective,oracle_value,match,l0_norm,comp,feasibility,best_s_residual,biactive,"
         "start_objective,extra,outer_iterations,wall_time_ms";
}

inline std::string bench_csv(const BenchSummary& s) {
  std::ostringstream out;
  out.precision(12);
  out << bench_csv_header() << '\n';
  for (const auto& r : rows_by_name(s)) {
    out << r.name << ',' << r.n << ',' << r.status << ',' << r.l0_objective << ',';
    if (r.oracle_value) out << *r.oracle_value;
    out << ',' << (r.oracle_value ? (r.match ? "1" : "0") : "") << ',' << r.l0_norm << ',' << r.comp << ','
        << r.feasibility << ',' << r.best_s_residual << ',' << r.biactive << ',' << r.start_objective << ','
        << r.extra << ',' << r.outer_iterations << ',' << r.wall_time_ms << '\n';
  }
  return out.str();
}

inline io::Json bench_json(const BenchSummary& s) {
  using io::number;
  io::Json rows = io::Json::array();
  for (const auto& r : rows_by_name(s)) {
    io::Json j = {{"name", r.name},
                  {"n", r.n},
                  {"status", r.status},
                  {"l0_objective", number(r.l0_objective)},
                  {"oracle_value", r.oracle_value ? number(*r.oracle_value) : io::Json(nullptr)},
                  {"match", r.oracle_value ? io::Json(r.match) : io::Json(nullptr)},
                  {"l0_norm", r.l0_norm},
                  {"comp", number(r.comp)},
                  {"feasibility", number(r.feasibility)},
                  {"best_s_residual", number(r.best_s_residual)},
                  {"biactive", r.biactive},
                  {"start_objective", number(r.start_objective)},
                  {"extra", number(r.extra)},
                  {"outer_iterations", r.outer_iterations},
                  {"wall_time_ms", number(r.wall_time_ms)}};
    if (!r.error.empty()) j["error"] = r.error;
    rows.push_back(std::move(j));
  }
  return {{"suite", s.suite},
          {"count", s.rows.size()},
          {"oracle_runs", s.oracle_runs},
          {"matches", s.matches},
          {"match_rate", number(s.match_rate())},
          {"failures", s.failures},
          {"mean_time_ms", number(s.mean_time_ms)},
          {"rows", std::move(rows)}};
}

}  // namespace spars0
