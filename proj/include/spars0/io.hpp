#pragma once

// JSON problem files, point files and result serialization.
//
// Problem file: {"name", "family", "n"?, "rho"?, "upper_bounds"?, "penalty"?,
// ...family payload}. Matrices are arrays of rows.

#include "spars0/apps/basis_pursuit.hpp"
#include "spars0/apps/classification.hpp"
#include "spars0/apps/dictionary.hpp"
#include "spars0/apps/portfolio.hpp"
#include "spars0/oracle.hpp"
#include "spars0/penalty_method.hpp"
#include "spars0/qcqp.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace spars0::io {

using Json = nlohmann::ordered_json;

/// A problem or point file that does not match the expected layout.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// Non-finite doubles become null so the output stays valid JSON.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline double number_from_json(const Json& j, const std::string& what) {
  if (!j.is_number()) throw SchemaError(what + ": expected a number");
  return j.get<double>();
}

inline Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw SchemaError(what + ": expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    // null stands for an infinite bound
    if (j[i].is_null()) v[static_cast<Index>(i)] = kInf;
    else v[static_cast<Index>(i)] = number_from_json(j[i], what + "[" + std::to_string(i) + "]");
  }
  return v;
}

inline Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw SchemaError(what + ": expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw SchemaError(what + ": rows must be non-empty arrays");
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw SchemaError(what + ": ragged rows");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          number_from_json(j[r][c], what + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
  }
  return m;
}

inline Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Vector(m.row(r).transpose())));
  return rows;
}

inline Json to_json(const IndexSet& s) {
  Json a = Json::array();
  for (Index i : s) a.push_back(i);
  return a;
}

inline const Json& require(const Json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(ctx + ": missing \"" + key + "\"");
  return j.at(key);
}

inline Json penalty_to_json(const PenaltySpec& p) {
  Json j = {{"kind", to_string(p.kind)}, {"rho", p.rho}};
  if (p.kind == PenaltyKind::HuberShifted) j["huber_eps"] = p.huber_eps;
  return j;
}

inline PenaltySpec penalty_from_json(const Json& j, double default_rho) {
  if (!j.is_object()) throw SchemaError("penalty: expected an object");
  PenaltySpec p;
  try {
    p.kind = penalty_kind_from_string(require(j, "kind", "penalty").get<std::string>());
  } catch (const DomainError& e) {
    throw SchemaError(std::string("penalty: ") + e.what());
  }
  p.rho = j.contains("rho") ? number_from_json(j["rho"], "penalty.rho") : default_rho;
  if (j.contains("huber_eps")) p.huber_eps = number_from_json(j["huber_eps"], "penalty.huber_eps");
  return p;
}

/// A problem as handed to the solver plus what is needed to report in the
/// original coordinates.
struct LoadedProblem {
  std::string family;
  SparseProblem problem;           // solver coordinates (split when free variables exist)
  std::optional<SplitMap> split;   // set when `problem` is a split form
  SparseProblem original;          // unsplit form, used by the oracle
  std::optional<PenaltySpec> penalty;
  Vector start;                    // suggested start, may be empty
  Vector start_y;                  // suggested y start, may be empty
  double alpha0_hint = 0.0;        // 0 means none
};

namespace io_detail {

inline QuadraticForm form_from_json(const Json& j, Index n, const std::string& what) {
  if (!j.is_object()) throw SchemaError(what + ": expected an object");
  QuadraticForm f;
  if (j.contains("P")) f.P = matrix_from_json(j["P"], what + ".P");
  if (j.contains("q")) f.q = vector_from_json(j["q"], what + ".q");
  if (j.contains("c")) f.c = number_from_json(j["c"], what + ".c");
  try {
    f.check(n, what);
  } catch (const PreconditionError& e) {
    throw SchemaError(e.what());
  }
  return f;
}

inline std::string resolve(const std::string& path, const std::string& base_dir) {
  const std::filesystem::path p(path);
  return p.is_absolute() || base_dir.empty() ? path : (std::filesystem::path(base_dir) / p).string();
}

inline void apply_upper_bounds(SparseProblem& p, const Json& j) {
  if (!j.contains("upper_bounds") || j["upper_bounds"].is_null()) return;
  const Vector u = vector_from_json(j["upper_bounds"], "upper_bounds");
  if (u.size() != p.n) throw SchemaError("upper_bounds: expected " + std::to_string(p.n) + " entries");
  p.upper = p.upper.cwiseMin(u);
}

}  // namespace io_detail

/// Builds the problem described by a parsed problem file. Relative data paths
/// are resolved against `base_dir`.
inline LoadedProblem problem_from_json(const Json& j, const std::string& base_dir = "") {
  using namespace io_detail;
  if (!j.is_object()) throw SchemaError("problem: expected an object");
  LoadedProblem out;
  out.family = require(j, "family", "problem").get<std::string>();
  const std::string name = j.contains("name") ? j["name"].get<std::string>() : out.family;
  const bool has_rho = j.contains("rho");
  const double rho = has_rho ? number_from_json(j["rho"], "rho") : 1.0;
  SparseProblem p;
  bool split = false;

  try {
    if (out.family == "portfolio") {
      apps::PortfolioInstance inst;
      inst.name = name;
      inst.Q = matrix_from_json(require(j, "Q", "portfolio"), "Q");
      inst.mean = vector_from_json(require(j, "mean", "portfolio"), "mean");
      inst.s = number_from_json(require(j, "s", "portfolio"), "s");
      inst.u = j.contains("u") ? vector_from_json(j["u"], "u") : Vector(Vector::Ones(inst.Q.rows()));
      inst.rho = rho;
      if (inst.Q.rows() != inst.Q.cols() || inst.mean.size() != inst.Q.rows() || inst.u.size() != inst.Q.rows())
        throw SchemaError("portfolio: Q, mean and u disagree in size");
      p = apps::build_portfolio(inst);
      out.alpha0_hint = apps::recommended_alpha0(inst.Q);
    } else if (out.family == "basis_pursuit") {
      apps::BasisPursuitInstance inst;
      inst.name = name;
      inst.A = matrix_from_json(require(j, "A", "basis_pursuit"), "A");
      inst.b = vector_from_json(require(j, "b", "basis_pursuit"), "b");
      inst.eps_ball = number_from_json(require(j, "eps", "basis_pursuit"), "eps");
      p = apps::build_basis_pursuit(inst, rho);
      out.start_y = Vector::Ones(p.n);
    } else if (out.family == "logistic") {
      const auto ds = apps::load_libsvm(resolve(require(j, "libsvm_path", "logistic").get<std::string>(), base_dir));
      const double r = j.contains("r") ? number_from_json(j["r"], "r") : 10.0;
      double lrho = rho;
      if (j.contains("rho_scale")) lrho = number_from_json(j["rho_scale"], "rho_scale") / static_cast<double>(ds.m());
      else if (!has_rho) lrho = 1.0 / static_cast<double>(ds.m());
      p = apps::logistic_problem(ds, lrho, r);
      p.name = name;
      split = true;
    } else if (out.family == "svm") {
      const auto ds = apps::load_libsvm(resolve(require(j, "libsvm_path", "svm").get<std::string>(), base_dir));
      p = apps::svm_problem(ds, has_rho ? rho : 1.0 / static_cast<double>(ds.m()));
      p.name = name;
      split = true;
    } else if (out.family == "dictionary") {
      apps::DictionaryInstance inst;
      inst.name = name;
      inst.Z = matrix_from_json(require(j, "Z", "dictionary"), "Z");
      inst.l = require(j, "l", "dictionary").get<Index>();
      inst.rho = has_rho ? rho : 0.1;
      p = apps::build_dictionary(inst);
      const std::uint64_t seed = j.contains("start_seed") ? j["start_seed"].get<std::uint64_t>() : 0;
      out.start = apps::dictionary_random_start(p, seed);
      out.alpha0_hint = 0.1;
    } else if (out.family == "qcqp") {
      QcqpSpec s;
      s.name = name;
      s.n = require(j, "n", "qcqp").get<Index>();
      s.rho = rho;
      s.objective = form_from_json(require(j, "objective", "qcqp"), s.n, "objective");
      if (j.contains("ineq"))
        for (std::size_t i = 0; i < j["ineq"].size(); ++i)
          s.ineq.push_back(form_from_json(j["ineq"][i], s.n, "ineq[" + std::to_string(i) + "]"));
      if (j.contains("eq"))
        for (std::size_t i = 0; i < j["eq"].size(); ++i)
          s.eq.push_back(form_from_json(j["eq"][i], s.n, "eq[" + std::to_string(i) + "]"));
      if (j.contains("lower")) s.lower = vector_from_json(j["lower"], "lower").unaryExpr([](double v) {
        return std::isinf(v) ? -kInf : v;  // null lower bound means -inf
      });
      if (j.contains("sparse_mask")) s.sparse_mask = j["sparse_mask"].get<std::vector<bool>>();
      p = build_qcqp(s);
      split = p.lower.minCoeff() < 0.0;
      if (j.contains("start")) out.start = vector_from_json(j["start"], "start");
    } else {
      throw SchemaError("unknown family '" + out.family + "'");
    }
  } catch (const Json::exception& e) {
    throw SchemaError(out.family + ": " + e.what());
  } catch (const PreconditionError& e) {
    throw SchemaError(out.family + ": " + e.what());
  } catch (const apps::ParseError& e) {
    throw SchemaError(out.family + ": " + e.what());
  } catch (const DomainError& e) {
    throw SchemaError(out.family + ": " + e.what());
  }

  apply_upper_bounds(p, j);
  if (j.contains("n") && out.family != "qcqp" && j["n"].get<Index>() != p.n)
    throw SchemaError("n = " + std::to_string(j["n"].get<Index>()) + " does not match the payload dimension " +
                      std::to_string(p.n));
  out.original = p;
  if (split) {
    SplitProblem sp = split_free_variables(p);
    out.problem = std::move(sp.problem);
    out.split = std::move(sp.map);
    if (out.start.size() == p.n) {
      // a = a+ - a- with the smaller half at zero
      Vector z = Vector::Zero(out.problem.n);
      for (Index i = 0; i < p.n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (out.start[i] >= 0.0 || out.split->minus[k] < 0) z[out.split->plus[k]] = out.start[i];
        else z[out.split->minus[k]] = -out.start[i];
      }
      out.start = z;
    }
  } else {
    out.problem = p;
  }
  try {
    out.problem.validate();
  } catch (const PreconditionError& e) {
    throw SchemaError(e.what());
  }
  if (j.contains("penalty")) out.penalty = penalty_from_json(j["penalty"], out.problem.rho);
  return out;
}

inline LoadedProblem load_problem(const std::string& path) {
  const Json j = read_json_file(path);
  return problem_from_json(j, std::filesystem::path(path).parent_path().string());
}

/// Point file: {"x", "y"?, "lambda"?, "mu"?, "sequence"?: [{"x", "lambda"?, "mu"?}]}.
struct PointFile {
  Vector x, y, lambda, mu;
  std::vector<SequencePoint> sequence;
};

inline PointFile point_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("point: expected an object");
  PointFile p;
  p.x = vector_from_json(require(j, "x", "point"), "x");
  if (j.contains("y")) p.y = vector_from_json(j["y"], "y");
  if (j.contains("lambda")) p.lambda = vector_from_json(j["lambda"], "lambda");
  if (j.contains("mu")) p.mu = vector_from_json(j["mu"], "mu");
  if (j.contains("sequence")) {
    for (std::size_t i = 0; i < j["sequence"].size(); ++i) {
      const Json& s = j["sequence"][i];
      const std::string ctx = "sequence[" + std::to_string(i) + "]";
      SequencePoint sp;
      sp.x = vector_from_json(require(s, "x", ctx), ctx + ".x");
      if (s.contains("lambda")) sp.lambda = vector_from_json(s["lambda"], ctx + ".lambda");
      if (s.contains("mu")) sp.mu = vector_from_json(s["mu"], ctx + ".mu");
      p.sequence.push_back(std::move(sp));
    }
  }
  return p;
}

inline PointFile load_point(const std::string& path) { return point_from_json(read_json_file(path)); }

inline Json residuals_to_json(const KKTResiduals& r) {
  return {{"stat_x", number(r.stat_x)}, {"stat_y", number(r.stat_y)}, {"feas_g", number(r.feas_g)},
          {"feas_h", number(r.feas_h)}, {"comp_x", number(r.comp_x)}, {"comp_y", number(r.comp_y)}};
}

inline Json config_to_json(const OuterConfig& c, const PenaltySpec& penalty) {
  Json eps = c.eps.kind == EpsSchedule::Kind::Coupled
                 ? Json{{"kind", "coupled"}, {"c", c.eps.c}}
                 : Json{{"kind", "geometric"}, {"eps0", c.eps.eps0}, {"factor", c.eps.factor}, {"eps_min", c.eps.eps_min}};
  return {{"penalty", penalty_to_json(penalty)},
          {"alpha0", c.alpha0},
          {"beta", c.beta},
          {"delta", c.delta},
          {"eps", eps},
          {"max_outer", c.max_outer},
          {"multiplier_free", c.multiplier_free},
          {"seed", c.seed},
          {"tau0", c.tau0}};
}

/// SolveReport as JSON. For split problems the "x" block is the shrunk
/// representative and "a" the point in the original coordinates.
inline Json report_to_json(const SolveReport& r, const LoadedProblem& lp, const OuterConfig& cfg,
                           const PenaltySpec& penalty) {
  Json j;
  j["name"] = lp.problem.name;
  j["family"] = lp.family;
  j["status"] = to_string(r.termination);
  j["objective"] = number(r.objective);
  j["l0_objective"] = number(r.l0_objective);
  j["support"] = to_json(r.support);
  j["comp"] = number(r.comp);
  j["residuals"] = residuals_to_json(r.residuals);
  j["s_residual"] = number(r.s_residual);
  j["best_s_residual"] = number(r.best_s_residual);
  j["biactive"] = to_json(r.biactive);
  j["final_alpha"] = number(r.final_alpha);
  j["outer_iterations"] = r.outer_iterations;
  j["inner_iterations"] = r.inner_iterations;
  j["x"] = to_json(r.x);
  j["y"] = to_json(r.y);
  j["lambda"] = to_json(r.lambda);
  j["mu"] = to_json(r.mu);
  if (lp.split) j["a"] = to_json(lp.split->reconstruct(r.x));
  Json trace = Json::array();
  for (const auto& e : r.trace) {
    trace.push_back({{"k", e.k},
                     {"alpha", number(e.alpha)},
                     {"eps", number(e.eps)},
                     {"residuals", residuals_to_json(e.residuals)},
                     {"mf_rx", number(e.mf_rx)},
                     {"mf_ry", number(e.mf_ry)},
                     {"comp", number(e.comp)},
                     {"f", number(e.f)},
                     {"l0", e.l0},
                     {"inner_iters", e.inner_iters},
                     {"inner_status", to_string(e.inner_status)}});
  }
  j["trace"] = std::move(trace);
  j["config"] = config_to_json(cfg, penalty);
  j["wall_time_ms"] = number(r.wall_time_ms);
  return j;
}

inline Json oracle_to_json(const OracleResult& o, const SparseProblem& p) {
  Json j;
  j["name"] = p.name;
  j["feasible"] = o.feasible;
  j["best_support"] = to_json(o.best_support);
  j["best_value"] = number(o.best_value);
  j["best_x"] = to_json(o.best_x);
  j["enumerated_count"] = o.enumerated_count;
  return j;
}

/// One row per enumerated support: support (space separated), feasible, value, total.
inline std::string oracle_table_csv(const OracleResult& o, double rho) {
  std::ostringstream out;
  out.precision(17);
  out << "support,feasible,restricted_value,total\n";
  for (const auto& e : o.table) {
    for (std::size_t i = 0; i < e.support.size(); ++i) out << (i ? " " : "") << e.support[i];
    out << ',' << (e.feasible ? 1 : 0) << ',';
    if (e.feasible) out << e.value << ',' << e.value + rho * static_cast<double>(e.support.size());
    else out << ',';
    out << '\n';
  }
  return out.str();
}

/// Stationarity and constraint-qualification report at a point of either the
/// original or the split form of a problem.
inline Json diagnose_to_json(const LoadedProblem& lp, const PointFile& pt, const std::optional<double>& tau_flag) {
  const SparseProblem* p = nullptr;
  if (pt.x.size() == lp.original.n) p = &lp.original;
  else if (pt.x.size() == lp.problem.n) p = &lp.problem;
  else throw SchemaError("point dimension " + std::to_string(pt.x.size()) + " matches neither problem form");
  if (pt.lambda.size() != 0 && pt.lambda.size() != p->m()) throw SchemaError("lambda has the wrong length");
  if (pt.mu.size() != 0 && pt.mu.size() != p->p()) throw SchemaError("mu has the wrong length");

  const Vector& x = pt.x;
  const double tau0 = tau_flag.value_or(default_zero_tol(x));
  const Vector lambda = pt.lambda.size() == p->m() ? pt.lambda : Vector::Zero(p->m());
  const Vector mu = pt.mu.size() == p->p() ? pt.mu : Vector::Zero(p->p());

  Json j;
  j["name"] = p->name;
  j["tau0"] = tau0;
  j["support"] = to_json(support(*p, x, tau0));
  j["s_residual"] = number(s_residual(*p, x, lambda, mu, tau0));
  const MultiplierFit fit = best_multiplier_residual(*p, x, tau0);
  j["best_s_residual"] = number(fit.residual);

  IndexSet bi;
  const IndexSet sparse = p->sparse_indices();
  if (pt.y.size() == static_cast<Index>(sparse.size())) {
    Vector xs(static_cast<Index>(sparse.size()));
    for (std::size_t k = 0; k < sparse.size(); ++k) xs[static_cast<Index>(k)] = x[sparse[k]];
    for (Index i : biactive(xs, pt.y, tau0)) bi.push_back(sparse[static_cast<std::size_t>(i)]);
  }
  j["biactive"] = to_json(bi);

  j["sp_licq"] = check_sp_licq(*p, x, tau0);
  const CqStatus mf = check_sp_mfcq(*p, x, tau0);
  j["sp_mfcq"] = mf == CqStatus::Indeterminate ? Json("indeterminate") : Json(mf == CqStatus::Holds);

  // Second order needs an S-stationary pair; fall back to the fitted multipliers.
  std::string sosc = "inconclusive";
  try {
    if (s_residual(*p, x, lambda, mu, tau0) <= 1e-6) sosc = to_string(check_sp_sosc(*p, x, lambda, mu, tau0).status);
    else if (fit.residual <= 1e-6) sosc = to_string(check_sp_sosc(*p, x, fit.lambda, fit.mu, tau0).status);
  } catch (const PreconditionError&) {
  }
  j["sp_sosc"] = sosc;

  Json feas;
  const Vector g = p->g(x);
  feas["g"] = g.size() ? std::max(0.0, g.maxCoeff()) : 0.0;
  feas["h"] = inf_norm(p->h(x));
  feas["bounds"] = inf_norm(Vector(p->project(x) - x));
  j["feasibility"] = feas;

  Json trace = Json::array();
  if (!pt.sequence.empty()) {
    const AsTrace tr = as_trace(*p, pt.sequence, tau0);
    for (double r : tr.residuals) trace.push_back(number(r));
    j["as_consistent"] = tr.consistent;
  }
  j["as_trace"] = trace;
  return j;
}

// Instance writers used by `generate`.

inline Json portfolio_json(const apps::PortfolioInstance& inst) {
  return {{"name", inst.name}, {"family", "portfolio"}, {"n", inst.Q.rows()}, {"rho", inst.rho},
          {"upper_bounds", nullptr}, {"Q", to_json(inst.Q)}, {"mean", to_json(inst.mean)}, {"s", inst.s},
          {"u", to_json(inst.u)}};
}

inline Json basis_pursuit_json(const apps::BasisPursuitInstance& inst, double rho = 1.0) {
  return {{"name", inst.name}, {"family", "basis_pursuit"}, {"n", inst.A.cols()}, {"rho", rho},
          {"upper_bounds", nullptr}, {"A", to_json(inst.A)}, {"b", to_json(inst.b)}, {"eps", inst.eps_ball}};
}

inline Json dictionary_json(const apps::DictionaryInstance& inst, std::uint64_t start_seed = 0) {
  const auto lay = apps::dictionary_layout(inst);
  return {{"name", inst.name}, {"family", "dictionary"}, {"n", lay.size()}, {"rho", inst.rho},
          {"upper_bounds", nullptr}, {"Z", to_json(inst.Z)}, {"l", inst.l}, {"start_seed", start_seed}};
}

inline std::string libsvm_text(const apps::ClassificationDataset& ds) {
  std::ostringstream out;
  out.precision(17);
  for (Index i = 0; i < ds.m(); ++i) {
    out << (ds.t[i] > 0 ? "+1" : "-1");
    for (Index k = 0; k < ds.n(); ++k)
      if (ds.Z(i, k) != 0.0) out << ' ' << k + 1 << ':' << ds.Z(i, k);
    out << '\n';
  }
  return out.str();
}

}  // namespace spars0::io
