#pragma once

// Sparse logistic regression and sparse-slack SVM on binary datasets, plus a
// LIBSVM reader and a synthetic generator.

#include "spars0/problem.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace spars0::apps {

struct ClassificationDataset {
  std::string name = "dataset";
  Matrix Z;  // m x n, one sample per row
  Vector t;  // labels in {-1, +1}

  Index m() const { return Z.rows(); }
  Index n() const { return Z.cols(); }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// "label idx:val idx:val ..." with 1-based strictly increasing indices.
/// Labels {0, 1} are mapped to {-1, +1}.
inline ClassificationDataset parse_libsvm(std::istream& in, std::string name = "libsvm") {
  struct Row {
    double label;
    std::vector<std::pair<Index, double>> entries;
  };
  std::vector<Row> rows;
  Index n = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    Row row;
    try {
      std::size_t used = 0;
      row.label = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("bad label '" + tok + "'", lineno);
    }
    Index last = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError("expected idx:val, got '" + tok + "'", lineno);
      long long idx = 0;
      double val = 0.0;
      try {
        std::size_t used = 0;
        idx = std::stoll(tok.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(tok);
        const std::string vs = tok.substr(colon + 1);
        val = std::stod(vs, &used);
        if (used != vs.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("malformed entry '" + tok + "'", lineno);
      }
      if (idx < 1) throw ParseError("feature indices are 1-based", lineno);
      if (idx <= last) throw ParseError("feature indices must be strictly increasing", lineno);
      last = static_cast<Index>(idx);
      row.entries.emplace_back(last - 1, val);
    }
    n = std::max(n, last);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no samples", lineno);

  bool zero_one = true, pm_one = true;
  for (const auto& r : rows) {
    zero_one = zero_one && (r.label == 0.0 || r.label == 1.0);
    pm_one = pm_one && (r.label == -1.0 || r.label == 1.0);
  }
  if (!zero_one && !pm_one) throw DomainError("labels must be binary ({-1,+1} or {0,1})");

  ClassificationDataset ds;
  ds.name = std::move(name);
  ds.Z = Matrix::Zero(static_cast<Index>(rows.size()), n);
  ds.t.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Index>(i);
    ds.t[r] = rows[i].label == 0.0 ? -1.0 : (rows[i].label > 0.0 ? 1.0 : -1.0);
    for (const auto& [j, v] : rows[i].entries) ds.Z(r, j) = v;
  }
  return ds;
}

inline ClassificationDataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_libsvm(in, path);
}

/// Gaussian features; labels from a k-sparse planted direction with label noise.
inline ClassificationDataset gen_classification(Index m, Index n, Index k, double flip_prob, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ClassificationDataset ds;
  ds.name = "synth_" + std::to_string(m) + "x" + std::to_string(n) + "_s" + std::to_string(seed);
  ds.Z.resize(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) ds.Z(i, j) = normal(rng);
  Vector w = Vector::Zero(n);
  for (Index j = 0; j < std::min(k, n); ++j) w[j] = normal(rng) > 0.0 ? 1.0 : -1.0;
  ds.t.resize(m);
  for (Index i = 0; i < m; ++i) {
    double label = ds.Z.row(i).dot(w) >= 0.0 ? 1.0 : -1.0;
    if (unif(rng) < flip_prob) label = -label;
    ds.t[i] = label;
  }
  return ds;
}

/// Numerically stable log(1 + exp(v)).
inline double log1p_exp(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

/// 1 / (1 + exp(-v)).
inline double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

/// Mean logistic loss (1/m) sum log(1 + exp(-t_i z_i^T a)) and its gradient in a.
inline double logistic_loss(const ClassificationDataset& ds, const Vector& a, Vector* grad) {
  const Vector margin = ds.t.cwiseProduct(ds.Z * a);
  const double inv_m = 1.0 / static_cast<double>(ds.m());
  double v = 0.0;
  for (Index i = 0; i < margin.size(); ++i) v += log1p_exp(-margin[i]);
  if (grad) {
    Vector w(margin.size());
    for (Index i = 0; i < margin.size(); ++i) w[i] = -ds.t[i] * sigmoid(-margin[i]);
    *grad = inv_m * (ds.Z.transpose() * w);
  }
  return inv_m * v;
}

/// Logistic regression over a in [-r, r]^n (unsplit, sign-free); used by the
/// oracle and as input to split_free_variables.
inline SparseProblem logistic_problem(const ClassificationDataset& ds, double rho, double r) {
  if (ds.m() < 1) throw PreconditionError("logistic: empty dataset");
  if (!(r > 0.0)) throw PreconditionError("logistic: box radius must be positive");
  SparseProblem p;
  p.name = "logistic_" + ds.name;
  p.n = ds.n();
  p.rho = rho;
  p.objective = [ds](const Vector& a, Vector* grad) { return logistic_loss(ds, a, grad); };
  p.lower = Vector::Constant(p.n, -r);
  p.upper = Vector::Constant(p.n, r);
  p.sparse_mask.assign(static_cast<std::size_t>(p.n), true);
  return p;
}

/// Split form a = a+ - a-, both halves in [0, r]; rho = rho_scale / m.
inline SplitProblem build_logistic(const ClassificationDataset& ds, double rho_scale, double r) {
  const double rho = rho_scale / static_cast<double>(ds.m());
  return split_free_variables(logistic_problem(ds, rho, r));
}

struct SvmLayout {
  Index n_features = 0;
  Index m_samples = 0;
  Index c_offset = 0;
  Index gamma_index = 0;
  Index u_offset = 0;
};

/// min ||c||^2 / (2m) + rho ||u||_0  s.t.  e - t o (Z c - gamma) - u <= 0, u >= 0
/// over (c, gamma, u) with c and gamma free (unsplit).
inline SparseProblem svm_problem(const ClassificationDataset& ds, double rho) {
  if (ds.m() < 1) throw PreconditionError("svm: empty dataset");
  const Index n = ds.n(), m = ds.m();
  SparseProblem p;
  p.name = "svm_" + ds.name;
  p.n = n + 1 + m;
  p.rho = rho;
  const double inv_m = 1.0 / static_cast<double>(m);
  p.objective = [n, inv_m](const Vector& x, Vector* grad) {
    const auto c = x.head(n);
    if (grad) {
      grad->setZero(x.size());
      grad->head(n) = inv_m * c;
    }
    return 0.5 * inv_m * c.squaredNorm();
  };
  p.lower.resize(p.n);
  p.upper = Vector::Constant(p.n, kInf);
  p.lower.head(n + 1).setConstant(-kInf);
  p.lower.tail(m).setZero();
  p.sparse_mask.assign(static_cast<std::size_t>(p.n), false);
  for (Index i = 0; i < m; ++i) p.sparse_mask[static_cast<std::size_t>(n + 1 + i)] = true;
  const Matrix tz = ds.t.asDiagonal() * ds.Z;
  const Vector t = ds.t;
  p.ineq.count = m;
  p.ineq.evaluate = [tz, t, n, m](const Vector& x, Vector& v, Matrix* jac) {
    const double gamma = x[n];
    v = Vector::Ones(m) - tz * x.head(n) + gamma * t - x.tail(m);
    if (jac) {
      jac->setZero(m, x.size());
      jac->leftCols(n) = -tz;
      jac->col(n) = t;
      jac->rightCols(m) = -Matrix::Identity(m, m);
    }
  };
  return p;
}

inline SvmLayout svm_layout(const ClassificationDataset& ds) {
  return {ds.n(), ds.m(), 0, ds.n(), ds.n() + 1};
}

/// Split form of the SVM; rho defaults to 1/m.
inline SplitProblem build_svm(const ClassificationDataset& ds, double rho = -1.0) {
  return split_free_variables(svm_problem(ds, rho > 0.0 ? rho : 1.0 / static_cast<double>(ds.m())));
}

/// Fraction of samples with sign(z_i^T a - offset) == t_i.
inline double accuracy(const ClassificationDataset& ds, const Vector& a, double offset = 0.0) {
  const Vector s = ds.Z * a;
  Index ok = 0;
  for (Index i = 0; i < ds.m(); ++i)
    if ((s[i] - offset >= 0.0 ? 1.0 : -1.0) == ds.t[i]) ++ok;
  return static_cast<double>(ok) / static_cast<double>(ds.m());
}

}  // namespace spars0::apps
