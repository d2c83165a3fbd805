#pragma once

// Brute-force global certification by enumerating supports, and a central
// finite-difference gradient checker.

#include "spars0/alm.hpp"

#include <atomic>
#include <random>
#include <thread>

namespace spars0 {

struct OracleOptions {
  Index max_n = 14;
  int starts = 3;
  double eps = 1e-7;
  double feasibility_tol = 1e-8;
  std::uint64_t seed = 0;
  int threads = 1;
  bool keep_table = true;
  AlmConfig alm;
};

struct RestrictedResult {
  bool feasible = false;
  double value = kInf;  // restricted minimum of f
  Vector x;
  SolveStatus status = SolveStatus::Infeasible;
};

namespace oracle_detail {

inline double violation(const SparseProblem& p, const Vector& x) {
  double v = p.p() > 0 ? inf_norm(p.h(x)) : 0.0;
  if (p.m() > 0) v = std::max(v, std::max(0.0, p.g(x).maxCoeff()));
  return v;
}

// Minimizes half the squared constraint violation over the bounds.
inline Vector phase_one(const SparseProblem& p, const Vector& x0) {
  if (p.m() == 0 && p.p() == 0) return p.project(x0);
  auto fg = [&p](const Vector& x, Vector& grad) {
    grad = Vector::Zero(x.size());
    double v = 0.0;
    if (p.m() > 0) {
      Vector g(p.m());
      Matrix j(p.m(), p.n);
      p.ineq.evaluate(x, g, &j);
      const Vector plus = g.cwiseMax(0.0);
      v += 0.5 * plus.squaredNorm();
      grad.noalias() += j.transpose() * plus;
    }
    if (p.p() > 0) {
      Vector h(p.p());
      Matrix j(p.p(), p.n);
      p.eq.evaluate(x, h, &j);
      v += 0.5 * h.squaredNorm();
      grad.noalias() += j.transpose() * h;
    }
    return v;
  };
  SpgOptions opt;
  opt.tol = 1e-13;
  opt.max_iter = 5000;
  return spg_solve(fg, [&p](const Vector& v) { return p.project(v); }, x0, opt).x;
}

}  // namespace oracle_detail

/// The problem with every sparse coordinate outside `support` fixed at 0.
inline SparseProblem restrict_to_support(const SparseProblem& problem, const IndexSet& support_set) {
  SparseProblem r = problem;
  std::vector<bool> keep(static_cast<std::size_t>(problem.n), false);
  for (Index i : support_set) {
    if (i < 0 || i >= problem.n) throw PreconditionError("restricted_solve: support index out of range");
    keep[static_cast<std::size_t>(i)] = true;
  }
  for (Index i = 0; i < problem.n; ++i) {
    if (problem.is_sparse(i) && !keep[static_cast<std::size_t>(i)]) {
      r.lower[i] = 0.0;
      r.upper[i] = 0.0;
    }
  }
  return r;
}

/// Minimizes f over the feasible set with x_i = 0 off the support, from three
/// starts (projected zero, random, box center); keeps the best feasible end.
inline RestrictedResult restricted_solve(const SparseProblem& problem, const IndexSet& support_set,
                                         const OracleOptions& opt = {}) {
  const SparseProblem r = restrict_to_support(problem, support_set);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<Vector> starts;
  starts.push_back(r.project(Vector::Zero(r.n)));
  if (opt.starts > 1) {
    Vector v(r.n);
    for (Index i = 0; i < r.n; ++i) {
      const double lo = std::isfinite(r.lower[i]) ? r.lower[i] : -1.0;
      const double hi = std::isfinite(r.upper[i]) ? r.upper[i] : lo + 2.0;
      v[i] = lo + (hi - lo) * unif(rng);
    }
    starts.push_back(r.project(v));
  }
  if (opt.starts > 2) {
    Vector v(r.n);
    for (Index i = 0; i < r.n; ++i) {
      const bool lf = std::isfinite(r.lower[i]);
      const bool uf = std::isfinite(r.upper[i]);
      v[i] = lf && uf ? 0.5 * (r.lower[i] + r.upper[i]) : lf ? r.lower[i] + 1.0 : uf ? r.upper[i] - 1.0 : 0.0;
    }
    starts.push_back(r.project(v));
  }

  RestrictedResult best;
  Vector lambda, mu;  // multiplier estimates shared between starts
  for (const Vector& s : starts) {
    const Vector x1 = oracle_detail::phase_one(r, s);
    if (oracle_detail::violation(r, x1) > 1e-6) continue;
    const AlmOutcome a = alm_minimize(r, x1, lambda, mu, opt.eps, opt.alm);
    if (a.status == SolveStatus::Converged) {
      lambda = a.lambda;
      mu = a.mu;
    }
    const Vector x = r.project(a.z);
    if (oracle_detail::violation(r, x) > opt.feasibility_tol) continue;
    const double v = r.f(x);
    if (!best.feasible || v < best.value) {
      best.feasible = true;
      best.value = v;
      best.x = x;
      best.status = a.status;
    }
  }
  return best;
}

struct SupportEntry {
  IndexSet support;
  bool feasible = false;
  double value = kInf;  // restricted f
  Vector x;
};

struct OracleResult {
  IndexSet best_support;
  Vector best_x;
  double best_value = kInf;
  bool feasible = false;
  std::vector<SupportEntry> table;
  std::size_t enumerated_count = 0;
};

/// Global minimum of f + rho * |S| over all supports S of the sparse
/// coordinates. Ties within 1e-9 go to the smaller, then lexicographically
/// smaller, support.
inline OracleResult enumerate_supports(const SparseProblem& problem, const OracleOptions& opt = {}) {
  problem.validate(false);
  const IndexSet idx = problem.sparse_indices();
  const Index ns = static_cast<Index>(idx.size());
  if (ns > opt.max_n)
    throw PreconditionError("enumerate_supports: " + std::to_string(ns) + " sparse coordinates exceed max_n = " +
                            std::to_string(opt.max_n));
  const std::size_t count = std::size_t{1} << ns;
  std::vector<SupportEntry> entries(count);

  auto work = [&](std::size_t mask) {
    SupportEntry& e = entries[mask];
    for (Index k = 0; k < ns; ++k)
      if (mask & (std::size_t{1} << k)) e.support.push_back(idx[static_cast<std::size_t>(k)]);
    OracleOptions o = opt;
    o.seed = opt.seed + mask;
    const RestrictedResult r = restricted_solve(problem, e.support, o);
    e.feasible = r.feasible;
    e.value = r.value;
    e.x = r.x;
  };
  const int threads = std::max(1, opt.threads);
  if (threads == 1) {
    for (std::size_t mask = 0; mask < count; ++mask) work(mask);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t mask = next++; mask < count; mask = next++) work(mask);
      });
    for (auto& th : pool) th.join();
  }

  OracleResult out;
  out.enumerated_count = count;
  const SupportEntry* best = nullptr;
  double best_total = kInf;
  for (const auto& e : entries) {
    if (!e.feasible) continue;
    const double total = e.value + problem.rho * static_cast<double>(e.support.size());
    bool take = best == nullptr || total < best_total - 1e-9;
    if (!take && std::abs(total - best_total) <= 1e-9) {
      take = e.support.size() < best->support.size() ||
             (e.support.size() == best->support.size() && e.support < best->support);
    }
    if (take) {
      best = &e;
      best_total = total;
    }
  }
  if (best) {
    out.feasible = true;
    out.best_support = best->support;
    out.best_x = best->x;
    out.best_value = best_total;
  }
  if (opt.keep_table) out.table = std::move(entries);
  return out;
}

/// Max over coordinates of |g_i - fd_i| / (1 + |fd_i|) with central differences.
template <class ValueGrad>
double gradient_check(ValueGrad&& fg, const Vector& x, double h = 1e-6) {
  if (!(h > 0.0)) throw PreconditionError("gradient_check: step must be positive");
  Vector g(x.size());
  fg(x, &g);
  Vector xp = x;
  double worst = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = fg(xp, nullptr);
    xp[i] = x[i] - h;
    const double fm = fg(xp, nullptr);
    xp[i] = x[i];
    const double fd = (fp - fm) / (2.0 * h);
    worst = std::max(worst, std::abs(g[i] - fd) / (1.0 + std::abs(fd)));
  }
  return worst;
}

}  // namespace spars0
