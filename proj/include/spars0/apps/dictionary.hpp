#pragma once

// Dictionary learning: min 1/2 ||Z - D^T C||_F^2 + rho ||C||_0 with unit-norm
// rows of D and C = C+ - C-.
//
// Variable layout: [C+ (l x m) | C- (l x m) | D^T (n x l)], all column-major,
// so every row of D is a contiguous block of length n.

#include "spars0/problem.hpp"

#include <random>

namespace spars0::apps {

struct DictionaryInstance {
  std::string name = "dictionary";
  Matrix Z;  // n x m
  Index l = 0;
  double rho = 0.1;
  Matrix true_D;  // l x n, when generated
  Matrix true_C;  // l x m, when generated
};

struct DictionaryLayout {
  Index n = 0, l = 0, m = 0;

  Index size() const { return 2 * l * m + n * l; }
  Index cplus() const { return 0; }
  Index cminus() const { return l * m; }
  Index d() const { return 2 * l * m; }

  Matrix C(const Vector& v) const {
    return Eigen::Map<const Matrix>(v.data() + cplus(), l, m) - Eigen::Map<const Matrix>(v.data() + cminus(), l, m);
  }
  /// D as an l x n matrix.
  Matrix D(const Vector& v) const { return Eigen::Map<const Matrix>(v.data() + d(), n, l).transpose(); }

  Vector pack(const Matrix& cplus_m, const Matrix& cminus_m, const Matrix& d_m) const {
    Vector v(size());
    Eigen::Map<Matrix>(v.data() + cplus(), l, m) = cplus_m;
    Eigen::Map<Matrix>(v.data() + cminus(), l, m) = cminus_m;
    Eigen::Map<Matrix>(v.data() + d(), n, l) = d_m.transpose();
    return v;
  }
};

inline DictionaryLayout dictionary_layout(const DictionaryInstance& inst) {
  return {inst.Z.rows(), inst.l, inst.Z.cols()};
}

/// Z = D^T C with `nnz_per_column` standard normal entries per column of C and
/// standard normal D with normalized rows.
inline DictionaryInstance gen_dictionary(Index n, Index l, Index m, Index nnz_per_column, std::uint64_t seed,
                                         double rho = 0.1) {
  if (nnz_per_column > l) throw PreconditionError("gen_dictionary: more nonzeros than atoms");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DictionaryInstance inst;
  inst.name = "dict_" + std::to_string(n) + "_" + std::to_string(l) + "_" + std::to_string(m) + "_s" +
              std::to_string(seed);
  inst.l = l;
  inst.rho = rho;
  inst.true_D.resize(l, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < l; ++i) inst.true_D(i, j) = normal(rng);
  inst.true_D.rowwise().normalize();
  inst.true_C = Matrix::Zero(l, m);
  std::vector<Index> atoms(static_cast<std::size_t>(l));
  for (Index i = 0; i < l; ++i) atoms[static_cast<std::size_t>(i)] = i;
  for (Index c = 0; c < m; ++c) {
    std::shuffle(atoms.begin(), atoms.end(), rng);
    for (Index k = 0; k < nnz_per_column; ++k) inst.true_C(atoms[static_cast<std::size_t>(k)], c) = normal(rng);
  }
  inst.Z = inst.true_D.transpose() * inst.true_C;
  return inst;
}

/// F = 1/2 ||Z - D^T C||^2; grad_C = D (D^T C - Z), grad_D = C (D^T C - Z)^T.
inline double dictionary_objective(const DictionaryLayout& lay, const Matrix& z, const Vector& v, Vector* grad) {
  const Matrix c = lay.C(v);
  const Matrix d = lay.D(v);
  const Matrix r = d.transpose() * c - z;  // n x m
  if (grad) {
    grad->resize(lay.size());
    const Matrix gc = d * r;               // l x m
    const Matrix gdt = r * c.transpose();  // n x l, the transpose of grad_D
    Eigen::Map<Matrix>(grad->data() + lay.cplus(), lay.l, lay.m) = gc;
    Eigen::Map<Matrix>(grad->data() + lay.cminus(), lay.l, lay.m) = -gc;
    Eigen::Map<Matrix>(grad->data() + lay.d(), lay.n, lay.l) = gdt;
  }
  return 0.5 * r.squaredNorm();
}

inline SparseProblem build_dictionary(const DictionaryInstance& inst) {
  const DictionaryLayout lay = dictionary_layout(inst);
  if (lay.l < 1 || lay.n < 1 || lay.m < 1) throw PreconditionError("dictionary: empty dimensions");
  SparseProblem p;
  p.name = inst.name;
  p.n = lay.size();
  p.rho = inst.rho;
  const Matrix z = inst.Z;
  p.objective = [lay, z](const Vector& v, Vector* grad) { return dictionary_objective(lay, z, v, grad); };
  p.lower = Vector::Zero(p.n);
  p.upper = Vector::Constant(p.n, kInf);
  p.lower.tail(lay.n * lay.l).setConstant(-kInf);
  p.sparse_mask.assign(static_cast<std::size_t>(p.n), false);
  for (Index i = 0; i < 2 * lay.l * lay.m; ++i) p.sparse_mask[static_cast<std::size_t>(i)] = true;
  p.balls.push_back({lay.d(), lay.l, lay.n, 1.0});
  return p;
}

/// Standard normal start projected onto the feasible set.
inline Vector dictionary_random_start(const SparseProblem& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  Vector v(p.n);
  for (Index i = 0; i < p.n; ++i) v[i] = normal(rng);
  return p.project(v);
}

/// ||P(D - grad_D F) - D||_inf, the stationarity measure of the D block.
inline double dictionary_d_residual(const SparseProblem& p, const DictionaryLayout& lay, const Vector& v) {
  Vector grad;
  p.objective(v, &grad);
  Vector step = v;
  step.segment(lay.d(), lay.n * lay.l) -= grad.segment(lay.d(), lay.n * lay.l);
  return inf_norm(Vector(p.project(step).segment(lay.d(), lay.n * lay.l) - v.segment(lay.d(), lay.n * lay.l)));
}

}  // namespace spars0::apps
