#pragma once

// Balancing block-diagonal symmetric matrices: signs xᵢ ∈ {−1, 1} keeping
// ‖Σ xᵢAᵢ‖_op small when every Aᵢ is q-block diagonal with ‖Aᵢ‖_op ≤ 1.
//
// The walk keeps the potential Tr exp(ε Σ (xᵢ − x⁽⁰⁾ᵢ)Aᵢ) summed over Aᵢ and
// −Aᵢ, so both spectral tails are controlled. Each step is orthogonal to the
// current point, keeps the heaviest blocks fixed, has zero first-order
// effect on the potential and avoids the directions where the second-order
// term exceeds 16·Tr W. Phases are repeated until every sign is fixed.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "discmwu/coloring.hpp"
#include "discmwu/errors.hpp"
#include "discmwu/linalg.hpp"
#include "discmwu/partial_coloring.hpp"
#include "discmwu/trace.hpp"

namespace discmwu {

/// n symmetric m×m matrices Aᵢ = diag(B_{i,1}, …, B_{i,m/q}) stored by block.
struct BlockMatrixFamily {
  Index n = 0;
  Index m = 0;
  Index q = 1;
  std::vector<std::vector<Matrix>> blocks;  // blocks[i][k] is q×q

  Index block_count() const { return q > 0 ? m / q : 0; }

  Matrix dense(Index i) const {
    Matrix a = Matrix::Zero(m, m);
    for (Index k = 0; k < block_count(); ++k) {
      a.block(k * q, k * q, q, q) =
          blocks[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    return a;
  }
};

inline constexpr double kOperatorNormTolerance = 1e-9;
inline constexpr double kBlockSymmetryTolerance = 1e-12;

/// Checks shapes, finiteness, symmetry (to 1e-12, then symmetrizes in place)
/// and ‖Aᵢ‖_op ≤ 1 + 1e-9.
inline void validate(BlockMatrixFamily& fam) {
  if (fam.n < 1) throw InputError("block family: n must be positive");
  if (fam.q < 1 || fam.m < 1 || fam.m % fam.q != 0) {
    throw InputError("block family: q = " + std::to_string(fam.q) +
                     " must divide m = " + std::to_string(fam.m));
  }
  if (static_cast<Index>(fam.blocks.size()) != fam.n) {
    throw InputError("block family: expected " + std::to_string(fam.n) +
                     " matrices, got " + std::to_string(fam.blocks.size()));
  }
  for (Index i = 0; i < fam.n; ++i) {
    auto& mats = fam.blocks[static_cast<std::size_t>(i)];
    if (static_cast<Index>(mats.size()) != fam.block_count()) {
      throw InputError("block family: matrix " + std::to_string(i + 1) +
                       " has " + std::to_string(mats.size()) + " blocks, expected " +
                       std::to_string(fam.block_count()));
    }
    for (std::size_t k = 0; k < mats.size(); ++k) {
      Matrix& b = mats[k];
      const std::string where = "block family: matrix " + std::to_string(i + 1) +
                                " block " + std::to_string(k + 1);
      if (b.rows() != fam.q || b.cols() != fam.q) {
        throw InputError(where + " is not q x q");
      }
      if (!b.allFinite()) throw InputError(where + " has a non-finite entry");
      if ((b - b.transpose()).cwiseAbs().maxCoeff() > kBlockSymmetryTolerance) {
        throw InputError(where + " is not symmetric");
      }
      b = 0.5 * (b + b.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Matrix> es(b, Eigen::EigenvaluesOnly);
      const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
      if (norm > 1.0 + kOperatorNormTolerance) {
        throw InputError(where + " has operator norm " + std::to_string(norm) +
                         " > 1");
      }
    }
  }
}

/// exp(B) through the eigendecomposition of B.
inline SymmetricMatrix sym_exp(const SymmetricMatrix& b) {
  if (b.dim() == 0) return b;
  Eigen::SelfAdjointEigenSolver<Matrix> es(b.matrix());
  const Matrix& v = es.eigenvectors();
  return SymmetricMatrix(v * es.eigenvalues().array().exp().matrix().asDiagonal() *
                         v.transpose());
}

/// Σᵢ cᵢ B_{i,k} for one block.
inline Matrix block_sum(const BlockMatrixFamily& fam, Index k, const Vector& c) {
  Matrix s = Matrix::Zero(fam.q, fam.q);
  for (Index i = 0; i < fam.n; ++i) {
    if (c(i) != 0.0) {
      s += c(i) * fam.blocks[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
  }
  return s;
}

/// ‖Σᵢ cᵢAᵢ‖_op, the largest |eigenvalue| over all blocks.
inline double signed_sum_norm(const BlockMatrixFamily& fam, const Vector& c) {
  double worst = 0.0;
  for (Index k = 0; k < fam.block_count(); ++k) {
    const Matrix s = block_sum(fam, k, c);
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return worst;
}

/// W = exp(ε Σᵢ (xᵢ − x⁽⁰⁾ᵢ)Aᵢ), one q×q block per diagonal block.
struct BlockWeights {
  std::vector<Matrix> blocks;
  Vector block_traces;  // Φ_k

  double trace() const { return block_traces.sum(); }
};

inline BlockWeights weight_matrix(const BlockMatrixFamily& fam, const Vector& x,
                                  const Vector& x0, double epsilon) {
  const Vector diff = x - x0;
  BlockWeights w;
  w.blocks.reserve(static_cast<std::size_t>(fam.block_count()));
  w.block_traces.resize(fam.block_count());
  for (Index k = 0; k < fam.block_count(); ++k) {
    const SymmetricMatrix e =
        sym_exp(SymmetricMatrix(epsilon * block_sum(fam, k, diff)));
    w.block_traces(k) = e.matrix().trace();
    w.blocks.push_back(e.matrix());
  }
  return w;
}

namespace matrix_detail {

// Block k of every matrix, vectorized column-major: column i is vec(B_{i,k}).
inline std::vector<Matrix> stacked_blocks(const BlockMatrixFamily& fam) {
  const Index q2 = fam.q * fam.q;
  std::vector<Matrix> out(static_cast<std::size_t>(fam.block_count()),
                          Matrix(q2, fam.n));
  for (Index k = 0; k < fam.block_count(); ++k) {
    for (Index i = 0; i < fam.n; ++i) {
      out[static_cast<std::size_t>(k)].col(i) = Eigen::Map<const Vector>(
          fam.blocks[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].data(),
          q2);
    }
  }
  return out;
}

// M restricted to `cols`: M_ij = Σ_k S_k • (B_{i,k}B_{j,k}) =
// Σ_k vec(B_{j,k})ᵀ (S_k ⊗ I) vec(B_{i,k}).
inline Matrix quadratic_form(const std::vector<Matrix>& stacks,
                             const std::vector<Matrix>& weights,
                             const std::vector<Index>& cols, Index q) {
  const Index d = static_cast<Index>(cols.size());
  Matrix m = Matrix::Zero(d, d);
  Matrix kron(q * q, q * q);
  for (std::size_t k = 0; k < stacks.size(); ++k) {
    const Matrix f = stacks[k](Eigen::all, cols);
    const Matrix& s = weights[k];
    kron.setZero();
    for (Index a = 0; a < q; ++a) {
      for (Index b = 0; b < q; ++b) {
        kron.block(a * q, b * q, q, q).diagonal().setConstant(s(a, b));
      }
    }
    m.noalias() += f.transpose() * (kron * f);
  }
  return 0.5 * (m + m.transpose());
}

}  // namespace matrix_detail

/// Constraint rows (in ℝⁿ) spanning the eigenvectors of M, M_ij = W•AᵢAⱼ,
/// with eigenvalue ≥ k·Tr W. Every unit y orthogonal to them satisfies
/// W•(Σ yᵢAᵢ)² ≤ k·Tr W, and there are at most n/k of them.
inline Matrix quadratic_error_subspace(const BlockWeights& w,
                                       const BlockMatrixFamily& fam, double k) {
  std::vector<Index> all(static_cast<std::size_t>(fam.n));
  std::iota(all.begin(), all.end(), Index{0});
  const Matrix m = matrix_detail::quadratic_form(matrix_detail::stacked_blocks(fam),
                                                 w.blocks, all, fam.q);
  const EigenDecomposition eig = detail::eigh_unchecked(m);
  const double threshold = k * w.trace();
  Index count = 0;
  while (count < eig.values.size() && eig.values(count) >= threshold) ++count;
  return eig.vectors.leftCols(count).transpose();
}

/// The potential scale ε = √(max(1, ln(2qm/n))/n) for a walk over n matrices.
inline double matrix_epsilon(Index n, Index m, Index q) {
  const double nn = static_cast<double>(n);
  const double arg = std::log(2.0 * static_cast<double>(q) * static_cast<double>(m) / nn);
  return std::sqrt(std::max(1.0, arg) / nn);
}

struct MatrixPartialResult {
  Vector x;
  WalkTrace trace;
  double epsilon = 0.0;
  double delta = 0.0;
};

namespace matrix_detail {

// Per-step data for the doubled family {Aᵢ} ∪ {−Aᵢ}.
struct DoubledWeights {
  std::vector<Matrix> plus, minus, sum;
  Vector traces;  // first block_count entries for +, then for −
  double total = 0.0;
};

inline DoubledWeights doubled_weights(const std::vector<Matrix>& stacks,
                                      const Vector& diff, double epsilon, Index q) {
  DoubledWeights w;
  const Index blocks = static_cast<Index>(stacks.size());
  w.traces.resize(2 * blocks);
  for (Index k = 0; k < blocks; ++k) {
    const Vector flat = stacks[static_cast<std::size_t>(k)] * diff;
    Matrix s = Eigen::Map<const Matrix>(flat.data(), q, q);
    s = 0.5 * (s + s.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    const Matrix& v = es.eigenvectors();
    const Eigen::ArrayXd up = (epsilon * es.eigenvalues().array()).exp();
    const Eigen::ArrayXd down = (-epsilon * es.eigenvalues().array()).exp();
    w.plus.push_back(v * up.matrix().asDiagonal() * v.transpose());
    w.minus.push_back(v * down.matrix().asDiagonal() * v.transpose());
    w.sum.push_back(w.plus.back() + w.minus.back());
    w.traces(k) = up.sum();
    w.traces(blocks + k) = down.sum();
  }
  w.total = w.traces.sum();
  return w;
}

inline double doubled_potential(const std::vector<Matrix>& stacks,
                                const Vector& diff, double epsilon, Index q) {
  double total = 0.0;
  for (const Matrix& st : stacks) {
    const Vector flat = st * diff;
    Matrix s = Eigen::Map<const Matrix>(flat.data(), q, q);
    s = 0.5 * (s + s.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    total += (epsilon * es.eigenvalues().array()).exp().sum() +
             (-epsilon * es.eigenvalues().array()).exp().sum();
  }
  return total;
}

// Minimizes ‖Σ (xᵢ − x⁽⁰⁾ᵢ)Aᵢ‖_op over sign patterns of the free coordinates.
inline Vector exhaustive(const BlockMatrixFamily& fam, const Vector& x0) {
  Vector x = x0;
  const std::vector<Index> free = partial::active_coordinates(x0);
  const Index k = static_cast<Index>(free.size());
  for (Index j : free) x(j) = 1.0;
  if (k == 0) return x;
  const Index blocks = fam.block_count();
  std::vector<Matrix> sums(static_cast<std::size_t>(blocks));
  const Vector diff = x - x0;
  for (Index b = 0; b < blocks; ++b) {
    sums[static_cast<std::size_t>(b)] = block_sum(fam, b, diff);
  }
  auto objective = [&] {
    double worst = 0.0;
    for (const Matrix& s : sums) {
      if (fam.q == 1) {
        worst = std::max(worst, std::abs(s(0, 0)));
      } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
        worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
      }
    }
    return worst;
  };
  Vector best = x;
  double best_value = objective();
  const std::uint64_t total = std::uint64_t{1} << k;
  for (std::uint64_t g = 1; g < total; ++g) {
    const Index j = free[static_cast<std::size_t>(std::countr_zero(g))];
    const double change = -2.0 * x(j);
    x(j) = -x(j);
    for (Index b = 0; b < blocks; ++b) {
      sums[static_cast<std::size_t>(b)] +=
          change * fam.blocks[static_cast<std::size_t>(j)][static_cast<std::size_t>(b)];
    }
    const double value = objective();
    if (value < best_value) {
      best_value = value;
      best = x;
    }
  }
  return best;
}

}  // namespace matrix_detail

/// Partial coloring: from x⁽⁰⁾ walk until at least half of the coordinates
/// are ±1. Families with n < 16 are colored exhaustively.
inline MatrixPartialResult run_partial(const BlockMatrixFamily& family,
                                       const Vector& x0) {
  BlockMatrixFamily fam = family;
  validate(fam);
  if (x0.size() != fam.n) {
    throw InputError("run_partial: start has length " + std::to_string(x0.size()) +
                     ", family has n = " + std::to_string(fam.n));
  }
  for (Index j = 0; j < fam.n; ++j) {
    if (!(x0(j) >= -1.0 && x0(j) <= 1.0)) {
      throw InputError("run_partial: start coordinate outside [-1,1]");
    }
  }
  const Index n = fam.n;
  const Index q = fam.q;
  const double nn = static_cast<double>(n);
  MatrixPartialResult out;
  out.epsilon = matrix_epsilon(n, fam.m, q);
  out.delta = 1.0 / std::sqrt(nn);
  const double eps = out.epsilon;
  const double delta = out.delta;

  const std::vector<Matrix> stacks = matrix_detail::stacked_blocks(fam);
  Vector x = x0;
  std::vector<Index> act = partial::active_coordinates(x);

  auto record = [&](std::size_t t, double phi) {
    IterationRecord rec;
    rec.t = t;
    rec.potential = phi;
    rec.log_potential = std::log(phi);
    rec.step_size = delta;
    rec.active = act.size();
    return rec;
  };

  if (partial::detail::half_frozen(x)) {
    out.trace.records.push_back(
        record(0, matrix_detail::doubled_potential(stacks, x - x0, eps, q)));
    out.x = x;
    return out;
  }
  if (n < partial::kExhaustiveBelow) {
    out.trace.exhaustive = true;
    out.trace.records.push_back(
        record(0, matrix_detail::doubled_potential(stacks, x - x0, eps, q)));
    out.x = matrix_detail::exhaustive(fam, x0);
    return out;
  }

  const Index heavy_blocks = n / (16 * q * q);
  const Index rows_per_block = q * (q + 1) / 2;
  const std::size_t cap =
      static_cast<std::size_t>(std::floor(2.0 * nn / (delta * delta)));
  const Index blocks = fam.block_count();

  for (std::size_t t = 0;; ++t) {
    const Vector diff = x - x0;
    const matrix_detail::DoubledWeights w =
        matrix_detail::doubled_weights(stacks, diff, eps, q);
    IterationRecord rec = record(t, w.total);
    if (partial::detail::half_frozen(x)) {
      out.trace.records.push_back(rec);
      break;
    }
    if (t >= cap) {
      out.trace.records.push_back(rec);
      throw AlgorithmStuck("matrix balancing: iteration bound 2n/delta^2 = " +
                               std::to_string(cap) + " exceeded",
                           std::move(out.trace));
    }
    const Index d = static_cast<Index>(act.size());

    // Heaviest blocks of the doubled family; ties to the smaller index.
    std::vector<Index> order(static_cast<std::size_t>(2 * blocks));
    std::iota(order.begin(), order.end(), Index{0});
    const Index chosen = std::min<Index>(heavy_blocks, 2 * blocks);
    std::partial_sort(order.begin(), order.begin() + chosen, order.end(),
                      [&](Index a, Index b) {
                        if (w.traces(a) != w.traces(b)) return w.traces(a) > w.traces(b);
                        return a < b;
                      });

    const Matrix quad = matrix_detail::quadratic_form(stacks, w.sum, act, q);
    const double threshold = 16.0 * w.total;
    const Index probe = std::min<Index>(d / 16 + 1, d);
    const EigenDecomposition top = top_eigenpairs(quad, probe);
    Index spectral = 0;
    while (spectral < probe && top.values(spectral) >= threshold) ++spectral;
    if (spectral == probe && probe > d / 16) {
      throw InvariantViolation(
          "matrix balancing: more than |A|/16 large eigenvalues of M");
    }

    Matrix rows(1 + chosen * rows_per_block + 1 + spectral, d);
    Index r = 0;
    rows.row(r++) = x(act).transpose();
    for (Index c = 0; c < chosen; ++c) {
      const Index k = order[static_cast<std::size_t>(c)] % blocks;
      const Matrix& st = stacks[static_cast<std::size_t>(k)];
      for (Index b = 0; b < q; ++b) {
        for (Index a = 0; a <= b; ++a) {
          rows.row(r++) = st(a + q * b, act);
        }
      }
    }
    Vector first_order = Vector::Zero(d);
    for (Index k = 0; k < blocks; ++k) {
      const Matrix net = w.plus[static_cast<std::size_t>(k)] -
                         w.minus[static_cast<std::size_t>(k)];
      const Eigen::Map<const Vector> flat(net.data(), q * q);
      first_order.noalias() +=
          stacks[static_cast<std::size_t>(k)](Eigen::all, act).transpose() * flat;
    }
    const Index first_order_row = r;
    rows.row(r++) = first_order.transpose();
    for (Index j = 0; j < spectral; ++j) {
      rows.row(r++) = top.vectors.col(j).transpose();
    }

    const NullDirection dir = first_null_direction(rows);
    rec.subspace_dim = static_cast<long>(dir.dim);
    if (dir.dim == 0) {
      out.trace.records.push_back(rec);
      throw AlgorithmStuck("matrix balancing: empty subspace at iteration " +
                               std::to_string(t),
                           std::move(out.trace));
    }
    Vector z = Vector::Zero(n);
    z(act) = dir.direction;
    const double alpha = partial::max_step(x, z, delta);
    const Vector ya = alpha * dir.direction;
    rec.step_scale = alpha;
    rec.quadratic_ratio = ya.dot(quad * ya) / threshold;
    rec.linear_residual = std::abs(rows.row(first_order_row).dot(ya)) / w.total;
    out.trace.records.push_back(rec);

    x = partial::apply_step(x, z, delta, alpha);
    act = partial::active_coordinates(x);
  }
  out.x = x;
  return out;
}

struct MatrixPhaseTrace {
  std::vector<Index> active;
  double epsilon = 0.0;
  double delta = 0.0;
  WalkTrace walk;
  Vector x_start;
  Vector x_end;
};

struct MatrixFullResult {
  Coloring chi;
  std::vector<MatrixPhaseTrace> phases;
};

/// The sub-family {Aᵢ : i ∈ idx}.
inline BlockMatrixFamily restrict_family(const BlockMatrixFamily& fam,
                                         const std::vector<Index>& idx) {
  BlockMatrixFamily sub;
  sub.n = static_cast<Index>(idx.size());
  sub.m = fam.m;
  sub.q = fam.q;
  sub.blocks.reserve(idx.size());
  for (Index i : idx) sub.blocks.push_back(fam.blocks[static_cast<std::size_t>(i)]);
  return sub;
}

/// Full coloring by phases over the still-fractional coordinates, then
/// rounding any leftover fractional value to its sign (0 → +1).
inline MatrixFullResult run_full(const BlockMatrixFamily& fam) {
  BlockMatrixFamily checked = fam;
  validate(checked);
  Vector x = Vector::Zero(checked.n);
  MatrixFullResult out;
  while (true) {
    const std::vector<Index> act = partial::active_coordinates(x);
    if (act.empty()) break;
    const BlockMatrixFamily sub = restrict_family(checked, act);
    MatrixPhaseTrace phase;
    phase.active = act;
    phase.x_start = x(act);
    MatrixPartialResult res = run_partial(sub, phase.x_start);
    phase.epsilon = res.epsilon;
    phase.delta = res.delta;
    phase.walk = std::move(res.trace);
    phase.x_end = res.x;
    x(act) = res.x;
    if (partial::active_coordinates(x).size() * 2 > act.size()) {
      throw InvariantViolation("matrix balancing: phase froze fewer than half");
    }
    out.phases.push_back(std::move(phase));
  }
  out.chi = sign_round(x);
  return out;
}

}  // namespace discmwu
