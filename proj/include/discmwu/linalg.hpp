#pragma once

// Dense symmetric linear algebra shared by the walks: eigendecomposition,
// orthonormal nullspace bases, and the deterministic choice of a unit vector
// inside a linearly constrained subspace. Backed by Eigen.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "discmwu/errors.hpp"

namespace discmwu {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative singular-value cutoff used to decide the rank of constraint rows.
inline constexpr double kRankCutoff = 1e-8;

/// Coordinates with magnitude at or below this count as zero when fixing the
/// sign of a vector.
inline constexpr double kSignEpsilon = 1e-12;

/// Square matrix with exactly symmetric, finite entries. Construction from an
/// arbitrary square matrix symmetrizes it as (A + Aᵀ)/2.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;

  explicit SymmetricMatrix(const Matrix& a) {
    if (a.rows() != a.cols()) {
      throw InputError("SymmetricMatrix: matrix is " + std::to_string(a.rows()) +
                       "x" + std::to_string(a.cols()) + ", expected square");
    }
    if (!a.allFinite()) {
      throw InputError("SymmetricMatrix: non-finite entry");
    }
    m_ = 0.5 * (a + a.transpose());
  }

  static SymmetricMatrix identity(Index n) {
    return SymmetricMatrix(Matrix::Identity(n, n));
  }

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// Eigenvalues sorted descending; column j of `vectors` belongs to value j.
struct EigenDecomposition {
  Vector values;
  Matrix vectors;

  Matrix reconstruct() const {
    return vectors * values.asDiagonal() * vectors.transpose();
  }
};

/// Flips `v` so its first coordinate of magnitude > kSignEpsilon is positive.
inline void normalize_sign(Eigen::Ref<Vector> v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > kSignEpsilon) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

namespace detail {

// Assumes `a` is exactly symmetric and finite.
inline EigenDecomposition eigh_unchecked(const Matrix& a) {
  const Index n = a.rows();
  EigenDecomposition out;
  if (n == 0) {
    out.values.resize(0);
    out.vectors.resize(0, 0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw InvariantViolation("eigh: eigensolver did not converge");
  }
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  for (Index j = 0; j < n; ++j) normalize_sign(out.vectors.col(j));
  return out;
}

}  // namespace detail

/// Full eigendecomposition A = Σ μⱼ uⱼ uⱼᵀ with μ₁ ≥ … ≥ μₙ. Eigenvectors are
/// sign-normalized (first nonzero coordinate positive) so repeated runs agree.
inline EigenDecomposition eigh(const SymmetricMatrix& a) {
  return detail::eigh_unchecked(a.matrix());
}

namespace detail {

// Solves (T - shift I) z = b in place for symmetric tridiagonal T given by
// `diag` and `sub`, using Gaussian elimination with partial pivoting. Zero
// pivots are replaced by `tiny`, which is what inverse iteration wants.
inline void solve_shifted_tridiagonal(const Vector& diag, const Vector& sub,
                                      double shift, double tiny, Vector& b) {
  const Index n = diag.size();
  // Row i of the upper factor has nonzeros at columns i, i+1, i+2.
  Vector u0(n), u1(n), u2(n);
  Vector lower(n);
  std::vector<char> swapped(static_cast<std::size_t>(n), 0);
  double a = diag(0) - shift;
  double c = n > 1 ? sub(0) : 0.0;
  double d = 0.0;
  for (Index i = 0; i + 1 < n; ++i) {
    const double below = sub(i);
    const double next_diag = diag(i + 1) - shift;
    const double next_super = i + 2 < n ? sub(i + 1) : 0.0;
    if (std::abs(a) >= std::abs(below)) {
      if (a == 0.0) a = tiny;
      const double l = below / a;
      lower(i) = l;
      u0(i) = a;
      u1(i) = c;
      u2(i) = d;
      a = next_diag - l * c;
      c = next_super - l * d;
      d = 0.0;
    } else {
      const double l = a / below;
      lower(i) = l;
      swapped[static_cast<std::size_t>(i)] = 1;
      u0(i) = below;
      u1(i) = next_diag;
      u2(i) = next_super;
      a = c - l * next_diag;
      c = d - l * next_super;
      d = 0.0;
    }
  }
  if (a == 0.0) a = tiny;
  u0(n - 1) = a;
  u1(n - 1) = 0.0;
  u2(n - 1) = 0.0;
  for (Index i = 0; i + 1 < n; ++i) {
    if (swapped[static_cast<std::size_t>(i)]) std::swap(b(i), b(i + 1));
    b(i + 1) -= lower(i) * b(i);
  }
  for (Index i = n - 1; i >= 0; --i) {
    double r = b(i);
    if (i + 1 < n) r -= u1(i) * b(i + 1);
    if (i + 2 < n) r -= u2(i) * b(i + 2);
    b(i) = r / u0(i);
  }
}

}  // namespace detail

/// The k largest eigenpairs of a symmetric matrix, descending, with the same
/// sign convention as eigh. Reduces to tridiagonal form once, finds the
/// eigenvalues there, and recovers only the k wanted eigenvectors by inverse
/// iteration (orthogonalized within clusters of close eigenvalues), which
/// is several times cheaper than the full decomposition when k is small.
inline EigenDecomposition top_eigenpairs(const Matrix& a, Index k) {
  const Index n = a.rows();
  if (k < 0 || k > n) {
    throw InputError("top_eigenpairs: k out of range");
  }
  EigenDecomposition out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  if (k == 0) return out;
  if (n <= 2 || 4 * k > n) {
    EigenDecomposition full = detail::eigh_unchecked(a);
    out.values = full.values.head(k);
    out.vectors = full.vectors.leftCols(k);
    return out;
  }

  Eigen::Tridiagonalization<Matrix> tri(a);
  const Vector diag = tri.diagonal();
  const Vector sub = tri.subDiagonal();
  double scale = 0.0;
  for (Index i = 0; i < n; ++i) {
    double row = std::abs(diag(i));
    if (i > 0) row += std::abs(sub(i - 1));
    if (i + 1 < n) row += std::abs(sub(i));
    scale = std::max(scale, row);
  }
  if (scale == 0.0) scale = 1.0;
  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = eps * scale;
  const double cluster_gap = 1e-3 * scale;

  // The k largest eigenvalues by simultaneous bisection on the Gershgorin
  // interval. The j-th largest is the smallest x whose Sturm count (number
  // of eigenvalues of T strictly below x) exceeds n - 1 - j. All k
  // bisections run in lockstep so their division chains overlap.
  Eigen::ArrayXd lo = Eigen::ArrayXd::Constant(k, -scale - tiny);
  Eigen::ArrayXd hi = Eigen::ArrayXd::Constant(k, scale + tiny);
  Eigen::ArrayXd target(k);
  for (Index j = 0; j < k; ++j) target(j) = static_cast<double>(n - 1 - j);
  for (int iter = 0; iter < 128; ++iter) {
    const Eigen::ArrayXd mid = 0.5 * (lo + hi);
    const Eigen::ArrayXd width = hi - lo;
    const Eigen::ArrayXd limit =
        2.0 * eps * lo.abs().max(hi.abs()) + tiny;
    if ((width <= limit).all()) break;
    Eigen::ArrayXd q = diag(0) - mid;
    Eigen::ArrayXd count = (q < 0.0).cast<double>();
    for (Index i = 1; i < n; ++i) {
      q = (q == 0.0).select(-tiny, q);
      q = (diag(i) - mid) - (sub(i - 1) * sub(i - 1)) / q;
      count += (q < 0.0).cast<double>();
    }
    const auto above = count > target;
    hi = above.select(mid, hi);
    lo = above.select(lo, mid);
  }
  const Eigen::ArrayXd top_values = 0.5 * (lo + hi);

  Matrix z(n, k);
  Index cluster_start = 0;
  for (Index j = 0; j < k; ++j) {
    const double mu = top_values(j);
    if (j > 0 && out.values(j - 1) - mu > cluster_gap) cluster_start = j;
    out.values(j) = mu;
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
      v(i) = 1.0 + 0.5 * std::sin(static_cast<double>(i * (j + 3) + 1));
    }
    // A slight perturbation separates coincident shifts inside a cluster.
    const double shift = mu + static_cast<double>(j - cluster_start) * 10.0 * tiny;
    for (int iter = 0; iter < 8; ++iter) {
      v /= v.norm();
      Vector w = v;
      detail::solve_shifted_tridiagonal(diag, sub, shift, tiny, w);
      for (Index p = cluster_start; p < j; ++p) {
        w -= z.col(p).dot(w) * z.col(p);
      }
      const double growth = w.norm();
      v = w / growth;
      Vector tv = diag.cwiseProduct(v);
      tv.head(n - 1) += sub.cwiseProduct(v.tail(n - 1));
      tv.tail(n - 1) += sub.cwiseProduct(v.head(n - 1));
      if (iter >= 1 && (tv - mu * v).norm() <= 64.0 * n * tiny) break;
    }
    z.col(j) = v;
  }
  out.vectors = tri.matrixQ() * z;
  for (Index j = 0; j < k; ++j) normalize_sign(out.vectors.col(j));
  return out;
}

/// Orthonormal basis of a linear subspace of ℝ^ambient_dim, one vector per
/// column of `basis`.
struct SubspaceBasis {
  Index ambient_dim = 0;
  Matrix basis;

  Index dim() const { return basis.cols(); }
};

namespace detail {

// Row space of a constraint matrix, factored so that columns of Q beyond
// `rank` span its orthogonal complement. Zero rows are ignored and the
// remaining rows are scaled to unit length first, so tiny but genuine
// constraints are not lost to the relative rank cutoff.
class RowSpaceFactor {
 public:
  explicit RowSpaceFactor(const Matrix& rows) : ambient_(rows.cols()) {
    std::vector<Index> keep;
    keep.reserve(static_cast<std::size_t>(rows.rows()));
    Vector norms(rows.rows());
    for (Index i = 0; i < rows.rows(); ++i) {
      norms(i) = rows.row(i).norm();
      if (!std::isfinite(norms(i))) {
        throw InputError("nullspace: non-finite constraint row");
      }
      if (norms(i) > 0.0) keep.push_back(i);
    }
    if (keep.empty() || ambient_ == 0) return;

    Matrix scaled(static_cast<Index>(keep.size()), ambient_);
    for (std::size_t r = 0; r < keep.size(); ++r) {
      scaled.row(static_cast<Index>(r)) = rows.row(keep[r]) / norms(keep[r]);
    }
    Eigen::JacobiSVD<Matrix> svd(scaled, Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double cutoff = kRankCutoff * sv(0);
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > cutoff) ++rank_;
    }
    if (rank_ > 0) {
      qr_.compute(svd.matrixV().leftCols(rank_));
    }
  }

  Index rank() const { return rank_; }
  Index nullity() const { return ambient_ - rank_; }

  // c-th column of the orthogonal factor; for c >= rank() these columns are
  // an orthonormal basis of the nullspace.
  Vector column(Index c) const {
    Vector e = Vector::Unit(ambient_, c);
    if (rank_ == 0) return e;
    return qr_.householderQ() * e;
  }

 private:
  Index ambient_;
  Index rank_ = 0;
  Eigen::HouseholderQR<Matrix> qr_;
};

}  // namespace detail

/// Orthonormal basis of {x : ⟨r, x⟩ = 0 for every row r of `rows`}.
/// `rows` is k × ambient; k = 0 yields the whole space.
inline SubspaceBasis nullspace_intersection(const Matrix& rows) {
  detail::RowSpaceFactor f(rows);
  SubspaceBasis out;
  out.ambient_dim = rows.cols();
  out.basis.resize(rows.cols(), f.nullity());
  for (Index c = 0; c < f.nullity(); ++c) {
    out.basis.col(c) = f.column(f.rank() + c);
  }
  return out;
}

inline SubspaceBasis nullspace_intersection(std::span<const Vector> rows,
                                            Index ambient_dim) {
  Matrix stacked(static_cast<Index>(rows.size()), ambient_dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != ambient_dim) {
      throw InputError("nullspace_intersection: row " + std::to_string(i) +
                       " has length " + std::to_string(rows[i].size()) +
                       ", expected " + std::to_string(ambient_dim));
    }
    stacked.row(static_cast<Index>(i)) = rows[i].transpose();
  }
  return nullspace_intersection(stacked);
}

/// First basis vector, sign-normalized. Deterministic.
inline Vector pick_unit_vector(const SubspaceBasis& u) {
  if (u.dim() == 0) {
    throw SubspaceExhausted("pick_unit_vector: subspace has dimension 0");
  }
  Vector v = u.basis.col(0);
  normalize_sign(v);
  return v;
}

/// Dimension of the nullspace of `rows` together with the vector
/// pick_unit_vector(nullspace_intersection(rows)) would return, without
/// materializing the whole basis. `direction` is empty when the dimension is 0.
struct NullDirection {
  Index dim = 0;
  Vector direction;
};

inline NullDirection first_null_direction(const Matrix& rows) {
  detail::RowSpaceFactor f(rows);
  NullDirection out;
  out.dim = f.nullity();
  if (out.dim > 0) {
    out.direction = f.column(f.rank());
    normalize_sign(out.direction);
  }
  return out;
}

}  // namespace discmwu
