#include <random>

#include <gtest/gtest.h>

#include "discmwu/errors.hpp"
#include "discmwu/linalg.hpp"

using namespace discmwu;

namespace {

Matrix random_symmetric(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) a(i, j) = a(j, i) = g(rng);
  }
  return a;
}

double orthonormality_error(const Matrix& v) {
  return (v.transpose() * v - Matrix::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(SymmetricMatrix, SymmetrizesOnConstruction) {
  Matrix a(2, 2);
  a << 1, 2, 4, 3;
  SymmetricMatrix s(a);
  EXPECT_EQ(s(0, 1), 3.0);
  EXPECT_EQ(s(1, 0), 3.0);
}

TEST(SymmetricMatrix, RejectsNonFiniteAndNonSquare) {
  Matrix a = Matrix::Identity(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(SymmetricMatrix{a}, InputError);
  EXPECT_THROW(SymmetricMatrix{Matrix::Zero(2, 3)}, InputError);
}

TEST(Eigh, IdentityHasUnitEigenvalues) {
  const EigenDecomposition e = eigh(SymmetricMatrix::identity(3));
  EXPECT_TRUE(e.values.isApprox(Vector::Ones(3)));
  EXPECT_LT(orthonormality_error(e.vectors), 1e-12);
}

TEST(Eigh, DiagonalSortedDescendingWithBasisVectors) {
  Matrix a = Vector(Vector::LinSpaced(3, 0, 0)).asDiagonal();
  a(0, 0) = 3;
  a(1, 1) = 1;
  a(2, 2) = 2;
  const EigenDecomposition e = eigh(SymmetricMatrix(a));
  EXPECT_DOUBLE_EQ(e.values(0), 3);
  EXPECT_DOUBLE_EQ(e.values(1), 2);
  EXPECT_DOUBLE_EQ(e.values(2), 1);
  EXPECT_NEAR(e.vectors(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(e.vectors(2, 1), 1.0, 1e-15);
  EXPECT_NEAR(e.vectors(1, 2), 1.0, 1e-15);
}

TEST(Eigh, ReconstructsRandomMatrices) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 1 + static_cast<Index>(rng() % 32);
    const Matrix a = random_symmetric(n, rng);
    const EigenDecomposition e = eigh(SymmetricMatrix(a));
    EXPECT_LE((e.reconstruct() - a).norm(), 1e-8 * std::max(1.0, a.norm()));
    EXPECT_LE(orthonormality_error(e.vectors), 1e-9);
    for (Index i = 1; i < n; ++i) EXPECT_GE(e.values(i - 1), e.values(i));
  }
}

TEST(Eigh, EigenvectorSignsAreNormalized) {
  std::mt19937_64 rng(5);
  const Matrix a = random_symmetric(6, rng);
  const EigenDecomposition e = eigh(SymmetricMatrix(a));
  for (Index c = 0; c < 6; ++c) {
    for (Index r = 0; r < 6; ++r) {
      if (std::abs(e.vectors(r, c)) > kSignEpsilon) {
        EXPECT_GT(e.vectors(r, c), 0.0);
        break;
      }
    }
  }
}

TEST(TopEigenpairs, MatchesFullDecomposition) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 2 + static_cast<Index>(rng() % 60);
    Matrix g = random_symmetric(n, rng);
    const Matrix a = g * g.transpose();  // psd, as used by the walks
    const Index k = 1 + static_cast<Index>(rng() % n);
    const EigenDecomposition full = eigh(SymmetricMatrix(a));
    const EigenDecomposition top = top_eigenpairs(a, k);
    ASSERT_EQ(top.values.size(), k);
    ASSERT_EQ(top.vectors.cols(), k);
    const double scale = std::max(1.0, full.values.cwiseAbs().maxCoeff());
    for (Index i = 0; i < k; ++i) {
      EXPECT_NEAR(top.values(i), full.values(i), 1e-10 * scale);
      const Vector residual = a * top.vectors.col(i) - top.values(i) * top.vectors.col(i);
      EXPECT_LE(residual.norm(), 1e-8 * scale);
    }
    EXPECT_LE(orthonormality_error(top.vectors), 1e-9);
  }
}

TEST(TopEigenpairs, HandlesRepeatedEigenvalues) {
  Matrix a = Matrix::Zero(6, 6);
  a.diagonal() << 5, 5, 5, 1, 1, 0;
  std::mt19937_64 rng(3);
  const EigenDecomposition q = eigh(SymmetricMatrix(random_symmetric(6, rng)));
  const Matrix b = q.vectors * a * q.vectors.transpose();
  const EigenDecomposition top = top_eigenpairs(b, 4);
  EXPECT_NEAR(top.values(0), 5, 1e-10);
  EXPECT_NEAR(top.values(2), 5, 1e-10);
  EXPECT_NEAR(top.values(3), 1, 1e-10);
  EXPECT_LE(orthonormality_error(top.vectors), 1e-9);
}

TEST(TopEigenpairs, RejectsBadCount) {
  EXPECT_THROW(top_eigenpairs(Matrix::Identity(3, 3), 4), InputError);
  EXPECT_THROW(top_eigenpairs(Matrix::Identity(3, 3), -1), InputError);
}

TEST(Nullspace, SingleAxisConstraint) {
  Matrix rows = Matrix::Zero(1, 3);
  rows(0, 0) = 1;
  const SubspaceBasis b = nullspace_intersection(rows);
  EXPECT_EQ(b.dim(), 2);
  EXPECT_LT(b.basis.row(0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Nullspace, NoConstraintsGivesWholeSpace) {
  const SubspaceBasis b = nullspace_intersection(Matrix(0, 4));
  EXPECT_EQ(b.dim(), 4);
  EXPECT_LT(orthonormality_error(b.basis), 1e-12);
}

TEST(Nullspace, TwoConstraintsLeaveThirdAxis) {
  Matrix rows(2, 3);
  rows << 1, 1, 0, 1, -1, 0;
  const SubspaceBasis b = nullspace_intersection(rows);
  ASSERT_EQ(b.dim(), 1);
  EXPECT_NEAR(std::abs(b.basis(2, 0)), 1.0, 1e-12);
}

TEST(Nullspace, RankDeficientRowsAreCountedOnce) {
  Matrix rows(3, 4);
  rows << 1, 2, 3, 4, 2, 4, 6, 8, 0, 0, 0, 0;
  EXPECT_EQ(nullspace_intersection(rows).dim(), 3);
}

TEST(Nullspace, OrthogonalToEveryRowOnRandomInputs) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 2 + static_cast<Index>(rng() % 30);
    const Index k = static_cast<Index>(rng() % (n + 3));
    Matrix rows(k, n);
    for (Index i = 0; i < k; ++i) {
      for (Index j = 0; j < n; ++j) rows(i, j) = g(rng);
    }
    const SubspaceBasis b = nullspace_intersection(rows);
    EXPECT_EQ(b.dim(), std::max<Index>(0, n - k));
    if (b.dim() == 0) continue;
    EXPECT_LE(orthonormality_error(b.basis), 1e-9);
    for (Index i = 0; i < k; ++i) {
      const double worst = (rows.row(i) * b.basis).cwiseAbs().maxCoeff();
      EXPECT_LE(worst, 1e-7 * rows.row(i).norm());
    }
  }
}

TEST(PickUnitVector, NormalizesSign) {
  SubspaceBasis b;
  b.ambient_dim = 3;
  b.basis = Matrix::Zero(3, 1);
  b.basis(1, 0) = -1;
  const Vector v = pick_unit_vector(b);
  EXPECT_EQ(v(1), 1.0);
}

TEST(PickUnitVector, TakesFirstBasisVector) {
  SubspaceBasis b;
  b.ambient_dim = 3;
  b.basis = Matrix::Zero(3, 2);
  b.basis(1, 0) = 1;
  b.basis(2, 1) = 1;
  const Vector v = pick_unit_vector(b);
  EXPECT_EQ(v, Vector::Unit(3, 1));
}

TEST(PickUnitVector, LiesInConstrainedSubspaceAndIsDeterministic) {
  Matrix rows(1, 3);
  rows << 1, 1, 0;
  const Vector a = pick_unit_vector(nullspace_intersection(rows));
  const Vector b = pick_unit_vector(nullspace_intersection(rows));
  EXPECT_NEAR(a.norm(), 1.0, 1e-12);
  EXPECT_NEAR(a(0) + a(1), 0.0, 1e-12);
  for (Index j = 0; j < 3; ++j) {
    if (std::abs(a(j)) > kSignEpsilon) {
      EXPECT_GT(a(j), 0.0);
      break;
    }
  }
  EXPECT_EQ(a, b);
}

TEST(PickUnitVector, EmptySubspaceThrows) {
  EXPECT_THROW(pick_unit_vector(nullspace_intersection(Matrix::Identity(2, 2))),
               SubspaceExhausted);
}

TEST(FirstNullDirection, AgreesWithFullBasis) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 3 + static_cast<Index>(rng() % 20);
    const Index k = static_cast<Index>(rng() % n);
    Matrix rows(k, n);
    for (Index i = 0; i < k; ++i) {
      for (Index j = 0; j < n; ++j) rows(i, j) = g(rng);
    }
    const NullDirection d = first_null_direction(rows);
    const SubspaceBasis b = nullspace_intersection(rows);
    ASSERT_EQ(d.dim, b.dim());
    EXPECT_EQ(d.direction, pick_unit_vector(b));
  }
}
