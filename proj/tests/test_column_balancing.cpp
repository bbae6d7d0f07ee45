#include <gtest/gtest.h>

#include "discmwu/column_balancing.hpp"
#include "discmwu/generators.hpp"
#include "discmwu/verify.hpp"

using namespace discmwu;

namespace {

ColumnInstance unit_columns(Index m, Index n, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.family = Family::RandomUnitColumns;
  spec.n = n;
  spec.m = m;
  spec.seed = seed;
  return std::get<ColumnInstance>(generate(spec));
}

}  // namespace

TEST(ColumnValidation, RejectsLongColumnsAndNonFinite) {
  ColumnInstance inst{Matrix::Identity(3, 3)};
  EXPECT_NO_THROW(validate(inst));
  inst.a(0, 0) = 1.1;
  EXPECT_THROW(validate(inst), InputError);
  inst.a(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(validate(inst), InputError);
  EXPECT_THROW(validate(ColumnInstance{Matrix(3, 0)}), InputError);
}

TEST(BdgParams, DefaultsSatisfyEveryRequirement) {
  for (Index n : {2, 16, 64, 256, 4096}) {
    const BdgParams p = BdgParams::defaults(n);
    EXPECT_NO_THROW(p.validate(n)) << n;
    const double ln = BdgParams::log_n(n);
    EXPECT_DOUBLE_EQ(p.alpha, std::sqrt(ln));
    EXPECT_DOUBLE_EQ(p.beta, 600.0 * ln);
    EXPECT_DOUBLE_EQ(p.delta, 1.0 / (36.0 * std::sqrt(p.beta)));
    EXPECT_GE(p.beta, p.C * p.alpha * p.alpha);
  }
}

TEST(BdgParams, ValidationCatchesInconsistentConstants) {
  BdgParams p = BdgParams::defaults(64);
  p.beta = 0.5 * p.C * p.alpha * p.alpha;
  EXPECT_THROW(p.validate(64), InputError);
  p = BdgParams::defaults(64);
  p.delta *= 2;
  EXPECT_THROW(p.validate(64), InputError);
  p = BdgParams::defaults(64);
  p.C = -1;
  EXPECT_THROW(p.validate(64), InputError);
  EXPECT_THROW(BdgParams::defaults(64, BdgScales{48.0, 1.0, 10.0, 1.0}).validate(64),
               InputError);
}

TEST(Preprocess, DropsShortRowsAndSplitsByThreshold) {
  ColumnInstance inst{Matrix::Zero(3, 4)};
  inst.a(0, 0) = 1.0;           // heavy
  inst.a(1, 1) = 0.1;           // ‖row‖² = 0.01 ≤ 1/4, dropped
  inst.a(2, 2) = 0.6;
  inst.a(2, 3) = 1e-5;          // mixed row: heavy part and light part
  const BdgParams p = BdgParams::defaults(4);
  const PreprocessedColumns pre = preprocess(inst, p);
  EXPECT_EQ(pre.dropped, (std::vector<Index>{1}));
  EXPECT_EQ(pre.classes.light_rows.size(), 2u);  // row 2 light part, both signs
  EXPECT_EQ(pre.classes.heavy_rows.size(), 4u);
  for (Index r : pre.classes.light_rows) {
    EXPECT_LE(pre.rows.row(r).cwiseAbs().maxCoeff(), pre.threshold);
  }
  EXPECT_EQ(pre.origin.front().sign, 1);
  EXPECT_EQ(pre.origin.back().sign, -1);
  const Matrix total = pre.rows.colwise().sum();
  EXPECT_LE(total.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Potential, EffectiveLengthAndLogPotential) {
  Vector row(2);
  row << 0.5, 0.5;
  Vector x(2);
  x << 1.0, 0.0;
  EXPECT_DOUBLE_EQ(effective_length(row, x), 0.25);
  ColumnInstance inst{Matrix::Identity(2, 2)};
  const PreprocessedColumns pre = preprocess(inst, BdgParams::defaults(2));
  EXPECT_TRUE(std::isinf(log_potential(pre, Vector::Zero(2), BdgParams::defaults(2))));
}

TEST(ScaledQuadraticSubspace, BoundHoldsOnSubspace) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const Index m = 60, d = 40;
  Matrix a(m, d), b(m, d);
  Vector w(m);
  for (Index i = 0; i < m; ++i) {
    w(i) = std::exp(g(rng));
    for (Index j = 0; j < d; ++j) {
      a(i, j) = g(rng);
      b(i, j) = a(i, j) * std::uniform_real_distribution<double>(-1, 1)(rng);
    }
  }
  const double k = 4;
  const Matrix rows = scaled_quadratic_subspace(a, b, w, k);
  EXPECT_LT(static_cast<double>(rows.rows()), d / k);
  const SubspaceBasis basis = nullspace_intersection(rows);
  for (int trial = 0; trial < 20; ++trial) {
    Vector c(basis.dim());
    for (Index j = 0; j < c.size(); ++j) c(j) = g(rng);
    const Vector y = basis.basis * c;
    double lhs = 0.0, rhs = 0.0;
    for (Index i = 0; i < m; ++i) {
      lhs += w(i) * std::pow(b.row(i).dot(y), 2);
      rhs += w(i) * (y.array().square() * a.row(i).transpose().array().square()).sum();
    }
    EXPECT_LE(lhs, k * rhs * (1 + 1e-9));
  }
}

TEST(Run, IdentityMatrixBalancesPerfectly) {
  const ColumnInstance inst{Matrix::Identity(64, 64)};
  const ColumnResult res = run(inst);
  EXPECT_DOUBLE_EQ(column_discrepancy(inst, res.chi), 1.0);
}

TEST(Run, RandomUnitColumnsPassVerifier) {
  const ColumnInstance inst = unit_columns(64, 64, 4);
  const ColumnResult res = run(inst);
  validate(res.chi);
  const auto rep = verify::verify_bdg(inst, res.chi, &res);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " margin " << c.margin;
  EXPECT_LE(res.trace.records.back().active, static_cast<std::size_t>(res.params.C));
}

TEST(Run, LightRowsKeepPotentialNonincreasing) {
  // Small C makes the light threshold large, so the potential is not vacuous.
  const ColumnInstance inst = unit_columns(512, 64, 5);
  const BdgParams p = BdgParams::defaults(64, BdgScales{4.0, 1.0, 0.02, 1.0});
  const ColumnResult res = run(inst, p);
  EXPECT_GT(res.light_rows, 0);
  ASSERT_TRUE(std::isfinite(res.initial_log_potential));
  for (std::size_t t = 1; t < res.trace.records.size(); ++t) {
    EXPECT_LE(res.trace.records[t].log_potential - res.trace.records[t - 1].log_potential,
              std::log1p(1e-8));
  }
  const auto rep = verify::verify_bdg(inst, res.chi, &res);
  // With C = 4 up to |A|/4 rows sit outside the active set, so the |A|/2
  // dimension guarantee and the discrepancy bound, which need C large, are
  // not expected to hold. Every other check does not depend on C.
  for (const auto& c : rep.checks) {
    if (c.name == "discrepancy_bound" || c.name == "subspace_dimension") continue;
    EXPECT_TRUE(c.pass) << c.name << " margin " << c.margin;
  }
}

TEST(Run, HeavyRowsStayBalancedWhileOutsideTheSet) {
  const ColumnInstance inst = unit_columns(32, 64, 6);
  const ColumnResult res = run(inst);
  EXPECT_LE(res.max_frozen_heavy_product, 1e-6);
  const double cap = std::pow(res.params.C, 5) * BdgParams::log_n(64);
  for (const auto& e : res.heavy_events) EXPECT_LE(static_cast<double>(e.support), cap);
}

TEST(Run, IsDeterministic) {
  const ColumnInstance inst = unit_columns(48, 48, 7);
  const ColumnResult a = run(inst);
  const ColumnResult b = run(inst);
  EXPECT_EQ(a.chi.chi, b.chi.chi);
  EXPECT_EQ(a.trace, b.trace);
}

TEST(Run, InvalidParametersAreRejected) {
  const ColumnInstance inst = unit_columns(8, 8, 8);
  BdgParams p = BdgParams::defaults(8);
  p.delta = 1.0;
  EXPECT_THROW(run(inst, p), InputError);
}
