#pragma once

// Independent checks of solver outputs and brute-force oracles.
//
// Nothing here calls into the walk code. Potentials, products and norms are
// recomputed from the instance, the coloring and the recorded trace; the only
// shared numeric kernel is eigh. Set discrepancies use integer arithmetic.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "discmwu/coloring.hpp"
#include "discmwu/column_balancing.hpp"
#include "discmwu/errors.hpp"
#include "discmwu/linalg.hpp"
#include "discmwu/matrix_balancing.hpp"
#include "discmwu/partial_coloring.hpp"
#include "discmwu/set_coloring.hpp"
#include "discmwu/trace.hpp"

namespace discmwu::verify {

/// One named check. `margin` is bound minus observed value, so a passing
/// check has margin ≥ 0 (up to the stated tolerance).
struct Check {
  std::string name;
  bool pass = true;
  double margin = 0.0;
};

struct Report {
  std::vector<Check> checks;
  std::string summary;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  const Check* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  void add(std::string name, bool pass, double margin) {
    checks.push_back({std::move(name), pass, margin});
  }

  void finish() {
    const auto ok = std::count_if(checks.begin(), checks.end(),
                                  [](const Check& c) { return c.pass; });
    summary = std::to_string(ok) + "/" + std::to_string(checks.size()) + " checks passed";
  }
};

inline constexpr double kMonotoneTolerance = 1e-9;
inline constexpr double kMatrixGrowthTolerance = 1e-8;
inline constexpr double kMatrixFinalTolerance = 1e-6;
inline constexpr double kColumnMonotoneTolerance = 1e-8;
inline constexpr double kOrthogonalityTolerance = 1e-7;
inline constexpr double kHeavyProductTolerance = 1e-6;
inline constexpr double kIncrementTolerance = 1e-6;
inline constexpr double kConsistencyTolerance = 1e-6;

inline constexpr double kSpencerConstant = 30.0;
inline constexpr double kMatrixConstant = 30.0;
inline constexpr double kColumnConstant = 40.0;

/// √(n ln(2·max(m,n)/n)).
inline double spencer_bound_form(Index n, Index m) {
  const double nn = static_cast<double>(n);
  return std::sqrt(nn * std::log(2.0 * static_cast<double>(std::max(m, n)) / nn));
}

/// √(n ln(2q·max(m,n)/n)).
inline double matrix_bound_form(Index n, Index m, Index q) {
  const double nn = static_cast<double>(n);
  return std::sqrt(nn * std::log(2.0 * static_cast<double>(q) *
                                 static_cast<double>(std::max(m, n)) / nn));
}

/// √(ln max(n, 2)).
inline double column_bound_form(Index n) {
  return std::sqrt(std::log(static_cast<double>(std::max<Index>(n, 2))));
}

namespace verify_detail {

inline bool frozen(double v) { return v == 1.0 || v == -1.0; }

inline Index frozen_count(const Vector& x) {
  Index c = 0;
  for (Index j = 0; j < x.size(); ++j) c += frozen(x(j)) ? 1 : 0;
  return c;
}

// Smallest slack of log Φ⁽ᵗ⁺¹⁾ − log Φ⁽ᵗ⁾ ≤ allowance over the trace. +∞ for
// traces with fewer than two records.
inline double growth_margin(const WalkTrace& t, double allowance) {
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    const double a = t.records[i - 1].log_potential;
    const double b = t.records[i].log_potential;
    if (std::isinf(a) && std::isinf(b) && a < 0 && b < 0) continue;
    margin = std::min(margin, allowance - (b - a));
  }
  return margin;
}

// Smallest dim U⁽ᵗ⁾ − fraction·|A⁽ᵗ⁾| over records that took a step.
inline double dimension_margin(const WalkTrace& t, double fraction) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& r : t.records) {
    if (r.subspace_dim < 0) continue;
    margin = std::min(margin, static_cast<double>(r.subspace_dim) -
                                  fraction * static_cast<double>(r.active));
  }
  return margin;
}

inline double finite_or_zero(double v) { return std::isfinite(v) ? v : 0.0; }

inline double log_sum_exp(const std::vector<double>& e) {
  if (e.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(e.begin(), e.end());
  double s = 0.0;
  for (double v : e) s += std::exp(v - top);
  return top + std::log(s);
}

inline bool close_log(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(a));
}

inline double largest_abs_eigenvalue(const Matrix& s) {
  if (s.rows() == 1) return std::abs(s(0, 0));
  const EigenDecomposition e = eigh(SymmetricMatrix(s));
  return std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
}

inline bool coloring_ok(const Coloring& chi, Index n) {
  if (chi.n() != n) return false;
  return std::all_of(chi.chi.begin(), chi.chi.end(), [](int v) { return v == 1 || v == -1; });
}

}  // namespace verify_detail

// ---- partial coloring ------------------------------------------------------

/// Postconditions of one partial-coloring run: at least half the coordinates
/// at ±1, ⟨vᵢ, x − x⁽⁰⁾⟩ ≤ 11λᵢ, final weights ≤ 2, Φ nonincreasing along
/// the trace, T ≤ 2n/δ², and dim U⁽ᵗ⁾ ≥ n/8 when steps were taken.
inline Report verify_partial(const partial::PartialColoringInstance& inst,
                             const Vector& x, const WalkTrace& trace) {
  using namespace verify_detail;
  Report rep;
  const Index n = inst.n;
  const double nn = static_cast<double>(n);
  if (x.size() != n) {
    rep.add("shape", false, -1.0);
    rep.finish();
    return rep;
  }
  bool in_cube = true;
  for (Index j = 0; j < n; ++j) in_cube = in_cube && x(j) >= -1.0 && x(j) <= 1.0;
  rep.add("in_cube", in_cube, 0.0);

  const double half = static_cast<double>(frozen_count(x)) - nn / 2.0;
  rep.add("half_integral", half >= 0.0, half);

  const Vector diff = x - inst.start;
  double lambda_margin = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < inst.m(); ++i) {
    double dot = 0.0;
    for (Index j = 0; j < n; ++j) dot += inst.vectors(i, j) * diff(j);
    lambda_margin = std::min(lambda_margin, 11.0 * inst.lambdas(i) - dot);
  }
  rep.add("lambda_bound", lambda_margin >= -kConsistencyTolerance,
          finite_or_zero(lambda_margin));

  const double delta = trace.records.empty() ? 1.0 : trace.records.front().step_size;
  const auto t_final = static_cast<double>(trace.iterations());
  double max_log_weight = -std::numeric_limits<double>::infinity();
  std::vector<double> log_weights;
  for (Index i = 0; i < inst.m(); ++i) {
    double dot = 0.0;
    for (Index j = 0; j < n; ++j) dot += inst.vectors(i, j) * diff(j);
    const double lam = inst.lambdas(i);
    const double lw = lam * dot - lam * lam * (1.0 + 4.0 * t_final * delta * delta / nn);
    log_weights.push_back(lw);
    max_log_weight = std::max(max_log_weight, lw);
  }
  const double max_weight = std::exp(max_log_weight);
  rep.add("weight_bound", max_weight <= 2.0 * (1.0 + kConsistencyTolerance),
          2.0 - max_weight);

  const double mono = growth_margin(trace, std::log1p(kMonotoneTolerance));
  rep.add("monotone_potential", mono >= 0.0, finite_or_zero(mono));

  if (!trace.records.empty()) {
    const double replay = log_sum_exp(log_weights);
    const bool ok = close_log(replay, trace.records.back().log_potential,
                              kConsistencyTolerance);
    rep.add("trace_matches_point", ok,
            ok ? 0.0 : -std::abs(replay - trace.records.back().log_potential));
  }

  const double cap = 2.0 * nn / (delta * delta);
  rep.add("iteration_bound", t_final <= cap, cap - t_final);

  const double dim = dimension_margin(trace, 1.0 / 8.0);
  rep.add("subspace_dimension", dim >= 0.0, finite_or_zero(dim));
  rep.finish();
  return rep;
}

// ---- set coloring ----------------------------------------------------------

/// Discrepancy bound, and with phase traces the per-phase guarantees:
/// halving, the 11λ√|A| increment bound for every set, monotone potential,
/// T ≤ 2n/δ², dim U ≥ |A|/8, and agreement of the trace with χ.
inline Report verify_set_coloring(const SetSystem& sys, const Coloring& chi,
                                  const std::vector<PhaseTrace>* phases = nullptr,
                                  double constant = kSpencerConstant) {
  using namespace verify_detail;
  Report rep;
  const bool valid = coloring_ok(chi, sys.n);
  rep.add("coloring_valid", valid, 0.0);
  if (!valid) {
    rep.finish();
    return rep;
  }
  std::int64_t disc = 0;
  for (const auto& s : sys.sets) {
    std::int64_t sum = 0;
    for (Index j : s) sum += chi.chi[static_cast<std::size_t>(j)];
    disc = std::max(disc, sum < 0 ? -sum : sum);
  }
  const double bound = constant * spencer_bound_form(sys.n, sys.m());
  rep.add("discrepancy_bound", static_cast<double>(disc) <= bound,
          bound - static_cast<double>(disc));
  if (phases == nullptr) {
    rep.finish();
    return rep;
  }

  Vector x = Vector::Zero(sys.n);
  bool shapes = true;
  double halving = std::numeric_limits<double>::infinity();
  double frozen_half = std::numeric_limits<double>::infinity();
  double increment = std::numeric_limits<double>::infinity();
  double mono = std::numeric_limits<double>::infinity();
  double iterations = std::numeric_limits<double>::infinity();
  double dims = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < phases->size(); ++s) {
    const PhaseTrace& p = (*phases)[s];
    const Index a = static_cast<Index>(p.active.size());
    if (p.x_start.size() != a || p.x_end.size() != a ||
        std::any_of(p.active.begin(), p.active.end(),
                    [&](Index j) { return j < 0 || j >= sys.n; })) {
      shapes = false;
      break;
    }
    const double na = static_cast<double>(a);
    halving = std::min(halving, static_cast<double>(sys.n) / std::ldexp(1.0, static_cast<int>(s)) - na);
    frozen_half = std::min(frozen_half, static_cast<double>(frozen_count(p.x_end)) - na / 2.0);
    std::vector<double> change(static_cast<std::size_t>(sys.n), 0.0);
    for (Index r = 0; r < a; ++r) {
      change[static_cast<std::size_t>(p.active[static_cast<std::size_t>(r)])] =
          p.x_end(r) - p.x_start(r);
      x(p.active[static_cast<std::size_t>(r)]) = p.x_end(r);
    }
    const double limit = 11.0 * p.lambda * std::sqrt(na);
    for (const auto& set : sys.sets) {
      double sum = 0.0;
      for (Index j : set) sum += change[static_cast<std::size_t>(j)];
      increment = std::min(increment, limit - std::abs(sum));
    }
    mono = std::min(mono, growth_margin(p.walk, std::log1p(kMonotoneTolerance)));
    const double cap = 2.0 * na / (p.delta * p.delta);
    iterations = std::min(iterations, cap - static_cast<double>(p.walk.iterations()));
    dims = std::min(dims, dimension_margin(p.walk, 1.0 / 8.0));
  }
  rep.add("trace_shape", shapes, 0.0);
  if (shapes) {
    rep.add("active_halving", halving >= 0.0, finite_or_zero(halving));
    rep.add("phase_half_frozen", frozen_half >= 0.0, finite_or_zero(frozen_half));
    rep.add("phase_increment", increment >= -kIncrementTolerance, finite_or_zero(increment));
    rep.add("monotone_potential", mono >= 0.0, finite_or_zero(mono));
    rep.add("iteration_bound", iterations >= 0.0, finite_or_zero(iterations));
    rep.add("subspace_dimension", dims >= 0.0, finite_or_zero(dims));
    bool agree = true;
    for (Index j = 0; j < sys.n; ++j) {
      agree = agree && chi.chi[static_cast<std::size_t>(j)] == (x(j) >= 0.0 ? 1 : -1);
    }
    rep.add("trace_matches_coloring", agree, 0.0);
  }
  rep.finish();
  return rep;
}

// ---- matrix balancing ------------------------------------------------------

/// ‖Σᵢ xᵢAᵢ‖_op assembled block by block.
inline double operator_norm(const BlockMatrixFamily& fam, const Vector& x) {
  double worst = 0.0;
  for (Index k = 0; k < fam.block_count(); ++k) {
    Matrix s = Matrix::Zero(fam.q, fam.q);
    for (Index i = 0; i < fam.n; ++i) {
      s += x(i) * fam.blocks[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    worst = std::max(worst, verify_detail::largest_abs_eigenvalue(s));
  }
  return worst;
}

namespace verify_detail {

// ln(Σ_k Tr exp(εS_k) + Tr exp(−εS_k)) with S_k the block sums of
// (x − x⁽⁰⁾) over the phase's active matrices.
inline double doubled_log_potential(const BlockMatrixFamily& fam,
                                    const std::vector<Index>& active,
                                    const Vector& diff, double eps) {
  std::vector<double> logs;
  for (Index k = 0; k < fam.block_count(); ++k) {
    Matrix s = Matrix::Zero(fam.q, fam.q);
    for (std::size_t r = 0; r < active.size(); ++r) {
      s += diff(static_cast<Index>(r)) *
           fam.blocks[static_cast<std::size_t>(active[r])][static_cast<std::size_t>(k)];
    }
    const EigenDecomposition e = eigh(SymmetricMatrix(s));
    for (Index j = 0; j < e.values.size(); ++j) {
      logs.push_back(eps * e.values(j));
      logs.push_back(-eps * e.values(j));
    }
  }
  return log_sum_exp(logs);
}

}  // namespace verify_detail

/// Norm bound, and with phase traces: per-step growth
/// Φ⁽ᵗ⁺¹⁾ ≤ (1+16ε²δ²)Φ⁽ᵗ⁾, final Φ ≤ 2m·exp(32ε²n) for the doubled family,
/// quadratic error within its bound, first-order residual ≤ 1e-7,
/// dim U ≥ |A|/4, T ≤ 2n/δ², halving, and agreement of the trace with χ.
inline Report verify_matrix(const BlockMatrixFamily& fam, const Coloring& chi,
                            const std::vector<MatrixPhaseTrace>* phases = nullptr,
                            double constant = kMatrixConstant) {
  using namespace verify_detail;
  Report rep;
  const bool valid = coloring_ok(chi, fam.n);
  rep.add("coloring_valid", valid, 0.0);
  if (!valid) {
    rep.finish();
    return rep;
  }
  const double norm = operator_norm(fam, to_vector(chi));
  const double bound = constant * matrix_bound_form(fam.n, fam.m, fam.q);
  rep.add("norm_bound", norm <= bound, bound - norm);
  if (phases == nullptr) {
    rep.finish();
    return rep;
  }

  Vector x = Vector::Zero(fam.n);
  bool shapes = true;
  double growth = std::numeric_limits<double>::infinity();
  double final_phi = std::numeric_limits<double>::infinity();
  double quadratic = std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::infinity();
  double dims = std::numeric_limits<double>::infinity();
  double frozen_half = std::numeric_limits<double>::infinity();
  double iterations = std::numeric_limits<double>::infinity();
  bool replay = true;
  for (const MatrixPhaseTrace& p : *phases) {
    const Index a = static_cast<Index>(p.active.size());
    if (p.x_start.size() != a || p.x_end.size() != a ||
        std::any_of(p.active.begin(), p.active.end(),
                    [&](Index j) { return j < 0 || j >= fam.n; })) {
      shapes = false;
      break;
    }
    const double na = static_cast<double>(a);
    for (Index r = 0; r < a; ++r) x(p.active[static_cast<std::size_t>(r)]) = p.x_end(r);
    frozen_half = std::min(frozen_half, static_cast<double>(frozen_count(p.x_end)) - na / 2.0);
    if (p.walk.exhaustive || p.walk.records.empty()) continue;
    const double e2d2 = p.epsilon * p.epsilon * p.delta * p.delta;
    growth = std::min(growth, growth_margin(p.walk, std::log1p(16.0 * e2d2) +
                                                        std::log1p(kMatrixGrowthTolerance)));
    const double final_log = p.walk.records.back().log_potential;
    const double limit = std::log(2.0 * static_cast<double>(fam.m)) +
                         32.0 * p.epsilon * p.epsilon * na +
                         std::log1p(kMatrixFinalTolerance);
    final_phi = std::min(final_phi, limit - final_log);
    for (const auto& r : p.walk.records) {
      if (r.subspace_dim < 0) continue;
      quadratic = std::min(quadratic, 1.0 + kConsistencyTolerance - r.quadratic_ratio);
      residual = std::min(residual, kOrthogonalityTolerance - r.linear_residual);
    }
    dims = std::min(dims, dimension_margin(p.walk, 1.0 / 4.0));
    iterations = std::min(iterations, 2.0 * na / (p.delta * p.delta) -
                                          static_cast<double>(p.walk.iterations()));
    const double recomputed =
        doubled_log_potential(fam, p.active, p.x_end - p.x_start, p.epsilon);
    replay = replay && close_log(recomputed, final_log, kConsistencyTolerance);
  }
  rep.add("trace_shape", shapes, 0.0);
  if (shapes) {
    rep.add("phase_half_frozen", frozen_half >= 0.0, finite_or_zero(frozen_half));
    rep.add("potential_growth", growth >= 0.0, finite_or_zero(growth));
    rep.add("final_potential", final_phi >= 0.0, finite_or_zero(final_phi));
    rep.add("quadratic_error", quadratic >= 0.0, finite_or_zero(quadratic));
    rep.add("step_orthogonality", residual >= 0.0, finite_or_zero(residual));
    rep.add("subspace_dimension", dims >= 0.0, finite_or_zero(dims));
    rep.add("iteration_bound", iterations >= 0.0, finite_or_zero(iterations));
    rep.add("trace_matches_point", replay, 0.0);
    bool agree = true;
    for (Index j = 0; j < fam.n; ++j) {
      agree = agree && chi.chi[static_cast<std::size_t>(j)] == (x(j) >= 0.0 ? 1 : -1);
    }
    rep.add("trace_matches_coloring", agree, 0.0);
  }
  rep.finish();
  return rep;
}

// ---- column balancing ------------------------------------------------------

namespace verify_detail {

// Light parts of the stacked rows ±Aᵢ/√2 (rows with ‖Aᵢ‖² ≤ 1/n dropped):
// entries with |a| ≤ τ; all-zero parts omitted.
inline std::vector<Vector> light_parts(const ColumnInstance& inst, double tau) {
  const Index n = inst.n();
  std::vector<Vector> out;
  for (int sign : {1, -1}) {
    for (Index i = 0; i < inst.m(); ++i) {
      if (inst.a.row(i).squaredNorm() <= 1.0 / static_cast<double>(n)) continue;
      Vector part = Vector::Zero(n);
      bool any = false;
      for (Index j = 0; j < n; ++j) {
        const double v = sign * inst.a(i, j) / std::sqrt(2.0);
        if (v != 0.0 && std::abs(v) <= tau) {
          part(j) = v;
          any = true;
        }
      }
      if (any) out.push_back(std::move(part));
    }
  }
  return out;
}

}  // namespace verify_detail

/// ‖Ax‖_∞ bound, and with the run trace: potential nonincreasing,
/// dim U ≥ |A|/2, T ≤ 2n/δ², heavy support ≤ C⁵ ln n at exit from I,
/// heavy products zero while outside I, the light-row bound
/// ⟨Aᵢ,x⟩ ≤ 2 ln n/α + Cβ/α, and agreement of the trace with χ.
inline Report verify_bdg(const ColumnInstance& inst, const Coloring& chi,
                         const ColumnResult* run = nullptr,
                         double constant = kColumnConstant) {
  using namespace verify_detail;
  Report rep;
  const Index n = inst.n();
  const bool valid = coloring_ok(chi, n);
  rep.add("coloring_valid", valid, 0.0);
  if (!valid) {
    rep.finish();
    return rep;
  }
  const Vector xs = to_vector(chi);
  double disc = 0.0;
  for (Index i = 0; i < inst.m(); ++i) disc = std::max(disc, std::abs(inst.a.row(i).dot(xs)));
  const double bound = constant * column_bound_form(n);
  rep.add("discrepancy_bound", disc <= bound, bound - disc);
  if (run == nullptr) {
    rep.finish();
    return rep;
  }

  const BdgParams& p = run->params;
  const double ln = std::log(static_cast<double>(std::max<Index>(n, 2)));
  const bool shape = run->x_walk.size() == n;
  rep.add("trace_shape", shape, 0.0);
  if (!shape) {
    rep.finish();
    return rep;
  }
  const WalkTrace& t = run->trace;
  const double mono = growth_margin(t, std::log1p(kColumnMonotoneTolerance));
  rep.add("monotone_potential", mono >= 0.0, finite_or_zero(mono));
  const double dims = dimension_margin(t, 0.5);
  rep.add("subspace_dimension", dims >= 0.0, finite_or_zero(dims));
  const double cap = 2.0 * static_cast<double>(n) / (p.delta * p.delta);
  rep.add("iteration_bound", static_cast<double>(t.iterations()) <= cap,
          cap - static_cast<double>(t.iterations()));

  const double support_cap = std::pow(p.C, 5) * ln;
  double support = std::numeric_limits<double>::infinity();
  for (const auto& e : run->heavy_events) {
    support = std::min(support, support_cap - static_cast<double>(e.support));
  }
  rep.add("heavy_support", support >= 0.0, finite_or_zero(support));
  rep.add("heavy_orthogonality", run->max_frozen_heavy_product <= kHeavyProductTolerance,
          kHeavyProductTolerance - run->max_frozen_heavy_product);

  const double tau = 1.0 / (p.C * p.C * std::sqrt(ln));
  const std::vector<Vector> light = light_parts(inst, tau);
  const double light_limit = 2.0 * ln / p.alpha + p.C * p.beta / p.alpha;
  double light_margin = std::numeric_limits<double>::infinity();
  std::vector<double> exponents;
  for (const Vector& a : light) {
    const double dot = a.dot(run->x_walk);
    light_margin = std::min(light_margin, light_limit - dot);
    double len = 0.0;
    for (Index j = 0; j < n; ++j) {
      len += (1.0 - run->x_walk(j) * run->x_walk(j)) * a(j) * a(j);
    }
    exponents.push_back(p.alpha * dot + p.beta * std::min(p.C, len));
  }
  rep.add("light_row_bound", light_margin >= 0.0, finite_or_zero(light_margin));
  if (!t.records.empty()) {
    const double replay = log_sum_exp(exponents);
    rep.add("trace_matches_point",
            close_log(replay, t.records.back().log_potential, kConsistencyTolerance), 0.0);
  }
  bool agree = true;
  for (Index j = 0; j < n; ++j) {
    agree = agree && chi.chi[static_cast<std::size_t>(j)] == (run->x_walk(j) >= 0.0 ? 1 : -1);
  }
  rep.add("trace_matches_coloring", agree, 0.0);
  rep.finish();
  return rep;
}

// ---- brute-force oracles ---------------------------------------------------

inline constexpr Index kMaxBruteForceSets = 24;
inline constexpr Index kMaxBruteForceMatrices = 20;

struct DiscrepancyOptimum {
  std::int64_t value = 0;
  Coloring witness;
};

struct NormOptimum {
  double value = 0.0;
  Coloring witness;
};

/// Exact min over χ ∈ {±1}ⁿ of maxᵢ|χ(Sᵢ)|. The last element is fixed to +1
/// (χ and −χ have equal discrepancy) and the rest enumerated in Gray-code
/// order; the first minimum found is kept.
inline DiscrepancyOptimum brute_force_min_discrepancy(const SetSystem& sys,
                                                      Index cap = kMaxBruteForceSets) {
  validate(sys);
  if (sys.n > cap) {
    throw InputError("brute force: n = " + std::to_string(sys.n) + " exceeds the cap " +
                     std::to_string(cap));
  }
  std::vector<std::vector<std::size_t>> member(static_cast<std::size_t>(sys.n));
  std::vector<std::int64_t> sums(sys.sets.size());
  for (std::size_t i = 0; i < sys.sets.size(); ++i) {
    sums[i] = static_cast<std::int64_t>(sys.sets[i].size());
    for (Index j : sys.sets[i]) member[static_cast<std::size_t>(j)].push_back(i);
  }
  auto worst = [&] {
    std::int64_t w = 0;
    for (std::int64_t s : sums) w = std::max(w, s < 0 ? -s : s);
    return w;
  };
  std::vector<int> chi(static_cast<std::size_t>(sys.n), 1);
  DiscrepancyOptimum best{worst(), Coloring{chi}};
  const std::uint64_t total = std::uint64_t{1} << (sys.n - 1);
  for (std::uint64_t g = 1; g < total && best.value > 0; ++g) {
    const auto j = static_cast<std::size_t>(std::countr_zero(g));
    chi[j] = -chi[j];
    const std::int64_t change = 2 * chi[j];
    for (std::size_t i : member[j]) sums[i] += change;
    const std::int64_t w = worst();
    if (w < best.value) best = {w, Coloring{chi}};
  }
  return best;
}

/// Exact min over x ∈ {±1}ⁿ of ‖Σxᵢ Aᵢ‖_op, with x₁ fixed to +1.
inline NormOptimum brute_force_min_opnorm(const BlockMatrixFamily& family,
                                          Index cap = kMaxBruteForceMatrices) {
  BlockMatrixFamily fam = family;
  validate(fam);
  if (fam.n > cap) {
    throw InputError("brute force: n = " + std::to_string(fam.n) + " exceeds the cap " +
                     std::to_string(cap));
  }
  const Index blocks = fam.block_count();
  std::vector<Matrix> sums(static_cast<std::size_t>(blocks), Matrix::Zero(fam.q, fam.q));
  for (Index k = 0; k < blocks; ++k) {
    for (Index i = 0; i < fam.n; ++i) {
      sums[static_cast<std::size_t>(k)] +=
          fam.blocks[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
  }
  auto norm_of = [&](const Matrix& s) {
    if (fam.q == 1) return std::abs(s(0, 0));
    if (fam.q == 2) {
      const double mid = 0.5 * (s(0, 0) + s(1, 1));
      const double rad = std::hypot(0.5 * (s(0, 0) - s(1, 1)), 0.5 * (s(0, 1) + s(1, 0)));
      return std::abs(mid) + rad;
    }
    return verify_detail::largest_abs_eigenvalue(s);
  };
  auto worst = [&] {
    double w = 0.0;
    for (const Matrix& s : sums) w = std::max(w, norm_of(s));
    return w;
  };
  std::vector<int> chi(static_cast<std::size_t>(fam.n), 1);
  NormOptimum best{worst(), Coloring{chi}};
  const std::uint64_t total = std::uint64_t{1} << (fam.n - 1);
  for (std::uint64_t g = 1; g < total; ++g) {
    const auto j = static_cast<std::size_t>(std::countr_zero(g)) + 1;
    chi[j] = -chi[j];
    const double change = 2.0 * chi[j];
    for (Index k = 0; k < blocks; ++k) {
      sums[static_cast<std::size_t>(k)] += change * fam.blocks[j][static_cast<std::size_t>(k)];
    }
    const double w = worst();
    if (w < best.value) best = {w, Coloring{chi}};
  }
  return best;
}

}  // namespace discmwu::verify
