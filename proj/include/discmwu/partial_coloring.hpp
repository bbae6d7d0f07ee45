#pragma once

// Deterministic multiplicative-weight walk for partial coloring.
//
// Given vectors vᵢ (‖vᵢ‖ ≤ 1), slacks λ₁ ≥ … ≥ λ_m ≥ 0 with
// Σ exp(−λᵢ²/16) ≤ n/32 and a start x⁽⁰⁾ ∈ [−1,1]ⁿ, the walk returns x with at
// least n/2 coordinates in {−1,1} and ⟨vᵢ, x − x⁽⁰⁾⟩ ≤ 11λᵢ for every i.
//
// Each constraint carries a weight wᵢ = exp(λᵢ⟨vᵢ, x − x⁽⁰⁾⟩ − λᵢ²(1 + 4tδ²/n)),
// kept in log form. Every step moves by δ along a unit vector orthogonal to
// the current point, the n/16 heaviest constraints, the constraints with
// λᵢ ≤ 1, the weighted drift Σ λᵢwᵢρᵢvᵢ, and the top eigenvectors of
// M = Σ wᵢλᵢ²vᵢvᵢᵀ, so that Φ = Σ wᵢ never increases.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "discmwu/errors.hpp"
#include "discmwu/linalg.hpp"
#include "discmwu/trace.hpp"

namespace discmwu::partial {

inline constexpr double kSnapTolerance = 1e-9;
inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kHypothesisTolerance = 1e-9;
inline constexpr double kDirectionEpsilon = 1e-12;
inline constexpr std::size_t kResyncPeriod = 512;
inline constexpr Index kExhaustiveBelow = 16;

/// Unit: every vᵢ must have norm 1 ± 1e-9. AtMostUnit: norm ≤ 1 + 1e-9, as
/// produced by the set-coloring phases.
enum class NormPolicy { Unit, AtMostUnit };

struct PartialColoringInstance {
  Index n = 0;
  Matrix vectors;  // m × n, row i is vᵢ
  Vector lambdas;  // sorted descending
  Vector start;    // x⁽⁰⁾
  std::vector<Index> source_index;  // row of each constraint in the raw input

  Index m() const { return vectors.rows(); }
};

inline bool is_frozen(double xj) { return xj == 1.0 || xj == -1.0; }

inline std::vector<Index> active_coordinates(const Vector& x) {
  std::vector<Index> a;
  for (Index j = 0; j < x.size(); ++j) {
    if (!is_frozen(x(j))) a.push_back(j);
  }
  return a;
}

inline double log_sum_exp(const Vector& v) {
  if (v.size() == 0) return -std::numeric_limits<double>::infinity();
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

/// Drops constraints with λᵢ > 2√n (they cannot bind inside [−1,1]ⁿ), sorts
/// the rest by λ descending (stable in the input order) and checks the
/// hypothesis Σ exp(−λᵢ²/16) ≤ n/32.
inline PartialColoringInstance preprocess(const Matrix& raw_vectors,
                                          const Vector& raw_lambdas,
                                          const Vector& start,
                                          NormPolicy policy = NormPolicy::Unit) {
  const Index n = start.size();
  if (raw_vectors.rows() != raw_lambdas.size()) {
    throw InputError("preprocess: " + std::to_string(raw_vectors.rows()) +
                     " vectors but " + std::to_string(raw_lambdas.size()) +
                     " lambdas");
  }
  if (raw_vectors.rows() > 0 && raw_vectors.cols() != n) {
    throw InputError("preprocess: vectors have length " +
                     std::to_string(raw_vectors.cols()) + ", start has " +
                     std::to_string(n));
  }
  if (!raw_vectors.allFinite() || !raw_lambdas.allFinite() ||
      !start.allFinite()) {
    throw InputError("preprocess: non-finite input");
  }
  for (Index j = 0; j < n; ++j) {
    if (start(j) < -1.0 || start(j) > 1.0) {
      throw InputError("preprocess: start coordinate " + std::to_string(j) +
                       " = " + std::to_string(start(j)) + " outside [-1,1]");
    }
  }
  for (Index i = 0; i < raw_vectors.rows(); ++i) {
    const double norm = raw_vectors.row(i).norm();
    const bool ok = policy == NormPolicy::Unit
                        ? std::abs(norm - 1.0) <= kNormTolerance
                        : norm <= 1.0 + kNormTolerance;
    if (!ok) {
      throw InputError("preprocess: vector " + std::to_string(i) +
                       " has norm " + std::to_string(norm));
    }
    if (raw_lambdas(i) < 0.0) {
      throw InputError("preprocess: lambda " + std::to_string(i) +
                       " is negative");
    }
  }

  const double cap = 2.0 * std::sqrt(static_cast<double>(n));
  std::vector<Index> kept;
  for (Index i = 0; i < raw_lambdas.size(); ++i) {
    if (raw_lambdas(i) <= cap) kept.push_back(i);
  }
  std::stable_sort(kept.begin(), kept.end(), [&](Index a, Index b) {
    return raw_lambdas(a) > raw_lambdas(b);
  });

  PartialColoringInstance inst;
  inst.n = n;
  inst.start = start;
  inst.vectors.resize(static_cast<Index>(kept.size()), n);
  inst.lambdas.resize(static_cast<Index>(kept.size()));
  inst.source_index = kept;
  for (std::size_t r = 0; r < kept.size(); ++r) {
    inst.vectors.row(static_cast<Index>(r)) = raw_vectors.row(kept[r]);
    inst.lambdas(static_cast<Index>(r)) = raw_lambdas(kept[r]);
  }

  const double sum = (-inst.lambdas.array().square() / 16.0).exp().sum();
  const double limit = static_cast<double>(n) / 32.0;
  if (sum > limit * (1.0 + kHypothesisTolerance)) {
    throw InfeasibleInstance("preprocess: sum of exp(-lambda^2/16) = " +
                             std::to_string(sum) + " exceeds n/32 = " +
                             std::to_string(limit));
  }
  return inst;
}

/// δ = 1/λ₁, with λ₁ clamped to at least 1.
inline double step_size(const PartialColoringInstance& inst) {
  const double top = inst.m() > 0 ? inst.lambdas(0) : 0.0;
  return 1.0 / std::max(top, 1.0);
}

struct WalkState {
  std::size_t t = 0;
  Vector x;
  Vector log_weights;  // ln wᵢ⁽ᵗ⁾
  double delta = 1.0;
  std::vector<Index> active;
};

/// ln wᵢ⁽ᵗ⁾ from the closed form λᵢ⟨vᵢ, x − x⁽⁰⁾⟩ − λᵢ²(1 + 4tδ²/n).
inline Vector closed_form_log_weights(const PartialColoringInstance& inst,
                                      const Vector& x, std::size_t t,
                                      double delta) {
  const double n = static_cast<double>(inst.n);
  const double discount = 1.0 + static_cast<double>(t) * 4.0 * delta * delta / n;
  const Vector drift = inst.vectors * (x - inst.start);
  return (inst.lambdas.array() * drift.array() -
          inst.lambdas.array().square() * discount)
      .matrix();
}

inline WalkState initial_state(const PartialColoringInstance& inst) {
  WalkState s;
  s.x = inst.start;
  s.delta = step_size(inst);
  s.log_weights = -inst.lambdas.array().square().matrix();
  s.active = active_coordinates(s.x);
  return s;
}

namespace detail {

// The ⌊n/16⌋ heaviest constraints; ties go to the smaller index.
inline std::vector<Index> heaviest(const Vector& log_weights, Index count) {
  std::vector<Index> idx(static_cast<std::size_t>(log_weights.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  count = std::min<Index>(count, log_weights.size());
  std::partial_sort(idx.begin(), idx.begin() + count, idx.end(),
                    [&](Index a, Index b) {
                      if (log_weights(a) != log_weights(b)) {
                        return log_weights(a) > log_weights(b);
                      }
                      return a < b;
                    });
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

// wᵢ / max wⱼ; the constraints below are invariant under a common rescaling.
inline Vector relative_weights(const Vector& log_weights) {
  if (log_weights.size() == 0) return Vector(0);
  return (log_weights.array() - log_weights.maxCoeff()).exp().matrix();
}

inline Index spectral_exclusions(Index n) {
  return std::max<Index>((n + 15) / 16 - 1, 0);
}

// Constraint vectors that coincide up to sign contribute the same outer
// product to M, so M is accumulated over one representative per class.
struct SignClasses {
  Matrix representatives;     // one row per class
  std::vector<Index> class_of;
};

inline SignClasses sign_classes(const Matrix& vectors) {
  SignClasses out;
  const Index m = vectors.rows();
  out.class_of.assign(static_cast<std::size_t>(m), -1);
  std::vector<Index> reps;
  std::vector<std::vector<Index>> buckets;
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_hash;
  Vector canon(vectors.cols());
  for (Index i = 0; i < m; ++i) {
    canon = vectors.row(i).transpose();
    for (Index j = 0; j < canon.size(); ++j) {
      if (canon(j) != 0.0) {
        if (canon(j) < 0.0) canon = -canon;
        break;
      }
    }
    std::size_t h = 0;
    for (Index j = 0; j < canon.size(); ++j) {
      h = h * 1000003u ^ std::hash<double>{}(canon(j) + 0.0);
    }
    auto& candidates = by_hash[h];
    Index found = -1;
    for (std::size_t c : candidates) {
      const auto rep = vectors.row(reps[c]);
      if (rep == vectors.row(i) || rep == -vectors.row(i)) {
        found = static_cast<Index>(c);
        break;
      }
    }
    if (found < 0) {
      found = static_cast<Index>(reps.size());
      candidates.push_back(reps.size());
      reps.push_back(i);
    }
    out.class_of[static_cast<std::size_t>(i)] = found;
  }
  out.representatives.resize(static_cast<Index>(reps.size()), vectors.cols());
  for (std::size_t c = 0; c < reps.size(); ++c) {
    out.representatives.row(static_cast<Index>(c)) = vectors.row(reps[c]);
  }
  return out;
}

struct Constraints {
  Matrix rows;            // k × |A| in active coordinates
  Matrix quadratic;       // M restricted to A, relative weights
  double trace_bound = 0; // (16/n) Σ wᵢλᵢ², relative weights
  std::vector<Index> heaviest;
  std::vector<Index> small_lambda;
  Vector drift_coef;      // λᵢwᵢρᵢ, relative weights
  Index drift_row = -1;
};

inline Constraints build_reduced(const PartialColoringInstance& inst,
                                 const WalkState& s,
                                 const SignClasses& classes) {
  const Index n = inst.n;
  const Index m = inst.m();
  const auto& act = s.active;
  const Index d = static_cast<Index>(act.size());
  Constraints c;
  c.heaviest = heaviest(s.log_weights, n / 16);

  for (Index i = 0; i < m; ++i) {
    if (inst.lambdas(i) <= 1.0) c.small_lambda.push_back(i);
  }

  const Index spectral = m > 0 ? std::min(spectral_exclusions(n), d) : 0;
  const Index k = 1 + static_cast<Index>(c.heaviest.size()) +
                  static_cast<Index>(c.small_lambda.size()) + (m > 0 ? 1 : 0) +
                  spectral;
  c.rows.setZero(k, d);
  Index r = 0;
  c.rows.row(r++) = s.x(act).transpose();
  for (Index i : c.heaviest) c.rows.row(r++) = inst.vectors(i, act);
  for (Index i : c.small_lambda) c.rows.row(r++) = inst.vectors(i, act);

  c.quadratic.setZero(d, d);
  if (m > 0) {
    const double nn = static_cast<double>(n);
    const Vector rel = relative_weights(s.log_weights);
    const Vector lam = inst.lambdas;
    const Vector discount =
        (-4.0 * s.delta * s.delta * lam.array().square() / nn).exp().matrix();
    c.drift_coef = (lam.array() * rel.array() * discount.array()).matrix();
    c.drift_row = r;
    c.rows.row(r++) = c.drift_coef.transpose() * inst.vectors(Eigen::all, act);

    Vector mass = Vector::Zero(classes.representatives.rows());
    for (Index i = 0; i < m; ++i) {
      mass(classes.class_of[static_cast<std::size_t>(i)]) += rel(i) * lam(i) * lam(i);
    }
    const Matrix scaled = mass.cwiseSqrt().asDiagonal() *
                          classes.representatives(Eigen::all, act);
    c.quadratic.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    c.quadratic = c.quadratic.selfadjointView<Eigen::Lower>();
    c.trace_bound = 16.0 / nn * (rel.array() * lam.array().square()).sum();

    if (spectral > 0) {
      const EigenDecomposition eig = top_eigenpairs(c.quadratic, spectral);
      for (Index j = 0; j < spectral; ++j) {
        c.rows.row(r++) = eig.vectors.col(j).transpose();
      }
    }
  }
  return c;
}

}  // namespace detail

/// Constraint rows whose common nullspace is U⁽ᵗ⁾, expressed in ℝⁿ: unit
/// vectors of frozen coordinates, x⁽ᵗ⁾, the ⌊n/16⌋ heaviest vᵢ, every vᵢ with
/// λᵢ ≤ 1, the drift Σ λᵢwᵢρᵢvᵢ and the top ⌈n/16⌉−1 eigenvectors of M
/// restricted to the active coordinates (zero elsewhere).
inline Matrix build_constraint_rows(const WalkState& s,
                                    const PartialColoringInstance& inst) {
  const Index n = inst.n;
  const detail::Constraints c =
      detail::build_reduced(inst, s, detail::sign_classes(inst.vectors));
  std::vector<Index> frozen;
  for (Index j = 0; j < n; ++j) {
    if (is_frozen(s.x(j))) frozen.push_back(j);
  }
  const Index nf = static_cast<Index>(frozen.size());
  Matrix rows = Matrix::Zero(nf + c.rows.rows(), n);
  for (Index r = 0; r < nf; ++r) rows(r, frozen[static_cast<std::size_t>(r)]) = 1.0;
  for (Index r = 0; r < c.rows.rows(); ++r) {
    rows.row(nf + r)(s.active) = c.rows.row(r);
  }
  // Full-length versions of the rows that do not depend on the restriction.
  rows.row(nf) = s.x.transpose();
  Index r = nf + 1;
  for (Index i : c.heaviest) rows.row(r++) = inst.vectors.row(i);
  for (Index i : c.small_lambda) rows.row(r++) = inst.vectors.row(i);
  if (c.drift_row >= 0) {
    rows.row(nf + c.drift_row) = c.drift_coef.transpose() * inst.vectors;
  }
  return rows;
}

/// Largest α ∈ (0,1] keeping x + δαz inside [−1,1]ⁿ. Coordinates with
/// |zⱼ| ≤ 1e-12 are ignored.
inline double max_step(const Vector& x, const Vector& z, double delta) {
  double alpha = 1.0;
  for (Index j = 0; j < x.size(); ++j) {
    const double zj = z(j);
    if (std::abs(zj) <= kDirectionEpsilon) continue;
    const double room = zj > 0 ? (1.0 - x(j)) : (-1.0 - x(j));
    const double ratio = room / (delta * zj);
    if (!(ratio > 0.0)) {
      throw InvariantViolation("max_step: coordinate " + std::to_string(j) +
                               " already on the wall in the step direction");
    }
    alpha = std::min(alpha, ratio);
  }
  return alpha;
}

/// x + δαz with coordinates within 1e-9 of ±1 snapped exactly onto the wall.
inline Vector apply_step(const Vector& x, const Vector& z, double delta,
                         double alpha) {
  Vector next = x + (delta * alpha) * z;
  for (Index j = 0; j < next.size(); ++j) {
    if (std::abs(next(j) - 1.0) <= kSnapTolerance) next(j) = 1.0;
    if (std::abs(next(j) + 1.0) <= kSnapTolerance) next(j) = -1.0;
    if (next(j) > 1.0 || next(j) < -1.0) {
      throw InvariantViolation("apply_step: coordinate " + std::to_string(j) +
                               " left [-1,1]");
    }
  }
  return next;
}

/// ln wᵢ += λᵢδ⟨vᵢ, y⟩ − 4δ²λᵢ²/n and t += 1. Every 512 iterations the
/// weights are recomputed from the closed form; s.x must already hold the
/// new point.
inline void update_weights(WalkState& s, const PartialColoringInstance& inst,
                           const Vector& y) {
  const double n = static_cast<double>(inst.n);
  const Vector proj = inst.vectors * y;
  s.log_weights.array() +=
      inst.lambdas.array() * s.delta * proj.array() -
      4.0 * s.delta * s.delta * inst.lambdas.array().square() / n;
  ++s.t;
  if (s.t % kResyncPeriod == 0) {
    s.log_weights = closed_form_log_weights(inst, s.x, s.t, s.delta);
  }
}

struct PartialColoringResult {
  Vector x;
  WalkTrace trace;
  Vector log_weights;  // final ln wᵢ
  double delta = 1.0;
};

namespace detail {

inline std::size_t frozen_count(const Vector& x) {
  std::size_t c = 0;
  for (Index j = 0; j < x.size(); ++j) c += is_frozen(x(j)) ? 1 : 0;
  return c;
}

inline bool half_frozen(const Vector& x) {
  return 2 * frozen_count(x) >= static_cast<std::size_t>(x.size());
}

inline IterationRecord state_record(const WalkState& s) {
  IterationRecord rec;
  rec.t = s.t;
  rec.log_potential = log_sum_exp(s.log_weights);
  rec.potential = std::exp(rec.log_potential);
  rec.step_size = s.delta;
  rec.active = s.active.size();
  return rec;
}

// Colors every free coordinate by enumeration, minimizing
// maxᵢ ⟨vᵢ, x − x⁽⁰⁾⟩ / max(λᵢ, 1). Gray-code order; first minimum wins.
inline Vector exhaustive(const PartialColoringInstance& inst) {
  Vector x = inst.start;
  const std::vector<Index> free = active_coordinates(x);
  const Index k = static_cast<Index>(free.size());
  for (Index j : free) x(j) = 1.0;
  if (k == 0) return x;
  const Vector scale = inst.lambdas.array().max(1.0).inverse().matrix();
  Vector sums = inst.vectors * (x - inst.start);
  auto objective = [&](const Vector& s) {
    return s.size() == 0 ? 0.0 : (s.array() * scale.array()).maxCoeff();
  };
  Vector best = x;
  double best_value = objective(sums);
  const std::uint64_t total = std::uint64_t{1} << k;
  for (std::uint64_t g = 1; g < total; ++g) {
    const int bit = std::countr_zero(g);
    const Index j = free[static_cast<std::size_t>(bit)];
    const double change = -2.0 * x(j);
    x(j) = -x(j);
    if (inst.m() > 0) sums += change * inst.vectors.col(j);
    const double value = objective(sums);
    if (value < best_value) {
      best_value = value;
      best = x;
    }
  }
  return best;
}

}  // namespace detail

/// Runs the walk until at least half the coordinates sit at ±1. Instances with
/// n < 16 are colored completely by exhaustive search instead.
inline PartialColoringResult run(const PartialColoringInstance& inst) {
  WalkState s = initial_state(inst);
  PartialColoringResult out;
  out.delta = s.delta;

  if (detail::half_frozen(s.x)) {
    out.trace.records.push_back(detail::state_record(s));
    out.x = s.x;
    out.log_weights = s.log_weights;
    return out;
  }
  if (inst.n < kExhaustiveBelow) {
    out.trace.exhaustive = true;
    out.trace.records.push_back(detail::state_record(s));
    out.x = detail::exhaustive(inst);
    out.log_weights = closed_form_log_weights(inst, out.x, 0, s.delta);
    return out;
  }

  const Index small = (inst.lambdas.array() <= 1.0).count();
  if (8 * small > inst.n) {
    throw InfeasibleInstance("partial coloring: " + std::to_string(small) +
                             " constraints have lambda <= 1, more than n/8");
  }

  const double n = static_cast<double>(inst.n);
  const std::size_t cap = static_cast<std::size_t>(
      std::floor(2.0 * n / (s.delta * s.delta)));

  const detail::SignClasses classes = detail::sign_classes(inst.vectors);
  while (true) {
    IterationRecord rec = detail::state_record(s);
    if (detail::half_frozen(s.x)) {
      out.trace.records.push_back(rec);
      break;
    }
    if (s.t >= cap) {
      out.trace.records.push_back(rec);
      throw AlgorithmStuck("partial coloring: iteration bound 2n/delta^2 = " +
                               std::to_string(cap) + " exceeded",
                           std::move(out.trace));
    }
    const detail::Constraints c = detail::build_reduced(inst, s, classes);
    const NullDirection dir = first_null_direction(c.rows);
    rec.subspace_dim = static_cast<long>(dir.dim);
    if (dir.dim == 0) {
      out.trace.records.push_back(rec);
      throw AlgorithmStuck("partial coloring: empty subspace at iteration " +
                               std::to_string(s.t),
                           std::move(out.trace));
    }
    Vector z = Vector::Zero(inst.n);
    z(s.active) = dir.direction;
    const double alpha = max_step(s.x, z, s.delta);
    const Vector y = alpha * z;

    rec.step_scale = alpha;
    if (c.trace_bound > 0.0) {
      const Vector ya = alpha * dir.direction;
      rec.quadratic_ratio = ya.dot(c.quadratic * ya) / c.trace_bound;
    }
    if (c.drift_row >= 0) {
      const auto drift = c.rows.row(c.drift_row);
      const double nrm = drift.norm();
      rec.linear_residual =
          nrm > 0 ? std::abs(drift.dot(alpha * dir.direction)) / nrm : 0.0;
    }
    out.trace.records.push_back(rec);

    s.x = apply_step(s.x, z, s.delta, alpha);
    update_weights(s, inst, y);
    s.active = active_coordinates(s.x);
  }
  out.x = s.x;
  out.log_weights = s.log_weights;
  return out;
}

}  // namespace discmwu::partial
