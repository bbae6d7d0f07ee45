#pragma once

// Signs for a matrix with columns of norm at most 1 so that ‖Ax‖_∞ stays
// O(√log n).
//
// Rows are made one-sided by stacking ±A/√2 and then split by entry size into
// a light part (entries ≤ τ = 1/(C²√ln n)) and a heavy part. The potential
// Σ_light exp(α⟨Aᵢ,x⟩ + β·min(C, L(i,x))), with L the effective length
// Σⱼ(1 − xⱼ²)Aᵢⱼ², is kept from increasing. Heavy rows are frozen
// (⟨Aᵢ,y⟩ = 0) while their mass on active columns is at least C, after which
// only few nonzero entries remain.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "discmwu/coloring.hpp"
#include "discmwu/errors.hpp"
#include "discmwu/linalg.hpp"
#include "discmwu/partial_coloring.hpp"
#include "discmwu/trace.hpp"

namespace discmwu {

inline constexpr double kColumnNormTolerance = 1e-9;

struct ColumnInstance {
  Matrix a;  // m × n

  Index m() const { return a.rows(); }
  Index n() const { return a.cols(); }
};

inline void validate(const ColumnInstance& inst) {
  if (inst.n() < 1) throw InputError("column instance: n must be positive");
  if (!inst.a.allFinite()) throw InputError("column instance: non-finite entry");
  for (Index j = 0; j < inst.n(); ++j) {
    const double norm = inst.a.col(j).norm();
    if (norm > 1.0 + kColumnNormTolerance) {
      throw InputError("column instance: column " + std::to_string(j + 1) +
                       " has norm " + std::to_string(norm) + " > 1");
    }
  }
}

/// Multipliers on the default constants; all 1 gives the defaults.
struct BdgScales {
  double C = 48.0;
  double alpha_scale = 1.0;
  double beta_scale = 1.0;
  double delta_scale = 1.0;
};

/// Walk constants. `delta` is the smallest step ever used and the one the
/// monotonicity argument covers; steps start at `delta_max` and are halved
/// until the potential does not increase.
struct BdgParams {
  double alpha = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double delta_max = 0.0;
  double C = 0.0;

  /// ln max(n, 2), the logarithm used throughout.
  static double log_n(Index n) {
    return std::log(static_cast<double>(std::max<Index>(n, 2)));
  }

  static BdgParams defaults(Index n, const BdgScales& s = {}) {
    const double ln = log_n(n);
    BdgParams p;
    p.C = s.C;
    p.alpha = s.alpha_scale * std::sqrt(ln);
    p.beta = s.beta_scale * 600.0 * ln;
    p.delta = s.delta_scale / (36.0 * std::sqrt(p.beta));
    p.delta_max = std::max(p.delta, std::min(1.0, 1.0 / std::sqrt(ln)));
    return p;
  }

  /// Threshold separating light from heavy entries.
  double light_threshold(Index n) const { return 1.0 / (C * C * std::sqrt(log_n(n))); }

  /// Entry bound γ of the rescaled second-order subspace.
  double gamma() const { return 1.0 / (C * std::sqrt(beta)); }

  /// Throws InputError unless α, β, δ, C > 0, β ≥ Cα², δ ≤ 1/(36√β),
  /// δ ≤ delta_max ≤ 1 and β ≤ C² ln n (so light entries are at most γ).
  void validate(Index n) const {
    auto fail = [](const std::string& what) {
      throw InputError("bdg parameters: " + what);
    };
    if (!(alpha > 0 && beta > 0 && delta > 0 && C > 0)) {
      fail("alpha, beta, delta and C must be positive");
    }
    if (beta < C * alpha * alpha * (1.0 - 1e-12)) fail("need beta >= C*alpha^2");
    if (delta > (1.0 + 1e-12) / (36.0 * std::sqrt(beta))) {
      fail("need delta <= 1/(36 sqrt(beta))");
    }
    if (!(delta_max >= delta && delta_max <= 1.0)) {
      fail("need delta <= delta_max <= 1");
    }
    if (beta > C * C * log_n(n) * (1.0 + 1e-12)) {
      fail("need beta <= C^2 ln n so that light entries are at most gamma");
    }
  }
};

/// Row i of the split instance came from `sign`·A_source/√2.
struct RowOrigin {
  Index source = 0;
  int sign = 1;
};

struct RowClassification {
  std::vector<Index> light_rows;
  std::vector<Index> heavy_rows;
};

struct PreprocessedColumns {
  Index n = 0;
  Matrix rows;  // split rows, light and heavy interleaved by source order
  std::vector<RowOrigin> origin;
  RowClassification classes;
  std::vector<Index> dropped;  // original rows with ‖Aᵢ‖² ≤ 1/n
  double threshold = 0.0;
};

/// Drops rows with ‖Aᵢ‖² ≤ 1/n, stacks +A/√2 (all rows) over −A/√2, and
/// splits each stacked row into its light and heavy parts; parts that are
/// entirely zero are omitted.
inline PreprocessedColumns preprocess(const ColumnInstance& inst,
                                      const BdgParams& params) {
  validate(inst);
  const Index n = inst.n();
  PreprocessedColumns out;
  out.n = n;
  out.threshold = params.light_threshold(n);
  std::vector<Index> kept;
  for (Index i = 0; i < inst.m(); ++i) {
    if (inst.a.row(i).squaredNorm() <= 1.0 / static_cast<double>(n)) {
      out.dropped.push_back(i);
    } else {
      kept.push_back(i);
    }
  }
  std::vector<Vector> parts;
  const double root_half = std::sqrt(0.5);
  for (int sign : {1, -1}) {
    for (Index i : kept) {
      const Vector row = (sign * root_half) * inst.a.row(i).transpose();
      Vector light = Vector::Zero(n);
      Vector heavy = Vector::Zero(n);
      for (Index j = 0; j < n; ++j) {
        if (std::abs(row(j)) <= out.threshold) {
          light(j) = row(j);
        } else {
          heavy(j) = row(j);
        }
      }
      if (!light.isZero(0.0)) {
        out.classes.light_rows.push_back(static_cast<Index>(parts.size()));
        out.origin.push_back({i, sign});
        parts.push_back(std::move(light));
      }
      if (!heavy.isZero(0.0)) {
        out.classes.heavy_rows.push_back(static_cast<Index>(parts.size()));
        out.origin.push_back({i, sign});
        parts.push_back(std::move(heavy));
      }
    }
  }
  out.rows.resize(static_cast<Index>(parts.size()), n);
  for (std::size_t r = 0; r < parts.size(); ++r) {
    out.rows.row(static_cast<Index>(r)) = parts[r].transpose();
  }
  for (Index j = 0; j < n; ++j) {
    if (out.rows.col(j).norm() > 1.0 + kColumnNormTolerance) {
      throw InvariantViolation("column balancing: split column norm exceeds 1");
    }
  }
  return out;
}

/// L(i, x) = Σⱼ (1 − xⱼ²)·Aᵢⱼ².
inline double effective_length(const Vector& row, const Vector& x) {
  return ((1.0 - x.array().square()) * row.array().square()).sum();
}

/// ln Φ = ln Σ_light exp(α⟨Aᵢ,x⟩ + β·min(C, L(i,x))); −∞ without light rows.
inline double log_potential(const PreprocessedColumns& pre, const Vector& x,
                            const BdgParams& p) {
  const auto& light = pre.classes.light_rows;
  Vector e(static_cast<Index>(light.size()));
  const Eigen::ArrayXd slack = 1.0 - x.array().square();
  for (std::size_t r = 0; r < light.size(); ++r) {
    const auto row = pre.rows.row(light[r]);
    const double len = (slack * row.transpose().array().square()).sum();
    e(static_cast<Index>(r)) = p.alpha * row.dot(x) + p.beta * std::min(p.C, len);
  }
  return partial::log_sum_exp(e);
}

inline double potential(const PreprocessedColumns& pre, const Vector& x,
                        const BdgParams& p) {
  return std::exp(log_potential(pre, x, p));
}

/// Constraint rows (k' × n) whose common nullspace U satisfies
/// Σ wᵢ⟨Bᵢ,y⟩² ≤ k·Σ wᵢ Σⱼ yⱼ²Aᵢⱼ² for every y ∈ U, with k' < n/k.
/// Requires |Bᵢⱼ| ≤ |Aᵢⱼ| and w ≥ 0. Columns are rescaled to unit norm
/// (zero columns pass through), the eigenvectors u of the rescaled Gram
/// matrix with eigenvalue > k are found, and u∘c is returned per vector.
inline Matrix scaled_quadratic_subspace(const Matrix& a, const Matrix& b,
                                        const Vector& w, double k) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || w.size() != a.rows()) {
    throw InputError("scaled_quadratic_subspace: shape mismatch");
  }
  const Index d = a.cols();
  if (d == 0 || a.rows() == 0) return Matrix(0, d);
  const Vector root = w.cwiseMax(0.0).cwiseSqrt();
  const Matrix at = root.asDiagonal() * a;
  Matrix bt = root.asDiagonal() * b;
  const Vector c = at.colwise().norm().transpose();
  for (Index j = 0; j < d; ++j) {
    if (c(j) > 0.0) {
      bt.col(j) /= c(j);
    } else {
      bt.col(j).setZero();
    }
  }
  Matrix gram = Matrix::Zero(d, d);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(bt.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  const Index probe = std::min<Index>(static_cast<Index>(std::floor(d / k)) + 1, d);
  const EigenDecomposition top = top_eigenpairs(gram, probe);
  Index count = 0;
  while (count < probe && top.values(count) > k) ++count;
  if (count == probe && static_cast<double>(probe) * k >= d * (1.0 + 1e-9)) {
    throw InvariantViolation("scaled_quadratic_subspace: too many large eigenvalues");
  }
  Matrix rows(count, d);
  for (Index r = 0; r < count; ++r) {
    rows.row(r) = top.vectors.col(r).cwiseProduct(c).transpose();
  }
  return rows;
}

/// A heavy row's first iteration inside I⁽ᵗ⁾ together with its remaining
/// number of nonzero entries on active columns.
struct HeavyEvent {
  Index row = 0;  // index into PreprocessedColumns::rows
  std::size_t t = 0;
  Index support = 0;
};

struct ColumnResult {
  Coloring chi;
  Vector x_walk;  // point before final rounding
  WalkTrace trace;
  BdgParams params;
  std::vector<HeavyEvent> heavy_events;
  double max_frozen_heavy_product = 0.0;  // max |⟨Aᵢ,x⁽ᵗ⁾⟩| over heavy i ∉ I⁽ᵗ⁾
  double initial_log_potential = 0.0;
  Index light_rows = 0;
  Index heavy_rows = 0;
};

namespace column_detail {

struct Step {
  Vector x;
  double log_phi = 0.0;
  double delta = 0.0;
  double alpha = 0.0;
};

}  // namespace column_detail

/// The walk followed by sign rounding of the ≤ C leftover coordinates.
inline ColumnResult run(const ColumnInstance& inst, const BdgParams& p) {
  p.validate(inst.n());
  const PreprocessedColumns pre = preprocess(inst, p);
  const Index n = inst.n();
  const auto& light = pre.classes.light_rows;
  const auto& heavy = pre.classes.heavy_rows;
  const Matrix light_rows = pre.rows(light, Eigen::all);
  const Matrix heavy_rows = pre.rows(heavy, Eigen::all);
  const Index ml = light_rows.rows();
  const Index mh = heavy_rows.rows();
  const double gamma = p.gamma();

  ColumnResult out;
  out.params = p;
  out.light_rows = ml;
  out.heavy_rows = mh;

  Vector x = Vector::Zero(n);
  std::vector<Index> act = partial::active_coordinates(x);
  double log_phi = log_potential(pre, x, p);
  out.initial_log_potential = log_phi;
  std::vector<char> heavy_seen(static_cast<std::size_t>(mh), 0);

  const double cap_d = std::floor(2.0 * static_cast<double>(n) / (p.delta * p.delta));
  const std::size_t cap = static_cast<std::size_t>(
      std::min(cap_d, static_cast<double>(std::numeric_limits<std::size_t>::max() / 2)));
  const double accept_tol = 1e-12;
  const double floor_tol = std::log1p(1e-8);

  for (std::size_t t = 0;; ++t) {
    IterationRecord rec;
    rec.t = t;
    rec.log_potential = log_phi;
    rec.potential = std::exp(log_phi);
    rec.active = act.size();

    // Membership in I⁽ᵗ⁾.
    const Eigen::ArrayXd slack = 1.0 - x.array().square();
    std::vector<Index> light_in, light_out, heavy_out;
    Vector lengths(ml);
    for (Index r = 0; r < ml; ++r) {
      lengths(r) = (slack * light_rows.row(r).transpose().array().square()).sum();
      (lengths(r) < p.C ? light_in : light_out).push_back(r);
    }
    for (Index r = 0; r < mh; ++r) {
      double mass = 0.0;
      for (Index j : act) mass += heavy_rows(r, j) * heavy_rows(r, j);
      if (mass < p.C) {
        if (!heavy_seen[static_cast<std::size_t>(r)]) {
          heavy_seen[static_cast<std::size_t>(r)] = 1;
          Index support = 0;
          for (Index j : act) support += heavy_rows(r, j) != 0.0 ? 1 : 0;
          out.heavy_events.push_back({heavy[static_cast<std::size_t>(r)], t, support});
        }
      } else {
        heavy_out.push_back(r);
        out.max_frozen_heavy_product = std::max(
            out.max_frozen_heavy_product, std::abs(heavy_rows.row(r).dot(x)));
      }
    }

    if (static_cast<double>(act.size()) <= p.C) {
      rec.step_size = 0.0;
      out.trace.records.push_back(rec);
      break;
    }
    if (t >= cap) {
      out.trace.records.push_back(rec);
      throw AlgorithmStuck("column balancing: iteration bound 2n/delta^2 exceeded",
                           std::move(out.trace));
    }

    const Index d = static_cast<Index>(act.size());
    const Index k_in = static_cast<Index>(light_in.size());
    Matrix a_in(k_in, d);
    Vector logw(k_in);
    for (Index r = 0; r < k_in; ++r) {
      const Index row = light_in[static_cast<std::size_t>(r)];
      a_in.row(r) = light_rows(row, act);
      logw(r) = p.alpha * light_rows.row(row).dot(x) +
                p.beta * std::min(p.C, lengths(row));
    }
    const Vector w = k_in > 0 ? Vector((logw.array() - logw.maxCoeff()).exp())
                              : Vector(0);
    const Vector xa = x(act);
    Matrix b_in = a_in.array().square().rowwise() * xa.transpose().array();

    Matrix u5, u6;
    Vector first(d), second(d);
    first.setZero();
    second.setZero();
    if (k_in > 0) {
      first = a_in.transpose() * w;
      second = b_in.transpose() * w;
      u5 = scaled_quadratic_subspace(a_in, a_in, w, 16.0);
      u6 = scaled_quadratic_subspace(a_in, b_in / gamma, w, 16.0);
    } else {
      u5.resize(0, d);
      u6.resize(0, d);
    }

    const Index n_out = static_cast<Index>(light_out.size() + heavy_out.size());
    Matrix rows(1 + n_out + 2 + u5.rows() + u6.rows(), d);
    Index r = 0;
    rows.row(r++) = xa.transpose();
    for (Index i : light_out) rows.row(r++) = light_rows(i, act);
    for (Index i : heavy_out) rows.row(r++) = heavy_rows(i, act);
    const Index first_row = r;
    rows.row(r++) = first.transpose();
    rows.row(r++) = second.transpose();
    if (u5.rows() > 0) rows.middleRows(r, u5.rows()) = u5;
    r += u5.rows();
    if (u6.rows() > 0) rows.middleRows(r, u6.rows()) = u6;

    const NullDirection dir = first_null_direction(rows);
    rec.subspace_dim = static_cast<long>(dir.dim);
    if (dir.dim == 0) {
      out.trace.records.push_back(rec);
      throw AlgorithmStuck("column balancing: empty subspace at iteration " +
                               std::to_string(t),
                           std::move(out.trace));
    }
    Vector z = Vector::Zero(n);
    z(act) = dir.direction;

    // Largest step from delta_max down by halving whose potential does not
    // increase; the proof-safe floor is accepted up to rounding.
    column_detail::Step step;
    double delta = p.delta_max;
    while (true) {
      const double alpha = partial::max_step(x, z, delta);
      Vector next = partial::apply_step(x, z, delta, alpha);
      const double next_log = log_potential(pre, next, p);
      const bool at_floor = delta <= p.delta * (1.0 + 1e-12);
      const double rise = next_log - log_phi;
      const bool ok = ml == 0 || !(rise > (at_floor ? floor_tol : accept_tol));
      if (ok) {
        step = {std::move(next), next_log, delta, alpha};
        break;
      }
      if (at_floor) {
        out.trace.records.push_back(rec);
        throw ParameterFailure("column balancing: potential increased by " +
                                   std::to_string(rise) + " (log scale) at iteration " +
                                   std::to_string(t) + " with the smallest step",
                               t);
      }
      delta = std::max(0.5 * delta, p.delta);
    }

    const Vector ya = step.alpha * dir.direction;
    rec.step_scale = step.alpha;
    rec.step_size = step.delta;
    if (k_in > 0) {
      const Vector proj = a_in * ya;
      const double rhs =
          (w.asDiagonal() * a_in.array().square().matrix() * ya.array().square().matrix())
              .sum();
      const double lhs = (w.array() * proj.array().square()).sum();
      rec.quadratic_ratio = rhs > 0.0 ? lhs / (16.0 * rhs) : 0.0;
      double resid = 0.0;
      for (Index q = first_row; q < first_row + 2; ++q) {
        const double nrm = rows.row(q).norm();
        if (nrm > 0.0) resid = std::max(resid, std::abs(rows.row(q).dot(ya)) / nrm);
      }
      rec.linear_residual = resid;
    }
    out.trace.records.push_back(rec);

    x = std::move(step.x);
    log_phi = step.log_phi;
    act = partial::active_coordinates(x);
  }

  out.x_walk = x;
  out.chi = sign_round(x);
  return out;
}

inline ColumnResult run(const ColumnInstance& inst) {
  return run(inst, BdgParams::defaults(inst.n()));
}

/// ‖Ax‖_∞ on the original matrix.
inline double column_discrepancy(const ColumnInstance& inst, const Coloring& chi) {
  if (chi.n() != inst.n()) {
    throw InputError("column discrepancy: coloring has length " +
                     std::to_string(chi.n()) + ", matrix has n = " +
                     std::to_string(inst.n()));
  }
  if (inst.m() == 0) return 0.0;
  return (inst.a * to_vector(chi)).cwiseAbs().maxCoeff();
}

}  // namespace discmwu
