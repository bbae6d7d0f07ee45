#pragma once

// Full ±1 colorings of set systems by repeated partial coloring.
//
// Each phase restricts every set to the still-active elements A, turns it
// into the pair ±1_{S∩A}/√|A| (so both signs of the imbalance are
// controlled), and runs the partial-coloring walk with a uniform slack
// λ = 4√ln(32·m′/|A|), m′ being the number of constraint vectors. At least
// half of A is frozen per phase, so there are at most ⌈log₂ n⌉ + 1 phases.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "discmwu/coloring.hpp"
#include "discmwu/errors.hpp"
#include "discmwu/linalg.hpp"
#include "discmwu/partial_coloring.hpp"
#include "discmwu/trace.hpp"

namespace discmwu {

/// Ground set {0, …, n−1} and m subsets. Indices are 0-based in memory; the
/// JSON format uses 1-based indices.
struct SetSystem {
  Index n = 0;
  std::vector<std::vector<Index>> sets;

  Index m() const { return static_cast<Index>(sets.size()); }
};

/// Throws InputError unless n ≥ 1, m ≥ 1, every index lies in [0, n) and no
/// set repeats an index.
inline void validate(const SetSystem& sys) {
  if (sys.n < 1) throw InputError("set system: n must be positive");
  if (sys.sets.empty()) throw InputError("set system: needs at least one set");
  std::vector<std::size_t> seen(static_cast<std::size_t>(sys.n), 0);
  for (std::size_t i = 0; i < sys.sets.size(); ++i) {
    for (Index j : sys.sets[i]) {
      if (j < 0 || j >= sys.n) {
        throw InputError("set system: set " + std::to_string(i + 1) +
                         " has index " + std::to_string(j + 1) +
                         " outside [1, " + std::to_string(sys.n) + "]");
      }
      auto& mark = seen[static_cast<std::size_t>(j)];
      if (mark == i + 1) {
        throw InputError("set system: set " + std::to_string(i + 1) +
                         " repeats index " + std::to_string(j + 1));
      }
      mark = i + 1;
    }
  }
}

/// χ(S) = Σ_{j∈S} χⱼ for every set, exactly.
inline std::vector<std::int64_t> set_sums(const SetSystem& sys,
                                          const Coloring& chi) {
  if (chi.n() != sys.n) {
    throw InputError("discrepancy: coloring has length " +
                     std::to_string(chi.n()) + ", set system has n = " +
                     std::to_string(sys.n));
  }
  std::vector<std::int64_t> sums;
  sums.reserve(sys.sets.size());
  for (const auto& s : sys.sets) {
    std::int64_t total = 0;
    for (Index j : s) total += chi.chi[static_cast<std::size_t>(j)];
    sums.push_back(total);
  }
  return sums;
}

/// maxᵢ |χ(Sᵢ)|.
inline std::int64_t discrepancy(const SetSystem& sys, const Coloring& chi) {
  std::int64_t worst = 0;
  for (std::int64_t s : set_sums(sys, chi)) worst = std::max(worst, s < 0 ? -s : s);
  return worst;
}

struct PhaseTrace {
  std::vector<Index> active;  // A at the start of the phase
  double lambda = 0.0;
  double delta = 0.0;
  Index constraints = 0;      // number of ± incidence vectors
  WalkTrace walk;
  Vector x_start;             // values on `active` before the phase
  Vector x_end;               // values on `active` after the phase
};

struct SetColoringResult {
  Coloring chi;
  std::vector<PhaseTrace> phases;
};

struct SetColoringOptions {
  double lambda_scale = 1.0;
};

/// The uniform slack used for a phase with `constraints` vectors on
/// `active` elements.
inline double phase_lambda(Index constraints, Index active,
                           double lambda_scale = 1.0) {
  if (constraints == 0) return 0.0;
  const double arg = std::log(32.0 * static_cast<double>(constraints) /
                              static_cast<double>(active));
  return lambda_scale * 4.0 * std::sqrt(std::max(0.0, arg));
}

inline SetColoringResult color(const SetSystem& sys,
                               const SetColoringOptions& opt = {}) {
  validate(sys);
  Vector x = Vector::Zero(sys.n);
  SetColoringResult out;

  while (true) {
    const std::vector<Index> act = partial::active_coordinates(x);
    if (act.empty()) break;
    const Index s = static_cast<Index>(act.size());
    std::vector<Index> local(static_cast<std::size_t>(sys.n), -1);
    for (Index r = 0; r < s; ++r) local[static_cast<std::size_t>(act[r])] = r;

    std::vector<Vector> rows;
    const double scale = 1.0 / std::sqrt(static_cast<double>(s));
    for (const auto& set : sys.sets) {
      Vector v = Vector::Zero(s);
      bool any = false;
      for (Index j : set) {
        const Index r = local[static_cast<std::size_t>(j)];
        if (r >= 0) {
          v(r) = scale;
          any = true;
        }
      }
      if (any) rows.push_back(std::move(v));
    }
    const Index half = static_cast<Index>(rows.size());
    Matrix vectors(2 * half, s);
    for (Index i = 0; i < half; ++i) {
      vectors.row(i) = rows[static_cast<std::size_t>(i)].transpose();
      vectors.row(half + i) = -rows[static_cast<std::size_t>(i)].transpose();
    }

    PhaseTrace phase;
    phase.active = act;
    phase.constraints = 2 * half;
    phase.lambda = phase_lambda(2 * half, s, opt.lambda_scale);
    phase.x_start = x(act);
    const Vector lambdas = Vector::Constant(2 * half, phase.lambda);
    const partial::PartialColoringInstance inst = partial::preprocess(
        vectors, lambdas, phase.x_start, partial::NormPolicy::AtMostUnit);
    partial::PartialColoringResult res = partial::run(inst);
    phase.delta = res.delta;
    phase.walk = std::move(res.trace);
    phase.x_end = res.x;
    x(act) = res.x;
    if (partial::active_coordinates(x).size() * 2 > act.size()) {
      throw InvariantViolation("set coloring: phase froze fewer than half");
    }
    out.phases.push_back(std::move(phase));
  }

  out.chi = sign_round(x);
  return out;
}

}  // namespace discmwu
