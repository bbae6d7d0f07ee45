#pragma once

// Seeded instance generators.
//
// Randomness comes from std::mt19937_64 seeded with the 64-bit seed through
// its single-integer constructor. Raw 64-bit outputs are turned into values
// by the fixed rules below (and never by <random> distributions, whose
// algorithms are implementation defined), so a generated instance is the
// same on every platform and easy to reproduce in other languages:
//
//   uniform01   (r >> 11) · 2⁻⁵³                                 in [0, 1)
//   below(k)    rejection: draw r until r < k·⌊2⁶⁴/k⌋, return r mod k
//   coin        r >> 63 (the top bit)
//   normal      Box–Muller from two uniforms u₁, u₂:
//               √(−2 ln(1 − u₁)) · cos(2π u₂), the sine branch is discarded

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "discmwu/column_balancing.hpp"
#include "discmwu/errors.hpp"
#include "discmwu/linalg.hpp"
#include "discmwu/matrix_balancing.hpp"
#include "discmwu/set_coloring.hpp"

namespace discmwu {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  std::uint64_t below(std::uint64_t k) {
    if (k == 0) throw InputError("Rng::below: empty range");
    const std::uint64_t limit = k * (~std::uint64_t{0} / k);
    while (true) {
      const std::uint64_t r = next();
      if (r < limit) return r % k;
    }
  }

  bool coin() { return (next() >> 63) != 0; }

  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform permutation of {0, …, n−1} by Fisher–Yates from the back.
  std::vector<Index> permutation(Index n) {
    std::vector<Index> p(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    for (Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Index>(below(static_cast<std::uint64_t>(i + 1)));
      std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
  }

  /// k distinct values from {0, …, n−1}, sorted. Partial Fisher–Yates from
  /// the front.
  std::vector<Index> sample(Index n, Index k) {
    std::vector<Index> p(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    for (Index i = 0; i < k; ++i) {
      const auto j = i + static_cast<Index>(below(static_cast<std::uint64_t>(n - i)));
      std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    p.resize(static_cast<std::size_t>(k));
    std::sort(p.begin(), p.end());
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

enum class Family {
  RandomSetSystem,
  KUniformSetSystem,
  PermutationPrefixSystem,
  RandomUnitColumns,
  RandomBlockFamily,
  BeckFialaSystem,
};

inline std::string family_name(Family f) {
  switch (f) {
    case Family::RandomSetSystem: return "randomSetSystem";
    case Family::KUniformSetSystem: return "kUniformSetSystem";
    case Family::PermutationPrefixSystem: return "permutationPrefixSystem";
    case Family::RandomUnitColumns: return "randomUnitColumns";
    case Family::RandomBlockFamily: return "randomBlockFamily";
    case Family::BeckFialaSystem: return "beckFialaSystem";
  }
  return "";
}

inline Family parse_family(const std::string& name) {
  for (Family f : {Family::RandomSetSystem, Family::KUniformSetSystem,
                   Family::PermutationPrefixSystem, Family::RandomUnitColumns,
                   Family::RandomBlockFamily, Family::BeckFialaSystem}) {
    if (family_name(f) == name) return f;
  }
  throw InputError("generator: unknown family '" + name + "'");
}

/// Parameters of one generated instance. `m` is ignored by
/// permutationPrefixSystem, which always has k·n sets.
struct GeneratorSpec {
  Family family = Family::RandomSetSystem;
  Index n = 0;
  Index m = 0;
  Index k = 0;  // set size (kUniform) or number of permutations (prefix)
  Index q = 1;  // block size (randomBlockFamily)
  Index t = 0;  // memberships per element (beckFiala)
  std::uint64_t seed = 0;
  bool identity_first = false;  // prefix systems: first permutation is 1..n
  bool as_columns = false;      // beckFiala: export the scaled matrix
};

using Instance = std::variant<SetSystem, ColumnInstance, BlockMatrixFamily>;

inline void validate(const GeneratorSpec& s) {
  auto fail = [&](const std::string& what) {
    throw InputError("generator " + family_name(s.family) + ": " + what);
  };
  if (s.n < 1) fail("n must be positive");
  switch (s.family) {
    case Family::RandomSetSystem:
    case Family::RandomUnitColumns:
      if (s.m < 1) fail("m must be positive");
      break;
    case Family::KUniformSetSystem:
      if (s.m < 1) fail("m must be positive");
      if (s.k < 1 || s.k > s.n) fail("need 1 <= k <= n");
      break;
    case Family::PermutationPrefixSystem:
      if (s.k < 1) fail("k (number of permutations) must be positive");
      break;
    case Family::RandomBlockFamily:
      if (s.m < 1 || s.q < 1 || s.m % s.q != 0) fail("q must divide m");
      break;
    case Family::BeckFialaSystem:
      if (s.m < 1) fail("m must be positive");
      if (s.t < 1 || s.t > s.m) fail("need 1 <= t <= m");
      break;
  }
}

namespace generator_detail {

inline SetSystem random_sets(const GeneratorSpec& s, Rng& rng) {
  SetSystem sys;
  sys.n = s.n;
  sys.sets.resize(static_cast<std::size_t>(s.m));
  for (auto& set : sys.sets) {
    for (Index j = 0; j < s.n; ++j) {
      if (rng.coin()) set.push_back(j);
    }
  }
  return sys;
}

inline SetSystem k_uniform(const GeneratorSpec& s, Rng& rng) {
  SetSystem sys;
  sys.n = s.n;
  for (Index i = 0; i < s.m; ++i) sys.sets.push_back(rng.sample(s.n, s.k));
  return sys;
}

inline SetSystem prefixes(const GeneratorSpec& s, Rng& rng) {
  SetSystem sys;
  sys.n = s.n;
  for (Index p = 0; p < s.k; ++p) {
    std::vector<Index> perm;
    if (p == 0 && s.identity_first) {
      perm.resize(static_cast<std::size_t>(s.n));
      for (Index j = 0; j < s.n; ++j) perm[static_cast<std::size_t>(j)] = j;
    } else {
      perm = rng.permutation(s.n);
    }
    std::vector<Index> prefix;
    for (Index j : perm) {
      prefix.push_back(j);
      std::vector<Index> set = prefix;
      std::sort(set.begin(), set.end());
      sys.sets.push_back(std::move(set));
    }
  }
  return sys;
}

inline ColumnInstance unit_columns(const GeneratorSpec& s, Rng& rng) {
  ColumnInstance inst;
  inst.a.resize(s.m, s.n);
  for (Index j = 0; j < s.n; ++j) {
    for (Index i = 0; i < s.m; ++i) inst.a(i, j) = rng.normal();
    const double norm = inst.a.col(j).norm();
    if (norm > 1.0) inst.a.col(j) /= norm;
  }
  return inst;
}

inline BlockMatrixFamily blocks(const GeneratorSpec& s, Rng& rng) {
  BlockMatrixFamily fam;
  fam.n = s.n;
  fam.m = s.m;
  fam.q = s.q;
  fam.blocks.resize(static_cast<std::size_t>(s.n));
  for (auto& mats : fam.blocks) {
    double norm = 0.0;
    for (Index k = 0; k < s.m / s.q; ++k) {
      Matrix b(s.q, s.q);
      for (Index r = 0; r < s.q; ++r) {
        for (Index c = r; c < s.q; ++c) {
          b(r, c) = rng.normal();
          b(c, r) = b(r, c);
        }
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(b, Eigen::EigenvaluesOnly);
      norm = std::max(norm, es.eigenvalues().cwiseAbs().maxCoeff());
      mats.push_back(std::move(b));
    }
    if (norm > 0.0) {
      for (auto& b : mats) b /= norm;
    }
  }
  return fam;
}

inline SetSystem beck_fiala_sets(const GeneratorSpec& s, Rng& rng) {
  SetSystem sys;
  sys.n = s.n;
  sys.sets.resize(static_cast<std::size_t>(s.m));
  for (Index j = 0; j < s.n; ++j) {
    for (Index i : rng.sample(s.m, s.t)) {
      sys.sets[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  return sys;
}

}  // namespace generator_detail

/// Incidence matrix of a set system with every entry scaled by `scale`.
inline ColumnInstance incidence_matrix(const SetSystem& sys, double scale) {
  ColumnInstance inst;
  inst.a = Matrix::Zero(sys.m(), sys.n);
  for (Index i = 0; i < sys.m(); ++i) {
    for (Index j : sys.sets[static_cast<std::size_t>(i)]) inst.a(i, j) = scale;
  }
  return inst;
}

/// The q = 1 family Aⱼ = diag(1[j ∈ S₁], …, 1[j ∈ S_m]), whose signed-sum
/// operator norm is exactly the set discrepancy.
inline BlockMatrixFamily diagonal_encoding(const SetSystem& sys) {
  BlockMatrixFamily fam;
  fam.n = sys.n;
  fam.m = sys.m();
  fam.q = 1;
  fam.blocks.assign(static_cast<std::size_t>(sys.n),
                    std::vector<Matrix>(static_cast<std::size_t>(sys.m()),
                                        Matrix::Zero(1, 1)));
  for (Index i = 0; i < sys.m(); ++i) {
    for (Index j : sys.sets[static_cast<std::size_t>(i)]) {
      fam.blocks[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)](0, 0) = 1.0;
    }
  }
  return fam;
}

inline Instance generate(const GeneratorSpec& s) {
  validate(s);
  Rng rng(s.seed);
  switch (s.family) {
    case Family::RandomSetSystem: {
      SetSystem sys = generator_detail::random_sets(s, rng);
      validate(sys);
      return sys;
    }
    case Family::KUniformSetSystem: {
      SetSystem sys = generator_detail::k_uniform(s, rng);
      validate(sys);
      return sys;
    }
    case Family::PermutationPrefixSystem: {
      SetSystem sys = generator_detail::prefixes(s, rng);
      validate(sys);
      return sys;
    }
    case Family::RandomUnitColumns: {
      ColumnInstance inst = generator_detail::unit_columns(s, rng);
      validate(inst);
      return inst;
    }
    case Family::RandomBlockFamily: {
      BlockMatrixFamily fam = generator_detail::blocks(s, rng);
      validate(fam);
      return fam;
    }
    case Family::BeckFialaSystem: {
      SetSystem sys = generator_detail::beck_fiala_sets(s, rng);
      validate(sys);
      if (!s.as_columns) return sys;
      ColumnInstance inst =
          incidence_matrix(sys, 1.0 / std::sqrt(static_cast<double>(s.t)));
      validate(inst);
      return inst;
    }
  }
  throw InputError("generator: unhandled family");
}

}  // namespace discmwu
