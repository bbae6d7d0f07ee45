#pragma once

#include <string>
#include <vector>

#include "discmwu/errors.hpp"
#include "discmwu/linalg.hpp"

namespace discmwu {

/// χ ∈ {−1, +1}ⁿ.
struct Coloring {
  std::vector<int> chi;

  Index n() const { return static_cast<Index>(chi.size()); }
};

inline void validate(const Coloring& c) {
  for (std::size_t j = 0; j < c.chi.size(); ++j) {
    if (c.chi[j] != 1 && c.chi[j] != -1) {
      throw InputError("coloring: entry " + std::to_string(j + 1) + " is " +
                       std::to_string(c.chi[j]) + ", expected +1 or -1");
    }
  }
}

/// Rounds a fractional point to signs, with 0 going to +1.
inline Coloring sign_round(const Vector& x) {
  Coloring c;
  c.chi.resize(static_cast<std::size_t>(x.size()));
  for (Index j = 0; j < x.size(); ++j) {
    c.chi[static_cast<std::size_t>(j)] = x(j) >= 0.0 ? 1 : -1;
  }
  return c;
}

inline Vector to_vector(const Coloring& c) {
  Vector x(c.n());
  for (Index j = 0; j < c.n(); ++j) x(j) = c.chi[static_cast<std::size_t>(j)];
  return x;
}

}  // namespace discmwu
