#pragma once

#include <cstddef>
#include <vector>

namespace discmwu {

/// One row of a walk trace. Record t describes the state x⁽ᵗ⁾ and the step
/// taken from it; the terminal record has no step (step_scale 0, subspace_dim -1).
struct IterationRecord {
  std::size_t t = 0;
  double potential = 0.0;
  double log_potential = 0.0;
  double step_scale = 0.0;  // α⁽ᵗ⁾
  double step_size = 0.0;   // δ used for this step
  std::size_t active = 0;   // |A⁽ᵗ⁾|
  long subspace_dim = -1;   // dim U⁽ᵗ⁾
  // Measured quadratic error of the chosen step divided by the bound the
  // subspace construction guarantees (<= 1 expected).
  double quadratic_ratio = 0.0;
  // Normalized residual of the first-order constraint on the step
  // (0 up to rounding expected). Meaning is walk specific.
  double linear_residual = 0.0;

  bool operator==(const IterationRecord&) const = default;
};

struct WalkTrace {
  std::vector<IterationRecord> records;
  bool exhaustive = false;  // small-instance fallback, no walk performed

  std::size_t iterations() const {
    return records.empty() ? 0 : records.size() - 1;
  }

  bool operator==(const WalkTrace&) const = default;
};

}  // namespace discmwu
