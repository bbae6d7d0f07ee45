#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "discmwu/trace.hpp"

namespace discmwu {

/// Malformed or inconsistent input: bad dimensions, non-finite entries,
/// parse failures, out-of-range indices.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The instance violates a hypothesis the algorithm needs.
class InfeasibleInstance : public InputError {
 public:
  using InputError::InputError;
};

/// pick_unit_vector was handed a zero-dimensional subspace.
class SubspaceExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A walk ran out of feasible directions or exceeded its iteration bound.
/// Carries the trace accumulated so far.
class AlgorithmStuck : public std::runtime_error {
 public:
  AlgorithmStuck(const std::string& what, WalkTrace trace)
      : std::runtime_error(what),
        trace_(std::make_shared<WalkTrace>(std::move(trace))) {}

  const WalkTrace& trace() const { return *trace_; }

 private:
  std::shared_ptr<const WalkTrace> trace_;
};

/// The column-balancing potential increased beyond tolerance, which means
/// the constants (C, alpha, beta, delta) are not large/small enough.
class ParameterFailure : public std::runtime_error {
 public:
  ParameterFailure(const std::string& what, std::size_t iteration)
      : std::runtime_error(what), iteration_(iteration) {}

  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

/// An internal invariant broke.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace discmwu
