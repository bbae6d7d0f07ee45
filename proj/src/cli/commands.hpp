#pragma once

#include <string>
#include <vector>

#include "discmwu/column_balancing.hpp"

namespace discmwu::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputFailure = 2,
  kAlgorithmFailure = 3,
  kVerifyFailure = 4,
};

/// Tunable constants accepted by `solve --params`.
struct SolveParams {
  double lambda_scale = 1.0;
  BdgScales bdg;
};

/// Parses a params object given inline (text starting with '{') or as a
/// file path. Keys: C, alpha_scale, beta_scale, delta_scale, lambda_scale.
SolveParams parse_params(const std::string& text_or_path);

struct BenchRow {
  std::string algo;
  long n = 0;
  long m = 0;
  long q = 1;
  unsigned long long seed = 0;
  double metric = 0.0;
  double bound_ratio = 0.0;
  long iterations = 0;
  double wall_ms = 0.0;
};

/// Runs one benchmark cell. Solver errors yield NaN metric and ratio.
BenchRow bench_cell(const std::string& algo, long n, long q,
                    unsigned long long seed, bool timing);

std::string bench_csv(const std::vector<BenchRow>& rows);

/// Entry point shared by the executable and the tests.
int main(int argc, char** argv);

}  // namespace discmwu::cli
