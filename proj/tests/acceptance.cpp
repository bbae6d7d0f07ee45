// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "discmwu/column_balancing.hpp"
#include "discmwu/generators.hpp"
#include "discmwu/io.hpp"
#include "discmwu/linalg.hpp"
#include "discmwu/matrix_balancing.hpp"
#include "discmwu/partial_coloring.hpp"
#include "discmwu/set_coloring.hpp"
#include "discmwu/verify.hpp"

using namespace discmwu;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  double seconds = 0.0;
  double limit_seconds = 0.0;  // 0 means no runtime bound
};

std::map<int, Outcome> outcomes;

// Subspace-dimension checks gathered from every run for criterion 3.
struct DimensionTally {
  int runs = 0;
  int violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();

  void add(const verify::Report& rep) {
    const verify::Check* c = rep.find("subspace_dimension");
    if (c == nullptr) return;
    ++runs;
    if (!c->pass) ++violations;
    worst_margin = std::min(worst_margin, c->margin);
  }
};

DimensionTally dims_partial, dims_spencer, dims_matrix, dims_column;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Counts failed checks by name across reports.
struct Failures {
  std::map<std::string, int> count;

  void add(const verify::Report& rep, const std::vector<std::string>& names) {
    for (const auto& name : names) {
      const verify::Check* c = rep.find(name);
      if (c == nullptr || !c->pass) ++count[name];
    }
  }
  int total() const {
    int t = 0;
    for (const auto& [name, n] : count) t += n;
    return t;
  }
  std::string describe() const {
    if (count.empty()) return "no violations";
    std::string s;
    for (const auto& [name, n] : count) s += (s.empty() ? "" : ", ") + name + " x" + std::to_string(n);
    return s;
  }
};

// ---------------------------------------------------------------------------
// Criteria 1 and 2: partial coloring on 50 instances.

partial::PartialColoringInstance partial_instance(int index) {
  static const Index sizes[] = {32, 64, 128};
  const Index n = sizes[index % 3];
  Rng rng(1000 + static_cast<std::uint64_t>(index));
  Matrix v(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      // Even instances: Gaussian directions. Odd: normalized sign vectors.
      v(i, j) = index % 2 == 0 ? rng.normal() : (rng.coin() ? 1.0 : -1.0);
    }
    v.row(i).normalize();
  }
  // Σ exp(−λ²/16) = n/32 exactly at the uniform slack 4√ln 32.
  const Vector lambdas = Vector::Constant(n, 4.0 * std::sqrt(std::log(32.0)));
  return partial::preprocess(v, lambdas, Vector::Zero(n));
}

struct PartialRun {
  partial::PartialColoringInstance inst;
  partial::PartialColoringResult res;
};

std::vector<PartialRun> partial_runs;

void run_partial_instances() {
  const auto start = Clock::now();
  for (int k = 0; k < 50; ++k) {
    PartialRun r{partial_instance(k), {}};
    r.res = partial::run(r.inst);
    partial_runs.push_back(std::move(r));
  }
  const double elapsed = seconds_since(start);

  Failures mono, post;
  int walk_steps = 0;
  for (const auto& r : partial_runs) {
    const auto rep = verify::verify_partial(r.inst, r.res.x, r.res.trace);
    mono.add(rep, {"monotone_potential"});
    post.add(rep, {"in_cube", "half_integral", "lambda_bound", "weight_bound", "iteration_bound"});
    dims_partial.add(rep);
    walk_steps += static_cast<int>(r.res.trace.iterations());
  }
  outcomes[1] = {mono.total() == 0,
                 "50 instances, " + std::to_string(walk_steps) + " steps, " + mono.describe(),
                 elapsed, 120.0};
  outcomes[2] = {post.total() == 0, "50 instances, " + post.describe(), elapsed, 0.0};
}

// ---------------------------------------------------------------------------
// Criteria 4 and 5: set coloring scaling and the random baseline.

SetSystem random_system(Index n, Index m, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.family = Family::RandomSetSystem;
  spec.n = n;
  spec.m = m;
  spec.seed = seed;
  return std::get<SetSystem>(generate(spec));
}

std::map<std::pair<Index, std::uint64_t>, std::string> spencer_dumps;

void run_spencer() {
  const auto start = Clock::now();
  Failures checks;
  std::map<Index, std::vector<double>> ratios;
  std::vector<double> solver_256, random_256;
  double worst = 0.0;
  for (Index n : {32, 64, 128, 256}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const SetSystem sys = random_system(n, n, seed);
      const auto res = color(sys);
      const auto rep = verify::verify_set_coloring(sys, res.chi, &res.phases);
      checks.add(rep, {"coloring_valid", "trace_shape", "monotone_potential", "trace_matches_coloring"});
      dims_spencer.add(rep);
      const double disc = static_cast<double>(discrepancy(sys, res.chi));
      const double ratio = disc / std::sqrt(static_cast<double>(n));
      ratios[n].push_back(ratio);
      worst = std::max(worst, ratio);
      if (n <= 128 && seed == 0) {
        spencer_dumps[{n, seed}] = io::dump(io::trace_json(res)) + io::dump(io::to_json(res.chi));
      }
      if (n == 256) {
        solver_256.push_back(disc);
        Rng rng(seed ^ 0x5eed5eedULL);
        for (int k = 0; k < 100; ++k) {
          Coloring c;
          for (Index j = 0; j < n; ++j) c.chi.push_back(rng.coin() ? 1 : -1);
          random_256.push_back(static_cast<double>(discrepancy(sys, c)));
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  const double growth = median(ratios[256]) / median(ratios[32]);
  const bool ok = worst <= verify::kSpencerConstant && growth <= 1.5 && checks.total() == 0;
  std::string medians;
  for (const auto& [n, r] : ratios) medians += " " + std::to_string(n) + ":" + fmt(median(r));
  outcomes[4] = {ok,
                 "max disc/sqrt(n) " + fmt(worst) + " (limit 30), median ratio growth 32->256 " +
                     fmt(growth) + " (limit 1.5), medians" + medians + ", " + checks.describe(),
                 elapsed, 600.0};
  const double solver_med = median(solver_256);
  const double random_med = median(random_256);
  outcomes[5] = {solver_med < random_med,
                 "n=256 solver median " + fmt(solver_med) + " vs random median " + fmt(random_med),
                 0.0, 0.0};
}

// ---------------------------------------------------------------------------
// Criterion 6: matrix balancing.

BlockMatrixFamily random_family(Index n, Index m, Index q, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.family = Family::RandomBlockFamily;
  spec.n = n;
  spec.m = m;
  spec.q = q;
  spec.seed = seed;
  return std::get<BlockMatrixFamily>(generate(spec));
}

std::map<Index, std::string> matrix_dumps;

void run_matrix() {
  const auto start = Clock::now();
  Failures checks;
  double worst = 0.0;
  int runs = 0;
  for (Index q : {1, 2, 4}) {
    for (Index n : {32, 64}) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto fam = random_family(n, n, q, seed);
        const auto res = run_full(fam);
        const auto rep = verify::verify_matrix(fam, res.chi, &res.phases);
        checks.add(rep, {"coloring_valid", "potential_growth", "trace_shape", "trace_matches_coloring"});
        dims_matrix.add(rep);
        worst = std::max(worst, verify::operator_norm(fam, to_vector(res.chi)) /
                                    verify::matrix_bound_form(n, n, q));
        if (n == 32 && seed == 0) {
          matrix_dumps[q] = io::dump(io::trace_json(res)) + io::dump(io::to_json(res.chi));
        }
        ++runs;
      }
    }
  }
  outcomes[6] = {worst <= verify::kMatrixConstant && checks.total() == 0,
                 std::to_string(runs) + " runs, max norm ratio " + fmt(worst) + " (limit 30), " +
                     checks.describe(),
                 seconds_since(start), 900.0};
}

// ---------------------------------------------------------------------------
// Criterion 7: diagonal encoding agrees with set discrepancy.

void run_diagonal() {
  const auto start = Clock::now();
  int mismatches = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SetSystem sys = random_system(32, 32, 500 + seed);
    const auto fam = diagonal_encoding(sys);
    const auto res = run_full(fam);
    dims_matrix.add(verify::verify_matrix(fam, res.chi, &res.phases));
    const std::int64_t disc = discrepancy(sys, res.chi);
    const auto norm = static_cast<std::int64_t>(
        std::llround(verify::operator_norm(fam, to_vector(res.chi))));
    if (norm != disc) ++mismatches;
    worst = std::max(worst, static_cast<double>(disc) / std::sqrt(32.0));
  }
  outcomes[7] = {mismatches == 0 && worst <= verify::kSpencerConstant,
                 "5 systems, " + std::to_string(mismatches) +
                     " norm/discrepancy mismatches, max disc/sqrt(n) " + fmt(worst),
                 seconds_since(start), 0.0};
}

// ---------------------------------------------------------------------------
// Criterion 8: column balancing.

ColumnInstance unit_columns(Index n, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.family = Family::RandomUnitColumns;
  spec.n = n;
  spec.m = n;
  spec.seed = seed;
  return std::get<ColumnInstance>(generate(spec));
}

std::string column_dump;

void run_columns() {
  const auto start = Clock::now();
  Failures checks;
  double worst = 0.0;
  std::size_t heavy_events = 0;
  for (Index n : {64, 128, 256}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto inst = unit_columns(n, seed);
      const auto res = discmwu::run(inst);
      const auto rep = verify::verify_bdg(inst, res.chi, &res);
      checks.add(rep, {"coloring_valid", "monotone_potential", "heavy_support", "trace_matches_coloring"});
      dims_column.add(rep);
      heavy_events += res.heavy_events.size();
      worst = std::max(worst, column_discrepancy(inst, res.chi) / verify::column_bound_form(n));
      if (n == 64 && seed == 0) {
        column_dump = io::dump(io::trace_json(res)) + io::dump(io::to_json(res.chi));
      }
    }
  }
  outcomes[8] = {worst <= verify::kColumnConstant && checks.total() == 0,
                 "15 runs, max ratio " + fmt(worst) + " (limit 40), " +
                     std::to_string(heavy_events) + " heavy exits, " + checks.describe(),
                 seconds_since(start), 900.0};
}

// ---------------------------------------------------------------------------
// Criterion 9: brute-force oracle calibration.

SetSystem small_system(int index) {
  Rng rng(9000 + static_cast<std::uint64_t>(index));
  const Index n = 4 + static_cast<Index>(rng.below(9));  // 4..12
  const Index m = 2 + static_cast<Index>(rng.below(11));
  return random_system(n, m, 9000 + static_cast<std::uint64_t>(index));
}

std::vector<std::string> oracle_dumps;

void run_oracle() {
  const auto start = Clock::now();
  int witness_mismatch = 0, below_optimum = 0;
  std::string values;
  for (int k = 0; k < 20; ++k) {
    const SetSystem sys = small_system(k);
    const auto opt = verify::brute_force_min_discrepancy(sys);
    if (discrepancy(sys, opt.witness) != opt.value) ++witness_mismatch;
    const auto res = color(sys);
    if (discrepancy(sys, res.chi) < opt.value) ++below_optimum;
    oracle_dumps.push_back(io::dump(io::trace_json(res)));
    values += (values.empty() ? "" : ",") + std::to_string(discrepancy(sys, res.chi)) + "/" +
              std::to_string(opt.value);
  }
  outcomes[9] = {witness_mismatch == 0 && below_optimum == 0,
                 "20 systems, witness mismatches " + std::to_string(witness_mismatch) +
                     ", solver below optimum " + std::to_string(below_optimum) +
                     ", solver/optimum " + values,
                 seconds_since(start), 0.0};
}

// ---------------------------------------------------------------------------
// Criterion 10: rerun a subset of every kind of run and compare bytes.

void run_determinism() {
  const auto start = Clock::now();
  int compared = 0, differ = 0;
  auto same = [&](bool equal) {
    ++compared;
    if (!equal) ++differ;
  };
  for (int k = 0; k < 50; ++k) {
    const auto again = partial::run(partial_instance(k));
    const auto& first = partial_runs[static_cast<std::size_t>(k)].res;
    same(again.x.size() == first.x.size() && again.x == first.x && again.trace == first.trace);
  }
  for (const auto& [key, dump] : spencer_dumps) {
    const auto res = color(random_system(key.first, key.first, key.second));
    same(io::dump(io::trace_json(res)) + io::dump(io::to_json(res.chi)) == dump);
  }
  for (const auto& [q, dump] : matrix_dumps) {
    const auto res = run_full(random_family(32, 32, q, 0));
    same(io::dump(io::trace_json(res)) + io::dump(io::to_json(res.chi)) == dump);
  }
  {
    const auto res = discmwu::run(unit_columns(64, 0));
    same(io::dump(io::trace_json(res)) + io::dump(io::to_json(res.chi)) == column_dump);
  }
  for (int k = 0; k < 20; ++k) {
    same(io::dump(io::trace_json(color(small_system(k)))) == oracle_dumps[static_cast<std::size_t>(k)]);
  }
  outcomes[10] = {differ == 0,
                  std::to_string(compared) + " reruns, " + std::to_string(differ) + " differ",
                  seconds_since(start), 0.0};
}

// ---------------------------------------------------------------------------
// Criterion 11: numerical kernels.

void run_kernels() {
  const auto start = Clock::now();
  Rng rng(11);
  int eig_fail = 0, null_fail = 0;
  double worst_recon = 0.0, worst_orth = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Index d = 1 + static_cast<Index>(rng.below(32));
    Matrix a(d, d);
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) a(i, j) = rng.normal();
    }
    const SymmetricMatrix s(a);
    const auto e = eigh(s);
    const double recon = (e.reconstruct() - s.matrix()).norm() /
                         std::max(1.0, s.matrix().norm());
    const double orth =
        (e.vectors.transpose() * e.vectors - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    bool sorted = true;
    for (Index j = 1; j < d; ++j) sorted = sorted && e.values(j - 1) >= e.values(j);
    worst_recon = std::max(worst_recon, recon);
    if (recon > 1e-8 || orth > 1e-9 || !sorted) ++eig_fail;
  }
  for (int k = 0; k < 100; ++k) {
    const Index d = 2 + static_cast<Index>(rng.below(31));
    const Index rows = static_cast<Index>(rng.below(static_cast<std::uint64_t>(d + 4)));
    // Every third matrix is rank deficient: rows drawn from a low-rank span.
    const Index rank_cap = k % 3 == 0 ? std::max<Index>(1, rows / 2) : rows;
    Matrix basis(std::max<Index>(rank_cap, 1), d);
    for (Index i = 0; i < basis.rows(); ++i) {
      for (Index j = 0; j < d; ++j) basis(i, j) = rng.normal();
    }
    Matrix r(rows, d);
    for (Index i = 0; i < rows; ++i) {
      if (k % 3 == 0) {
        Vector mix(basis.rows());
        for (Index t = 0; t < mix.size(); ++t) mix(t) = rng.normal();
        r.row(i) = mix.transpose() * basis;
      } else {
        for (Index j = 0; j < d; ++j) r(i, j) = rng.normal();
      }
    }
    const auto u = nullspace_intersection(r);
    const Index rank = rows == 0 ? 0 : Eigen::FullPivLU<Matrix>(r).rank();
    bool ok = u.dim() == d - rank;
    if (u.dim() > 0) {
      ok = ok && (u.basis.transpose() * u.basis - Matrix::Identity(u.dim(), u.dim()))
                         .cwiseAbs()
                         .maxCoeff() <= 1e-9;
      for (Index i = 0; i < rows; ++i) {
        const double worst = (r.row(i) * u.basis).cwiseAbs().maxCoeff();
        const double limit = 1e-7 * r.row(i).norm();
        worst_orth = std::max(worst_orth, worst / std::max(r.row(i).norm(), 1e-300));
        ok = ok && worst <= limit;
      }
    }
    if (!ok) ++null_fail;
  }
  outcomes[11] = {eig_fail == 0 && null_fail == 0,
                  "eigh failures " + std::to_string(eig_fail) + "/100 (worst relative error " +
                      fmt(worst_recon, 3) + "), nullspace failures " + std::to_string(null_fail) +
                      "/100 (worst relative product " + fmt(worst_orth, 3) + ")",
                  seconds_since(start), 0.0};
}

void finish_dimensions() {
  std::string detail;
  int violations = 0;
  for (const auto& [label, tally] :
       std::vector<std::pair<std::string, const DimensionTally*>>{
           {"partial n/8", &dims_partial},
           {"set n/8", &dims_spencer},
           {"matrix n/4", &dims_matrix},
           {"column |A|/2", &dims_column}}) {
    violations += tally->violations;
    detail += (detail.empty() ? "" : ", ") + label + ": " + std::to_string(tally->runs) +
              " runs, min margin " + fmt(tally->worst_margin);
  }
  outcomes[3] = {violations == 0,
                 std::to_string(violations) + " violating runs; " + detail, 0.0, 0.0};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void()>>> stages = {
      {"partial coloring", run_partial_instances},
      {"set coloring", run_spencer},
      {"matrix balancing", run_matrix},
      {"diagonal encoding", run_diagonal},
      {"column balancing", run_columns},
      {"oracle", run_oracle},
      {"determinism", run_determinism},
      {"kernels", run_kernels},
  };
  for (const auto& [name, stage] : stages) {
    std::fprintf(stderr, "running %s...\n", name);
    try {
      stage();
    } catch (const std::exception& e) {
      std::fprintf(stderr, "%s threw: %s\n", name, e.what());
      outcomes[0].pass = false;
      outcomes[0].detail += std::string(name) + ": " + e.what() + "; ";
    }
  }
  finish_dimensions();

  bool all = outcomes[0].pass;
  for (int k = 1; k <= 11; ++k) {
    auto it = outcomes.find(k);
    if (it == outcomes.end()) {
      std::printf("criterion %2d: FAIL not run (stage error)\n", k);
      all = false;
      continue;
    }
    Outcome& o = it->second;
    std::string runtime;
    if (o.seconds > 0.0) {
      runtime = ", " + fmt(o.seconds, 3) + " s";
      if (o.limit_seconds > 0.0) {
        runtime += " (limit " + fmt(o.limit_seconds, 3) + " s)";
        if (o.seconds > o.limit_seconds) o.pass = false;
      }
    }
    std::printf("criterion %2d: %s %s%s\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                runtime.c_str());
    all = all && o.pass;
  }
  if (!outcomes[0].pass) std::printf("stage errors: %s\n", outcomes[0].detail.c_str());
  std::fflush(stdout);
  return all ? 0 : 1;
}
