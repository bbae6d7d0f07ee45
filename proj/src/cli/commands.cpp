#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "discmwu/coloring.hpp"
#include "discmwu/column_balancing.hpp"
#include "discmwu/errors.hpp"
#include "discmwu/generators.hpp"
#include "discmwu/io.hpp"
#include "discmwu/matrix_balancing.hpp"
#include "discmwu/set_coloring.hpp"
#include "discmwu/verify.hpp"

namespace discmwu::cli {
namespace {

using io::Json;

bool looks_inline(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  return first != std::string::npos && s[first] == '{';
}

Json json_arg(const std::string& text_or_path, const std::string& what) {
  if (looks_inline(text_or_path)) return io::parse_json(text_or_path, what);
  return io::parse_json(io::read_file(text_or_path), text_or_path);
}

Instance read_instance(const std::string& path) {
  return io::instance_from_text(io::read_file(path), path);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void check_algo(const std::string& algo) {
  if (algo != "spencer" && algo != "matrix" && algo != "bdg") {
    throw InputError("unknown algorithm '" + algo + "' (expected spencer, matrix or bdg)");
  }
}

// The instance type each algorithm accepts. A set system given to `matrix`
// is turned into its q = 1 diagonal encoding.
const SetSystem& as_sets(const Instance& inst, const std::string& algo) {
  if (const auto* s = std::get_if<SetSystem>(&inst)) return *s;
  throw InputError(algo + " needs a set system instance");
}

BlockMatrixFamily as_family(const Instance& inst) {
  if (const auto* f = std::get_if<BlockMatrixFamily>(&inst)) return *f;
  if (const auto* s = std::get_if<SetSystem>(&inst)) return diagonal_encoding(*s);
  throw InputError("matrix needs a block matrix family or a set system instance");
}

const ColumnInstance& as_columns(const Instance& inst) {
  if (const auto* c = std::get_if<ColumnInstance>(&inst)) return *c;
  throw InputError("bdg needs a column instance (CSV or JSON with \"rows\")");
}

BdgParams bdg_params(const ColumnInstance& inst, const SolveParams& p) {
  return BdgParams::defaults(inst.n(), p.bdg);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_generate(const std::string& spec_arg, const std::string& out) {
  const GeneratorSpec spec = io::generator_spec_from_json(json_arg(spec_arg, "spec"));
  const Instance inst = generate(spec);
  if (ends_with(out, ".csv")) {
    const auto* cols = std::get_if<ColumnInstance>(&inst);
    if (cols == nullptr) throw InputError("only column instances can be written as CSV");
    io::write_file(out, io::to_csv(*cols));
  } else {
    io::write_file(out, io::dump(io::to_json(inst)));
  }
  return kSuccess;
}

int cmd_solve(const std::string& algo, const std::string& in, const std::string& out,
              const std::string& trace_path, const SolveParams& params) {
  check_algo(algo);
  const Instance inst = read_instance(in);
  Coloring chi;
  Json trace;
  if (algo == "spencer") {
    const SetSystem& sys = as_sets(inst, algo);
    SetColoringOptions opt;
    opt.lambda_scale = params.lambda_scale;
    const SetColoringResult res = color(sys, opt);
    chi = res.chi;
    trace = io::trace_json(res);
    std::cout << "discrepancy " << discrepancy(sys, chi) << "\n";
  } else if (algo == "matrix") {
    const BlockMatrixFamily fam = as_family(inst);
    const MatrixFullResult res = run_full(fam);
    chi = res.chi;
    trace = io::trace_json(res);
    std::cout << "operator_norm " << fmt(verify::operator_norm(fam, to_vector(chi))) << "\n";
  } else {
    const ColumnInstance& cols = as_columns(inst);
    const ColumnResult res = run(cols, bdg_params(cols, params));
    chi = res.chi;
    trace = io::trace_json(res);
    std::cout << "max_row_discrepancy " << fmt(column_discrepancy(cols, chi)) << "\n";
  }
  io::write_file(out, io::dump(io::to_json(chi)));
  if (!trace_path.empty()) io::write_file(trace_path, io::dump(trace));
  return kSuccess;
}

int cmd_verify(const std::string& algo, const std::string& in, const std::string& coloring,
               const std::string& trace_path, const std::string& report_path) {
  check_algo(algo);
  const Instance inst = read_instance(in);
  const Coloring chi = io::coloring_from_json(
      io::parse_json(io::read_file(coloring), coloring));
  std::optional<Json> trace;
  if (trace_path.empty()) {
    std::cerr << "warning: no trace given, trace-only checks skipped\n";
  } else {
    trace = io::parse_json(io::read_file(trace_path), trace_path);
    const std::string recorded =
        trace->is_object() && trace->contains("algo") && (*trace)["algo"].is_string()
            ? (*trace)["algo"].get<std::string>()
            : "";
    if (recorded != algo) {
      throw InputError("trace was written by '" + recorded + "', not '" + algo + "'");
    }
  }

  verify::Report rep;
  if (algo == "spencer") {
    const SetSystem& sys = as_sets(inst, algo);
    if (trace) {
      const auto phases = io::set_phases_from_json(*trace);
      rep = verify::verify_set_coloring(sys, chi, &phases);
    } else {
      rep = verify::verify_set_coloring(sys, chi);
    }
  } else if (algo == "matrix") {
    BlockMatrixFamily fam = as_family(inst);
    if (trace) {
      const auto phases = io::matrix_phases_from_json(*trace);
      rep = verify::verify_matrix(fam, chi, &phases);
    } else {
      rep = verify::verify_matrix(fam, chi);
    }
  } else {
    const ColumnInstance& cols = as_columns(inst);
    if (trace) {
      const ColumnResult run = io::column_trace_from_json(*trace);
      rep = verify::verify_bdg(cols, chi, &run);
    } else {
      rep = verify::verify_bdg(cols, chi);
    }
  }

  for (const auto& c : rep.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " margin=" << fmt(c.margin) << "\n";
  }
  std::cout << rep.summary << "\n";
  if (!report_path.empty()) {
    Json checks = Json::array();
    for (const auto& c : rep.checks) {
      checks.push_back(Json{{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}});
    }
    io::write_file(report_path, io::dump(Json{{"checks", checks}, {"summary", rep.summary}}));
  }
  return rep.passed() ? kSuccess : kVerifyFailure;
}

std::vector<long> parse_sizes(const std::string& text) {
  std::vector<long> sizes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    const auto b = item.find_last_not_of(" \t");
    const std::string tok = item.substr(a, b - a + 1);
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || v < 1) throw InputError("bad size '" + tok + "' in --sizes");
    sizes.push_back(v);
  }
  return sizes;
}

int cmd_bench(const std::string& algo, const std::string& sizes_text, long seeds, long q,
              const std::string& out, bool timing) {
  check_algo(algo);
  if (seeds < 0) throw InputError("--seeds must be nonnegative");
  if (q < 1) throw InputError("--q must be positive");
  const std::vector<long> sizes = parse_sizes(sizes_text);
  if (algo == "matrix") {
    for (long n : sizes) {
      if (n % q != 0) {
        throw InputError("--q " + std::to_string(q) + " does not divide size " + std::to_string(n));
      }
    }
  }
  std::vector<BenchRow> rows;
  for (long n : sizes) {
    for (long s = 0; s < seeds; ++s) {
      rows.push_back(bench_cell(algo, n, algo == "matrix" ? q : 1,
                                static_cast<unsigned long long>(s), timing));
    }
  }
  io::write_file(out, bench_csv(rows));
  return kSuccess;
}

}  // namespace

SolveParams parse_params(const std::string& text_or_path) {
  const Json j = json_arg(text_or_path, "params");
  if (!j.is_object()) throw InputError("params: expected a JSON object");
  SolveParams p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it->is_number()) throw InputError("params: \"" + it.key() + "\" must be a number");
    const double v = it->get<double>();
    if (!(std::isfinite(v) && v > 0)) {
      throw InputError("params: \"" + it.key() + "\" must be positive");
    }
    if (it.key() == "C") {
      p.bdg.C = v;
    } else if (it.key() == "alpha_scale") {
      p.bdg.alpha_scale = v;
    } else if (it.key() == "beta_scale") {
      p.bdg.beta_scale = v;
    } else if (it.key() == "delta_scale") {
      p.bdg.delta_scale = v;
    } else if (it.key() == "lambda_scale") {
      p.lambda_scale = v;
    } else {
      throw InputError("params: unknown key \"" + it.key() + "\"");
    }
  }
  return p;
}

BenchRow bench_cell(const std::string& algo, long n, long q, unsigned long long seed,
                    bool timing) {
  BenchRow row;
  row.algo = algo;
  row.n = n;
  row.m = n;
  row.q = q;
  row.seed = seed;
  GeneratorSpec spec;
  spec.n = n;
  spec.m = n;
  spec.q = q;
  spec.seed = seed;
  spec.family = algo == "spencer" ? Family::RandomSetSystem
                : algo == "matrix" ? Family::RandomBlockFamily
                                   : Family::RandomUnitColumns;
  const Instance inst = generate(spec);
  const auto start = std::chrono::steady_clock::now();
  try {
    if (algo == "spencer") {
      const auto& sys = std::get<SetSystem>(inst);
      const SetColoringResult res = color(sys);
      row.metric = static_cast<double>(discrepancy(sys, res.chi));
      row.bound_ratio = row.metric / verify::spencer_bound_form(n, n);
      for (const auto& p : res.phases) row.iterations += static_cast<long>(p.walk.iterations());
    } else if (algo == "matrix") {
      const auto& fam = std::get<BlockMatrixFamily>(inst);
      const MatrixFullResult res = run_full(fam);
      row.metric = verify::operator_norm(fam, to_vector(res.chi));
      row.bound_ratio = row.metric / verify::matrix_bound_form(n, n, q);
      for (const auto& p : res.phases) row.iterations += static_cast<long>(p.walk.iterations());
    } else {
      const auto& cols = std::get<ColumnInstance>(inst);
      const ColumnResult res = run(cols);
      row.metric = column_discrepancy(cols, res.chi);
      row.bound_ratio = row.metric / verify::column_bound_form(n);
      row.iterations = static_cast<long>(res.trace.iterations());
    }
  } catch (const std::exception& e) {
    std::cerr << "bench " << algo << " n=" << n << " seed=" << seed << ": " << e.what() << "\n";
    row.metric = std::numeric_limits<double>::quiet_NaN();
    row.bound_ratio = row.metric;
    row.iterations = 0;
  }
  if (timing) {
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  }
  return row;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "algo,n,m,q,seed,metric,bound_ratio,iterations,wall_ms\n";
  for (const auto& r : rows) {
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.3f", r.wall_ms);
    out += r.algo + "," + std::to_string(r.n) + "," + std::to_string(r.m) + "," +
           std::to_string(r.q) + "," + std::to_string(r.seed) + "," +
           (std::isnan(r.metric) ? "nan" : fmt(r.metric)) + "," +
           (std::isnan(r.bound_ratio) ? "nan" : fmt(r.bound_ratio)) + "," +
           std::to_string(r.iterations) + "," + ms + "\n";
  }
  return out;
}

int main(int argc, char** argv) {
  CLI::App app{"Discrepancy minimization by multiplicative weights walks"};
  app.require_subcommand(1);

  std::string spec_arg, gen_out;
  auto* gen = app.add_subcommand("generate", "Write a seeded random instance");
  gen->add_option("--spec", spec_arg, "Generator spec JSON, inline or a file path")->required();
  gen->add_option("--out", gen_out, "Output path (.csv for column instances as CSV)")->required();

  std::string algo, in, out, trace_path, params_arg;
  std::optional<double> bdg_c, bdg_scale;
  auto* solve = app.add_subcommand("solve", "Color an instance");
  solve->add_option("--algo", algo, "spencer, matrix or bdg")->required();
  solve->add_option("--in", in, "Instance file")->required();
  solve->add_option("--out", out, "Coloring JSON output")->required();
  solve->add_option("--trace", trace_path, "Optional trace JSON output");
  solve->add_option("--params", params_arg, "Params JSON, inline or a file path");
  solve->add_option("--bdg-C", bdg_c, "Override C for bdg");
  solve->add_option("--bdg-scale", bdg_scale, "Override beta_scale for bdg");

  std::string v_algo, v_in, v_coloring, v_trace, v_report;
  auto* ver = app.add_subcommand("verify", "Check a coloring, and its trace if given");
  ver->add_option("--algo", v_algo, "spencer, matrix or bdg")->required();
  ver->add_option("--in", v_in, "Instance file")->required();
  ver->add_option("--coloring", v_coloring, "Coloring JSON")->required();
  ver->add_option("--trace", v_trace, "Trace JSON written by solve");
  ver->add_option("--report", v_report, "Optional report JSON output");

  std::string b_algo, b_sizes, b_out;
  long b_seeds = 1;
  long b_q = 1;
  bool b_no_timing = false;
  auto* bench = app.add_subcommand("bench", "Sweep sizes and seeds, write a CSV");
  bench->add_option("--algo", b_algo, "spencer, matrix or bdg")->required();
  bench->add_option("--sizes", b_sizes, "Comma separated sizes, n = m")->required();
  bench->add_option("--seeds", b_seeds, "Seeds 0..k-1")->required();
  bench->add_option("--q", b_q, "Block size for matrix");
  bench->add_option("--out", b_out, "CSV output")->required();
  bench->add_flag("--no-timing", b_no_timing, "Write 0 for wall_ms so output is byte stable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kInputFailure;
  }

  try {
    if (gen->parsed()) return cmd_generate(spec_arg, gen_out);
    if (solve->parsed()) {
      SolveParams params;
      if (!params_arg.empty()) params = parse_params(params_arg);
      if (bdg_c) params.bdg.C = *bdg_c;
      if (bdg_scale) params.bdg.beta_scale = *bdg_scale;
      return cmd_solve(algo, in, out, trace_path, params);
    }
    if (ver->parsed()) return cmd_verify(v_algo, v_in, v_coloring, v_trace, v_report);
    if (bench->parsed()) return cmd_bench(b_algo, b_sizes, b_seeds, b_q, b_out, !b_no_timing);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputFailure;
  } catch (const AlgorithmStuck& e) {
    std::cerr << "algorithm stuck: " << e.what() << " (after " << e.trace().iterations()
              << " iterations)\n";
    return kAlgorithmFailure;
  } catch (const ParameterFailure& e) {
    std::cerr << "parameter failure at iteration " << e.iteration() << ": " << e.what() << "\n";
    return kAlgorithmFailure;
  } catch (const SubspaceExhausted& e) {
    std::cerr << "subspace exhausted: " << e.what() << "\n";
    return kAlgorithmFailure;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return kAlgorithmFailure;
  }
  return kInputFailure;
}

}  // namespace discmwu::cli
