#pragma once

// JSON and CSV readers and writers for every instance, result and trace type.
//
// Element indices are 1-based in files and 0-based in memory. Reals are
// written in the shortest form that reads back to the same double (JSON) or
// with 17 significant digits (CSV), so write then read is the identity.
// Non-finite reals, which only occur in traces, are written as the strings
// "inf", "-inf" and "nan".

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "discmwu/coloring.hpp"
#include "discmwu/column_balancing.hpp"
#include "discmwu/errors.hpp"
#include "discmwu/generators.hpp"
#include "discmwu/linalg.hpp"
#include "discmwu/matrix_balancing.hpp"
#include "discmwu/set_coloring.hpp"
#include "discmwu/trace.hpp"

namespace discmwu::io {

using Json = nlohmann::json;

/// Malformed input. `line` and `column` are 1-based; 0 means unknown.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : InputError(what), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

/// Parses JSON text, reporting failures with line and column.
inline Json parse_json(const std::string& text, const std::string& source = "input") {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(source + ":" + std::to_string(line) + ":" +
                         std::to_string(column) + ": invalid JSON",
                     line, column);
  }
}

inline std::string dump(const Json& j) { return j.dump(1) + "\n"; }

namespace io_detail {

[[noreturn]] inline void schema_error(const std::string& what) {
  throw ParseError(what, 0, 0);
}

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) schema_error(where + ": expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) schema_error(where + ": missing field \"" + key + "\"");
  return *it;
}

inline Index as_index(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) schema_error(where + ": expected an integer");
  return j.get<Index>();
}

inline double as_real(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  schema_error(where + ": expected a number");
}

inline Json real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(real(v(i)));
  return a;
}

inline Vector vector_from(const Json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where + ": expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Index>(i)) = as_real(j[i], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

inline Json indices_json(const std::vector<Index>& idx) {
  Json a = Json::array();
  for (Index i : idx) a.push_back(i + 1);
  return a;
}

inline std::vector<Index> indices_from(const Json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where + ": expected an array");
  std::vector<Index> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Index v = as_index(j[i], where + "[" + std::to_string(i) + "]");
    if (v < 1) schema_error(where + ": index " + std::to_string(v) + " is below 1");
    out.push_back(v - 1);
  }
  return out;
}

}  // namespace io_detail

// ---- set systems and colorings ---------------------------------------------

inline Json to_json(const SetSystem& sys) {
  Json sets = Json::array();
  for (const auto& s : sys.sets) sets.push_back(io_detail::indices_json(s));
  return Json{{"n", sys.n}, {"sets", sets}};
}

inline SetSystem set_system_from_json(const Json& j) {
  using namespace io_detail;
  SetSystem sys;
  sys.n = as_index(field(j, "n", "set system"), "set system n");
  const Json& sets = field(j, "sets", "set system");
  if (!sets.is_array()) schema_error("set system: \"sets\" must be an array");
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const std::string where = "set system set " + std::to_string(i + 1);
    if (!sets[i].is_array()) schema_error(where + ": expected an array");
    std::vector<Index> s;
    for (const Json& e : sets[i]) {
      const Index v = as_index(e, where);
      if (v < 1 || v > sys.n) {
        throw InputError(where + ": index " + std::to_string(v) +
                         " outside [1, " + std::to_string(sys.n) + "]");
      }
      s.push_back(v - 1);
    }
    sys.sets.push_back(std::move(s));
  }
  validate(sys);
  return sys;
}

inline Json to_json(const Coloring& c) { return Json{{"chi", c.chi}}; }

inline Coloring coloring_from_json(const Json& j) {
  using namespace io_detail;
  const Json& chi = field(j, "chi", "coloring");
  if (!chi.is_array()) schema_error("coloring: \"chi\" must be an array");
  Coloring c;
  for (std::size_t i = 0; i < chi.size(); ++i) {
    c.chi.push_back(static_cast<int>(as_index(chi[i], "coloring entry " + std::to_string(i + 1))));
  }
  validate(c);
  return c;
}

// ---- block matrix families -------------------------------------------------

inline Json to_json(const BlockMatrixFamily& fam) {
  Json mats = Json::array();
  for (const auto& blocks : fam.blocks) {
    Json row = Json::array();
    for (const Matrix& b : blocks) {
      Json flat = Json::array();
      for (Index r = 0; r < b.rows(); ++r) {
        for (Index c = 0; c < b.cols(); ++c) flat.push_back(b(r, c));
      }
      row.push_back(flat);
    }
    mats.push_back(row);
  }
  return Json{{"n", fam.n}, {"m", fam.m}, {"q", fam.q}, {"blocks", mats}};
}

/// Blocks may be given flat (q² numbers, row major) or as q rows of q.
inline BlockMatrixFamily block_family_from_json(const Json& j) {
  using namespace io_detail;
  BlockMatrixFamily fam;
  fam.n = as_index(field(j, "n", "block family"), "block family n");
  fam.m = as_index(field(j, "m", "block family"), "block family m");
  fam.q = as_index(field(j, "q", "block family"), "block family q");
  if (fam.n < 1 || fam.q < 1 || fam.m < 1 || fam.m % fam.q != 0) {
    throw InputError("block family: need n, m, q positive and q dividing m");
  }
  const Json& mats = field(j, "blocks", "block family");
  if (!mats.is_array()) schema_error("block family: \"blocks\" must be an array");
  for (std::size_t i = 0; i < mats.size(); ++i) {
    if (!mats[i].is_array()) {
      schema_error("block family: matrix " + std::to_string(i + 1) + " must be an array");
    }
    std::vector<Matrix> blocks;
    for (std::size_t k = 0; k < mats[i].size(); ++k) {
      const std::string where = "block family matrix " + std::to_string(i + 1) +
                                " block " + std::to_string(k + 1);
      const Json& b = mats[i][k];
      if (!b.is_array()) schema_error(where + ": expected an array");
      std::vector<double> flat;
      for (const Json& e : b) {
        if (e.is_array()) {
          for (const Json& v : e) flat.push_back(as_real(v, where));
        } else {
          flat.push_back(as_real(e, where));
        }
      }
      const auto qq = static_cast<std::size_t>(fam.q * fam.q);
      if (flat.size() != qq) {
        throw InputError(where + ": has " + std::to_string(flat.size()) +
                         " entries, expected " + std::to_string(qq));
      }
      Matrix mat(fam.q, fam.q);
      for (Index r = 0; r < fam.q; ++r) {
        for (Index c = 0; c < fam.q; ++c) {
          mat(r, c) = flat[static_cast<std::size_t>(r * fam.q + c)];
        }
      }
      blocks.push_back(std::move(mat));
    }
    fam.blocks.push_back(std::move(blocks));
  }
  validate(fam);
  return fam;
}

// ---- column instances ------------------------------------------------------

inline Json to_json(const ColumnInstance& inst) {
  Json rows = Json::array();
  for (Index i = 0; i < inst.m(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < inst.n(); ++j) row.push_back(inst.a(i, j));
    rows.push_back(row);
  }
  return Json{{"m", inst.m()}, {"n", inst.n()}, {"rows", rows}};
}

inline ColumnInstance column_instance_from_json(const Json& j) {
  using namespace io_detail;
  const Index m = as_index(field(j, "m", "column instance"), "column instance m");
  const Index n = as_index(field(j, "n", "column instance"), "column instance n");
  if (m < 0 || n < 1) throw InputError("column instance: need m >= 0 and n >= 1");
  const Json& rows = field(j, "rows", "column instance");
  if (!rows.is_array() || static_cast<Index>(rows.size()) != m) {
    throw InputError("column instance: \"rows\" must hold m = " + std::to_string(m) + " rows");
  }
  ColumnInstance inst;
  inst.a.resize(m, n);
  for (Index i = 0; i < m; ++i) {
    const Vector row = vector_from(rows[static_cast<std::size_t>(i)],
                                   "column instance row " + std::to_string(i + 1));
    if (row.size() != n) {
      throw InputError("column instance: row " + std::to_string(i + 1) + " has " +
                       std::to_string(row.size()) + " entries, expected " +
                       std::to_string(n));
    }
    inst.a.row(i) = row.transpose();
  }
  validate(inst);
  return inst;
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// m lines of n comma-separated reals.
inline std::string to_csv(const ColumnInstance& inst) {
  std::string out;
  for (Index i = 0; i < inst.m(); ++i) {
    for (Index j = 0; j < inst.n(); ++j) {
      if (j > 0) out += ',';
      out += format_real(inst.a(i, j));
    }
    out += '\n';
  }
  return out;
}

/// Blank lines are skipped. Every row must have the same number of fields.
inline ColumnInstance column_instance_from_csv(const std::string& text,
                                               const std::string& source = "input") {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      if (end == text.size()) break;
      continue;
    }
    std::vector<double> row;
    std::size_t col = 0;
    while (true) {
      std::size_t comma = line.find(',', col);
      if (comma == std::string::npos) comma = line.size();
      const std::string cell = line.substr(col, comma - col);
      const char* begin = cell.c_str();
      char* stop = nullptr;
      const double v = std::strtod(begin, &stop);
      const bool consumed = stop != begin &&
                            std::string(stop).find_first_not_of(" \t") == std::string::npos;
      if (!consumed) {
        throw ParseError(source + ":" + std::to_string(line_no) + ":" +
                             std::to_string(col + 1) + ": '" + cell +
                             "' is not a number",
                         line_no, col + 1);
      }
      row.push_back(v);
      if (comma == line.size()) break;
      col = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(source + ":" + std::to_string(line_no) + ":1: row has " +
                           std::to_string(row.size()) + " fields, expected " +
                           std::to_string(rows.front().size()),
                       line_no, 1);
    }
    rows.push_back(std::move(row));
    if (end == text.size()) break;
  }
  if (rows.empty()) throw ParseError(source + ": no rows", 0, 0);
  ColumnInstance inst;
  inst.a.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      inst.a(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  validate(inst);
  return inst;
}

// ---- generator specs -------------------------------------------------------

inline Json to_json(const GeneratorSpec& s) {
  Json j{{"family", family_name(s.family)}, {"n", s.n}, {"seed", s.seed}};
  switch (s.family) {
    case Family::RandomSetSystem:
    case Family::RandomUnitColumns:
      j["m"] = s.m;
      break;
    case Family::KUniformSetSystem:
      j["m"] = s.m;
      j["k"] = s.k;
      break;
    case Family::PermutationPrefixSystem:
      j["k"] = s.k;
      j["identity_first"] = s.identity_first;
      break;
    case Family::RandomBlockFamily:
      j["m"] = s.m;
      j["q"] = s.q;
      break;
    case Family::BeckFialaSystem:
      j["m"] = s.m;
      j["t"] = s.t;
      j["output"] = s.as_columns ? "columns" : "sets";
      break;
  }
  return j;
}

/// Keys: family, n, m, k, q, t, seed, identity_first, output ("sets" or
/// "columns"). Unknown keys are rejected.
inline GeneratorSpec generator_spec_from_json(const Json& j) {
  using namespace io_detail;
  if (!j.is_object()) schema_error("generator spec: expected a JSON object");
  static const std::vector<std::string> known = {
      "family", "n", "m", "k", "q", "t", "seed", "identity_first", "output"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw InputError("generator spec: unknown key \"" + it.key() + "\"");
    }
  }
  GeneratorSpec s;
  const Json& fam = field(j, "family", "generator spec");
  if (!fam.is_string()) schema_error("generator spec: \"family\" must be a string");
  s.family = parse_family(fam.get<std::string>());
  s.n = as_index(field(j, "n", "generator spec"), "generator spec n");
  if (j.contains("m")) s.m = as_index(j["m"], "generator spec m");
  if (j.contains("k")) s.k = as_index(j["k"], "generator spec k");
  if (j.contains("q")) s.q = as_index(j["q"], "generator spec q");
  if (j.contains("t")) s.t = as_index(j["t"], "generator spec t");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
      schema_error("generator spec: seed must be an integer");
    }
    if (j["seed"].is_number_integer() && !j["seed"].is_number_unsigned() &&
        j["seed"].get<std::int64_t>() < 0) {
      throw InputError("generator spec: seed must be nonnegative");
    }
    s.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("identity_first")) {
    if (!j["identity_first"].is_boolean()) {
      schema_error("generator spec: identity_first must be a boolean");
    }
    s.identity_first = j["identity_first"].get<bool>();
  }
  if (j.contains("output")) {
    const std::string out = j["output"].is_string() ? j["output"].get<std::string>() : "";
    if (out != "sets" && out != "columns") {
      throw InputError("generator spec: output must be \"sets\" or \"columns\"");
    }
    s.as_columns = out == "columns";
  }
  validate(s);
  return s;
}

inline Json to_json(const Instance& inst) {
  return std::visit([](const auto& v) { return to_json(v); }, inst);
}

/// Reads any instance. CSV text (first non-space character not '{') is a
/// column instance; JSON is told apart by its "sets", "blocks" or "rows" key.
inline Instance instance_from_text(const std::string& text,
                                   const std::string& source = "input") {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ParseError(source + ": empty input", 0, 0);
  if (text[first] != '{') return column_instance_from_csv(text, source);
  const Json j = parse_json(text, source);
  if (j.contains("sets")) return set_system_from_json(j);
  if (j.contains("blocks")) return block_family_from_json(j);
  if (j.contains("rows")) return column_instance_from_json(j);
  throw InputError(source + ": not a set system, block family or column instance");
}

// ---- traces ----------------------------------------------------------------

inline Json to_json(const IterationRecord& r) {
  using io_detail::real;
  return Json{{"t", r.t},
              {"potential", real(r.potential)},
              {"log_potential", real(r.log_potential)},
              {"step_scale", real(r.step_scale)},
              {"step_size", real(r.step_size)},
              {"active", r.active},
              {"subspace_dim", r.subspace_dim},
              {"quadratic_ratio", real(r.quadratic_ratio)},
              {"linear_residual", real(r.linear_residual)}};
}

inline IterationRecord record_from_json(const Json& j) {
  using namespace io_detail;
  const std::string w = "trace record";
  IterationRecord r;
  r.t = static_cast<std::size_t>(as_index(field(j, "t", w), w + " t"));
  r.potential = as_real(field(j, "potential", w), w + " potential");
  r.log_potential = as_real(field(j, "log_potential", w), w + " log_potential");
  r.step_scale = as_real(field(j, "step_scale", w), w + " step_scale");
  r.step_size = as_real(field(j, "step_size", w), w + " step_size");
  r.active = static_cast<std::size_t>(as_index(field(j, "active", w), w + " active"));
  r.subspace_dim = static_cast<long>(as_index(field(j, "subspace_dim", w), w + " subspace_dim"));
  r.quadratic_ratio = as_real(field(j, "quadratic_ratio", w), w + " quadratic_ratio");
  r.linear_residual = as_real(field(j, "linear_residual", w), w + " linear_residual");
  return r;
}

inline Json to_json(const WalkTrace& t) {
  Json recs = Json::array();
  for (const auto& r : t.records) recs.push_back(to_json(r));
  return Json{{"exhaustive", t.exhaustive}, {"records", recs}};
}

inline WalkTrace walk_trace_from_json(const Json& j) {
  using namespace io_detail;
  WalkTrace t;
  const Json& ex = field(j, "exhaustive", "walk trace");
  if (!ex.is_boolean()) schema_error("walk trace: exhaustive must be a boolean");
  t.exhaustive = ex.get<bool>();
  const Json& recs = field(j, "records", "walk trace");
  if (!recs.is_array()) schema_error("walk trace: records must be an array");
  for (const Json& r : recs) t.records.push_back(record_from_json(r));
  return t;
}

inline Json trace_json(const SetColoringResult& res) {
  Json phases = Json::array();
  for (const auto& p : res.phases) {
    phases.push_back(Json{{"active", io_detail::indices_json(p.active)},
                          {"lambda", io_detail::real(p.lambda)},
                          {"delta", io_detail::real(p.delta)},
                          {"constraints", p.constraints},
                          {"x_start", io_detail::vector_json(p.x_start)},
                          {"x_end", io_detail::vector_json(p.x_end)},
                          {"walk", to_json(p.walk)}});
  }
  return Json{{"algo", "spencer"}, {"phases", phases}};
}

inline std::vector<PhaseTrace> set_phases_from_json(const Json& j) {
  using namespace io_detail;
  std::vector<PhaseTrace> out;
  const Json& phases = field(j, "phases", "trace");
  if (!phases.is_array()) schema_error("trace: phases must be an array");
  for (const Json& p : phases) {
    PhaseTrace t;
    t.active = indices_from(field(p, "active", "phase"), "phase active");
    t.lambda = as_real(field(p, "lambda", "phase"), "phase lambda");
    t.delta = as_real(field(p, "delta", "phase"), "phase delta");
    t.constraints = as_index(field(p, "constraints", "phase"), "phase constraints");
    t.x_start = vector_from(field(p, "x_start", "phase"), "phase x_start");
    t.x_end = vector_from(field(p, "x_end", "phase"), "phase x_end");
    t.walk = walk_trace_from_json(field(p, "walk", "phase"));
    out.push_back(std::move(t));
  }
  return out;
}

inline Json trace_json(const MatrixFullResult& res) {
  Json phases = Json::array();
  for (const auto& p : res.phases) {
    phases.push_back(Json{{"active", io_detail::indices_json(p.active)},
                          {"epsilon", io_detail::real(p.epsilon)},
                          {"delta", io_detail::real(p.delta)},
                          {"x_start", io_detail::vector_json(p.x_start)},
                          {"x_end", io_detail::vector_json(p.x_end)},
                          {"walk", to_json(p.walk)}});
  }
  return Json{{"algo", "matrix"}, {"phases", phases}};
}

inline std::vector<MatrixPhaseTrace> matrix_phases_from_json(const Json& j) {
  using namespace io_detail;
  std::vector<MatrixPhaseTrace> out;
  const Json& phases = field(j, "phases", "trace");
  if (!phases.is_array()) schema_error("trace: phases must be an array");
  for (const Json& p : phases) {
    MatrixPhaseTrace t;
    t.active = indices_from(field(p, "active", "phase"), "phase active");
    t.epsilon = as_real(field(p, "epsilon", "phase"), "phase epsilon");
    t.delta = as_real(field(p, "delta", "phase"), "phase delta");
    t.x_start = vector_from(field(p, "x_start", "phase"), "phase x_start");
    t.x_end = vector_from(field(p, "x_end", "phase"), "phase x_end");
    t.walk = walk_trace_from_json(field(p, "walk", "phase"));
    out.push_back(std::move(t));
  }
  return out;
}

inline Json to_json(const BdgParams& p) {
  return Json{{"alpha", p.alpha}, {"beta", p.beta}, {"delta", p.delta},
              {"delta_max", p.delta_max}, {"C", p.C}};
}

inline BdgParams bdg_params_from_json(const Json& j) {
  using namespace io_detail;
  BdgParams p;
  p.alpha = as_real(field(j, "alpha", "params"), "params alpha");
  p.beta = as_real(field(j, "beta", "params"), "params beta");
  p.delta = as_real(field(j, "delta", "params"), "params delta");
  p.delta_max = as_real(field(j, "delta_max", "params"), "params delta_max");
  p.C = as_real(field(j, "C", "params"), "params C");
  return p;
}

/// Everything of a column-balancing run except the coloring itself.
inline Json trace_json(const ColumnResult& res) {
  Json events = Json::array();
  for (const auto& e : res.heavy_events) {
    events.push_back(Json{{"row", e.row + 1}, {"t", e.t}, {"support", e.support}});
  }
  return Json{{"algo", "bdg"},
              {"params", to_json(res.params)},
              {"x_walk", io_detail::vector_json(res.x_walk)},
              {"initial_log_potential", io_detail::real(res.initial_log_potential)},
              {"light_rows", res.light_rows},
              {"heavy_rows", res.heavy_rows},
              {"max_frozen_heavy_product", io_detail::real(res.max_frozen_heavy_product)},
              {"heavy_events", events},
              {"walk", to_json(res.trace)}};
}

/// Reads a column trace back; `chi` is left empty.
inline ColumnResult column_trace_from_json(const Json& j) {
  using namespace io_detail;
  ColumnResult r;
  r.params = bdg_params_from_json(field(j, "params", "trace"));
  r.x_walk = vector_from(field(j, "x_walk", "trace"), "trace x_walk");
  r.initial_log_potential =
      as_real(field(j, "initial_log_potential", "trace"), "trace initial_log_potential");
  r.light_rows = as_index(field(j, "light_rows", "trace"), "trace light_rows");
  r.heavy_rows = as_index(field(j, "heavy_rows", "trace"), "trace heavy_rows");
  r.max_frozen_heavy_product = as_real(field(j, "max_frozen_heavy_product", "trace"),
                                       "trace max_frozen_heavy_product");
  const Json& events = field(j, "heavy_events", "trace");
  if (!events.is_array()) schema_error("trace: heavy_events must be an array");
  for (const Json& e : events) {
    HeavyEvent h;
    h.row = as_index(field(e, "row", "heavy event"), "heavy event row") - 1;
    h.t = static_cast<std::size_t>(as_index(field(e, "t", "heavy event"), "heavy event t"));
    h.support = as_index(field(e, "support", "heavy event"), "heavy event support");
    r.heavy_events.push_back(h);
  }
  r.trace = walk_trace_from_json(field(j, "walk", "trace"));
  return r;
}

}  // namespace discmwu::io
