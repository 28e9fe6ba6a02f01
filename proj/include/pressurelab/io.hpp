#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pressurelab/common.hpp"
#include "pressurelab/continuation.hpp"
#include "pressurelab/maps.hpp"
#include "pressurelab/metric.hpp"
#include "pressurelab/poly.hpp"
#include "pressurelab/symbolic.hpp"
#include "pressurelab/thermo.hpp"

namespace pressurelab {

// ---------------------------------------------------------------------------
// JSON / CSV plumbing shared by the command-line driver and the tests: spec
// parsing (subshifts, potentials, maps, paths) and deterministic writers.
// Reports are JSON with insertion-ordered keys; tables are CSV.  Both are
// UTF-8 with LF line endings and print every floating-point number with 17
// significant digits, so identical inputs produce byte-identical files.

using Json = nlohmann::ordered_json;

inline Json parse_json(const std::string& text, const std::string& what = "input") {
  Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  require(!j.is_discarded(), ErrorKind::bad_input, what + ": malformed JSON");
  return j;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::bad_input, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Json read_json_file(const std::string& path) {
  return parse_json(read_text_file(path), path);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::bad_input, "cannot write file: " + path);
  out << text;
  out.flush();
  require(out.good(), ErrorKind::bad_input, "write failed: " + path);
}

namespace detail {

inline const Json& json_field(const Json& j, const char* key, const std::string& what) {
  require(j.is_object(), ErrorKind::bad_input, what + ": expected a JSON object");
  auto it = j.find(key);
  require(it != j.end(), ErrorKind::bad_input,
          what + ": missing field \"" + key + "\"");
  return *it;
}

inline double json_number(const Json& j, const std::string& what) {
  require(j.is_number(), ErrorKind::bad_input, what + ": expected a number");
  return j.get<double>();
}

inline int json_int(const Json& j, const std::string& what) {
  require(j.is_number_integer(), ErrorKind::bad_input, what + ": expected an integer");
  return j.get<int>();
}

/// A complex value is [re, im]; a bare number or [re] means a real value.
inline cplx json_complex(const Json& j, const std::string& what) {
  if (j.is_number()) return cplx(j.get<double>(), 0.0);
  require(j.is_array() && (j.size() == 1 || j.size() == 2), ErrorKind::bad_input,
          what + ": expected [re, im] or a real number");
  double re = json_number(j[0], what);
  double im = j.size() == 2 ? json_number(j[1], what) : 0.0;
  return cplx(re, im);
}

inline std::vector<cplx> json_complex_list(const Json& j, const std::string& what) {
  require(j.is_array(), ErrorKind::bad_input, what + ": expected an array");
  std::vector<cplx> out;
  out.reserve(j.size());
  for (const Json& e : j) out.push_back(json_complex(e, what));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subshift and potential specs.

inline SubshiftSpec subshift_from_json(const Json& j) {
  SubshiftSpec spec;
  spec.n = detail::json_int(detail::json_field(j, "n", "subshift"), "subshift n");
  const Json& a = detail::json_field(j, "A", "subshift");
  require(a.is_array(), ErrorKind::bad_input, "subshift A: expected an array of rows");
  for (const Json& row : a) {
    require(row.is_array(), ErrorKind::bad_input, "subshift A: expected rows of 0/1");
    std::vector<int> r;
    r.reserve(row.size());
    for (const Json& e : row) r.push_back(detail::json_int(e, "subshift A entry"));
    spec.A.push_back(std::move(r));
  }
  validate_subshift(spec);
  return spec;
}

inline Json subshift_to_json(const SubshiftSpec& spec) {
  Json j;
  j["n"] = spec.n;
  j["A"] = spec.A;
  return j;
}

/// Potential spec, a tagged union:
///   {"type":"constant","value":c}
///   {"type":"cylinder","depth":k,"values":[...]}   (flat, cylinder-enumeration order)
///   {"type":"coboundary","h":<potential>}          (h after one shift minus h)
///   {"type":"linear","terms":[{"weight":w,"potential":<potential>},...]}
inline SftPotential potential_from_json(const Json& j, const SubshiftSpec& spec) {
  const Json& tag = detail::json_field(j, "type", "potential");
  require(tag.is_string(), ErrorKind::bad_input, "potential type: expected a string");
  std::string type = tag.get<std::string>();
  if (type == "constant") {
    double c = detail::json_number(detail::json_field(j, "value", "constant potential"),
                                   "constant potential value");
    return constant_potential(spec, c);
  }
  if (type == "cylinder") {
    int depth = detail::json_int(detail::json_field(j, "depth", "cylinder potential"),
                                 "cylinder potential depth");
    const Json& vals = detail::json_field(j, "values", "cylinder potential");
    require(vals.is_array(), ErrorKind::bad_input, "cylinder potential values: expected an array");
    std::vector<double> values;
    values.reserve(vals.size());
    for (const Json& e : vals)
      values.push_back(detail::json_number(e, "cylinder potential value"));
    return make_cylinder_table(spec, depth, values);
  }
  if (type == "coboundary") {
    SftPotential h = potential_from_json(detail::json_field(j, "h", "coboundary potential"), spec);
    return coboundary_potential(h);
  }
  if (type == "linear") {
    const Json& terms = detail::json_field(j, "terms", "linear potential");
    require(terms.is_array() && !terms.empty(), ErrorKind::bad_input,
            "linear potential terms: expected a non-empty array");
    std::vector<std::pair<double, SftPotential>> parts;
    parts.reserve(terms.size());
    for (const Json& t : terms) {
      double w = detail::json_number(detail::json_field(t, "weight", "linear potential term"),
                                     "linear potential weight");
      parts.emplace_back(
          w, potential_from_json(detail::json_field(t, "potential", "linear potential term"), spec));
    }
    return linear_combine(parts);
  }
  fail(ErrorKind::bad_input, "potential type: unknown tag \"" + type + "\"");
}

/// Canonical (cylinder-table) serialization of any potential.
inline Json potential_to_json(const SftPotential& pot) {
  Json j;
  j["type"] = "cylinder";
  j["depth"] = pot.depth;
  j["values"] = cylinder_values(pot);
  return j;
}

// ---------------------------------------------------------------------------
// Map and path specs.

struct MapSpec {
  enum class Kind { poly, blaschke, qb };
  Kind kind = Kind::poly;
  Poly coeffs;    // poly
  QBPoint point;  // blaschke / qb
};

namespace detail {

inline QBPoint qb_point_from_json(const Json& j, const std::string& what) {
  QBPoint pt;
  pt.a = json_complex_list(json_field(j, "a", what), what + " a");
  pt.b = json_complex_list(json_field(j, "b", what), what + " b");
  auto it = j.find("validated");
  if (it != j.end()) {
    require(it->is_boolean(), ErrorKind::bad_input, what + " validated: expected a boolean");
    pt.validated = it->get<bool>();
  }
  validate_qb_shape(pt);
  return pt;
}

inline QBPoint blaschke_point_from_json(const Json& j, const std::string& what) {
  QBPoint pt;
  pt.a = json_complex_list(json_field(j, "a", what), what + " a");
  pt.b.reserve(pt.a.size());
  for (cplx v : pt.a) {
    require(std::abs(v) < 1.0, ErrorKind::bad_input, what + ": zeros must lie in the open disk");
    pt.b.push_back(std::conj(v));
  }
  pt.validated = true;
  validate_qb_shape(pt);
  return pt;
}

}  // namespace detail

/// Map spec, a tagged union (complex entries as [re, im]):
///   {"type":"poly","coeffs":[[re,im],...]}    coefficients in ascending order
///   {"type":"blaschke","a":[[re,im],...]}     marked form with b = conj(a)
///   {"type":"qb","a":[...],"b":[...]}         optional "validated": true
inline MapSpec map_from_json(const Json& j) {
  const Json& tag = detail::json_field(j, "type", "map");
  require(tag.is_string(), ErrorKind::bad_input, "map type: expected a string");
  std::string type = tag.get<std::string>();
  MapSpec spec;
  if (type == "poly") {
    spec.kind = MapSpec::Kind::poly;
    spec.coeffs = detail::json_complex_list(detail::json_field(j, "coeffs", "poly map"),
                                            "poly map coeffs");
    require(poly_degree(poly_trim(spec.coeffs)) >= 2, ErrorKind::bad_input,
            "poly map: need degree >= 2");
    return spec;
  }
  if (type == "blaschke") {
    spec.kind = MapSpec::Kind::blaschke;
    spec.point = detail::blaschke_point_from_json(j, "blaschke map");
    return spec;
  }
  if (type == "qb") {
    spec.kind = MapSpec::Kind::qb;
    spec.point = detail::qb_point_from_json(j, "qb map");
    return spec;
  }
  fail(ErrorKind::bad_input, "map type: unknown tag \"" + type + "\"");
}

inline RationalMap resolve_map(const MapSpec& spec) {
  if (spec.kind == MapSpec::Kind::poly) return poly_map(spec.coeffs);
  return qb(spec.point);
}

inline Json complex_to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

inline Json complex_list_to_json(const std::vector<cplx>& v) {
  Json j = Json::array();
  for (cplx z : v) j.push_back(complex_to_json(z));
  return j;
}

inline Json qb_point_to_json(const QBPoint& pt) {
  Json j;
  j["type"] = "qb";
  j["a"] = complex_list_to_json(pt.a);
  j["b"] = complex_list_to_json(pt.b);
  j["validated"] = pt.validated;
  return j;
}

inline Json map_to_json(const MapSpec& spec) {
  Json j;
  switch (spec.kind) {
    case MapSpec::Kind::poly:
      j["type"] = "poly";
      j["coeffs"] = complex_list_to_json(spec.coeffs);
      break;
    case MapSpec::Kind::blaschke:
      j["type"] = "blaschke";
      j["a"] = complex_list_to_json(spec.point.a);
      break;
    case MapSpec::Kind::qb:
      j = qb_point_to_json(spec.point);
      break;
  }
  return j;
}

struct PathSpec {
  enum class Kind { segment, tangent };
  Kind kind = Kind::segment;
  QBPoint from, to;   // segment
  QBPoint at;         // tangent
  TangentVector dir;  // tangent: t -> (a + t*da, b + t*db)
};

inline TangentVector tangent_from_json(const Json& j, const std::string& what = "direction") {
  TangentVector v;
  v.da = detail::json_complex_list(detail::json_field(j, "da", what), what + " da");
  v.db = detail::json_complex_list(detail::json_field(j, "db", what), what + " db");
  require(!v.da.empty() && v.da.size() == v.db.size(), ErrorKind::bad_input,
          what + ": da and db must both have length degree-1 >= 1");
  return v;
}

inline Json tangent_to_json(const TangentVector& v) {
  Json j;
  j["da"] = complex_list_to_json(v.da);
  j["db"] = complex_list_to_json(v.db);
  return j;
}

namespace detail {

/// Path endpoints accept a tagged qb/blaschke map spec or a bare {"a","b"}.
inline QBPoint path_endpoint_from_json(const Json& j, const std::string& what) {
  auto it = j.is_object() ? j.find("type") : j.end();
  if (it != j.end() && it->is_string() && it->get<std::string>() == "blaschke")
    return blaschke_point_from_json(j, what);
  return qb_point_from_json(j, what);
}

}  // namespace detail

/// Path spec, a tagged union:
///   {"type":"segment","from":<qb>,"to":<qb>}
///   {"type":"tangent","at":<qb>,"dir":{"da":[...],"db":[...]}}
inline PathSpec path_from_json(const Json& j) {
  const Json& tag = detail::json_field(j, "type", "path");
  require(tag.is_string(), ErrorKind::bad_input, "path type: expected a string");
  std::string type = tag.get<std::string>();
  PathSpec spec;
  if (type == "segment") {
    spec.kind = PathSpec::Kind::segment;
    spec.from = detail::path_endpoint_from_json(detail::json_field(j, "from", "path"), "path from");
    spec.to = detail::path_endpoint_from_json(detail::json_field(j, "to", "path"), "path to");
    require(spec.from.a.size() == spec.to.a.size(), ErrorKind::bad_input,
            "path: endpoints must have the same degree");
    return spec;
  }
  if (type == "tangent") {
    spec.kind = PathSpec::Kind::tangent;
    spec.at = detail::path_endpoint_from_json(detail::json_field(j, "at", "path"), "path at");
    spec.dir = tangent_from_json(detail::json_field(j, "dir", "path"), "path dir");
    require(spec.dir.da.size() == spec.at.a.size(), ErrorKind::bad_input,
            "path: direction length must match the base point degree");
    return spec;
  }
  fail(ErrorKind::bad_input, "path type: unknown tag \"" + type + "\"");
}

inline MapPath resolve_path(const PathSpec& spec, double t_max = 1.0) {
  if (spec.kind == PathSpec::Kind::segment) return qb_segment(spec.from, spec.to);
  return qb_tangent(spec.at, spec.dir, t_max);
}

inline Json path_to_json(const PathSpec& spec) {
  Json j;
  if (spec.kind == PathSpec::Kind::segment) {
    j["type"] = "segment";
    j["from"] = qb_point_to_json(spec.from);
    j["to"] = qb_point_to_json(spec.to);
  } else {
    j["type"] = "tangent";
    j["at"] = qb_point_to_json(spec.at);
    j["dir"] = tangent_to_json(spec.dir);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Deterministic writers.

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

namespace detail {

inline bool json_all_primitive(const Json& j) {
  for (const Json& e : j)
    if (e.is_object() || e.is_array()) return false;
  return true;
}

inline void dump_json_value(const Json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * depth), ' ');
  const std::string pad_in(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (const auto& kv : j.items()) {
      if (!first) out += ",\n";
      first = false;
      out += pad_in;
      out += Json(kv.key()).dump();
      out += ": ";
      dump_json_value(kv.value(), out, depth + 1);
    }
    out += "\n" + pad + "}";
    return;
  }
  if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    if (json_all_primitive(j)) {
      out += "[";
      bool first = true;
      for (const Json& e : j) {
        if (!first) out += ", ";
        first = false;
        dump_json_value(e, out, depth + 1);
      }
      out += "]";
      return;
    }
    out += "[\n";
    bool first = true;
    for (const Json& e : j) {
      if (!first) out += ",\n";
      first = false;
      out += pad_in;
      dump_json_value(e, out, depth + 1);
    }
    out += "\n" + pad + "]";
    return;
  }
  if (j.is_number_float()) {
    double x = j.get<double>();
    out += std::isfinite(x) ? format_number(x) : "null";
    return;
  }
  out += j.dump();  // strings (escaped), integers, booleans, null
}

}  // namespace detail

inline std::string dump_json(const Json& j) {
  std::string out;
  detail::dump_json_value(j, out, 0);
  out += "\n";
  return out;
}

// ---------------------------------------------------------------------------
// CSV tables.

inline std::string cycles_csv(const std::vector<Cycle>& cycles) {
  std::string out = "period,re_z0,im_z0,re_lambda,im_lambda,repelling\n";
  for (const Cycle& c : cycles) {
    cplx z0 = c.points.empty() ? cplx(0.0) : c.points.front();
    out += std::to_string(c.period) + "," + format_number(z0.real()) + "," +
           format_number(z0.imag()) + "," + format_number(c.multiplier.real()) + "," +
           format_number(c.multiplier.imag()) + "," + (c.repelling ? "1" : "0") + "\n";
  }
  return out;
}

/// Per-cycle derivative table: D_C is the entry Re d/dt[delta(f_t) log|lambda_C|].
/// Untracked cycles are omitted (their entries are meaningless).
inline std::string scan_csv(const std::vector<CycleDerivative>& table) {
  std::string out = "period,re_lambda,im_lambda,D_C\n";
  for (const CycleDerivative& row : table) {
    if (!row.tracked) continue;
    out += std::to_string(row.period) + "," + format_number(row.multiplier.real()) + "," +
           format_number(row.multiplier.imag()) + "," + format_number(row.entry) + "\n";
  }
  return out;
}

inline Json cycles_to_json(const std::vector<Cycle>& cycles) {
  Json arr = Json::array();
  for (const Cycle& c : cycles) {
    Json row;
    row["period"] = c.period;
    row["z0"] = complex_to_json(c.points.empty() ? cplx(0.0) : c.points.front());
    row["multiplier"] = complex_to_json(c.multiplier);
    row["repelling"] = c.repelling;
    arr.push_back(std::move(row));
  }
  return arr;
}

// ---------------------------------------------------------------------------
// Spec-level dispatch.

inline std::vector<Cycle> spec_cycles(const MapSpec& spec, int max_period, int workers = 1) {
  if (spec.kind == MapSpec::Kind::poly)
    return poly_cycle_inventory(spec.coeffs, max_period, workers);
  return qb_cycle_inventory(spec.point, max_period, workers);
}

inline DimensionResult spec_dimension(const MapSpec& spec, int max_period, int workers = 1) {
  if (spec.kind == MapSpec::Kind::poly)
    return hausdorff_dimension(spec.coeffs, max_period, workers);
  return hausdorff_dimension(spec.point, max_period, workers);
}

inline const QBPoint& spec_qb_point(const MapSpec& spec) {
  require(spec.kind != MapSpec::Kind::poly, ErrorKind::bad_input,
          "this command needs a qb or blaschke map spec");
  return spec.point;
}

inline Json derivative_table_to_json(const std::vector<CycleDerivative>& table) {
  Json arr = Json::array();
  for (const CycleDerivative& row : table) {
    Json r;
    r["period"] = row.period;
    r["multiplier"] = complex_to_json(row.multiplier);
    r["D_C"] = row.entry;
    r["tracked"] = row.tracked;
    arr.push_back(std::move(r));
  }
  return arr;
}

}  // namespace pressurelab
