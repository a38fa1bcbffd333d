#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mmsim/densemat.hpp"
#include "mmsim/qcore/condprob.hpp"
#include "mmsim/qcore/objects.hpp"
#include "mmsim/supermap/realization.hpp"
#include "mmsim/supermap/superchannel.hpp"
#include "mmsim/tolerance.hpp"

// JSON artifact files. Layout (docs/schema.md has the full description):
//   {"format": "mmsim-artifact", "version": 1, "kind": ..., "dims": {...},
//    "data": {...}, "provenance": "..." (superchannel only, optional)}
// Matrices are row-major arrays of rows, each entry a [re, im] pair. Shapes
// are checked against "dims", never inferred from the arrays.
namespace mmsim::io {

using Json = nlohmann::json;

// Malformed file: bad JSON, missing keys, wrong shapes. Kept apart from
// mmsim::Error, which signals a well-formed object that violates an invariant.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kFormatTag = "mmsim-artifact";
inline constexpr int kFormatVersion = 1;

using ArtifactValue = std::variant<Multimeter, POVM, Instrument, Superchannel, GeneralRealization, ClassicalRealization>;

struct Artifact {
  ArtifactValue value;
  std::optional<std::string> provenance;  // superchannels only
};

inline std::string kind_of(const ArtifactValue& v) {
  static const char* names[] = {"multimeter", "povm", "instrument", "superchannel", "general_realization",
                                "classical_realization"};
  return names[v.index()];
}

// ---- encoding ---------------------------------------------------------------

inline Json encode(const CMat& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json encode(const SlotDims& s) { return Json{{"g", s.g}, {"k", s.k}, {"d", s.d}}; }

inline Json encode_effects(const std::vector<CMat>& effects) {
  Json out = Json::array();
  for (const auto& e : effects) out.push_back(encode(e));
  return out;
}

inline Json encode(const Tolerances& tol) {
  return Json{{"eq", tol.eq},     {"herm", tol.herm},       {"psd", tol.psd},
              {"rank", tol.rank}, {"rn", tol.rn},           {"lp", tol.lp},
              {"compat", tol.compat}, {"compat_max_iter", tol.compat_max_iter}, {"cap", tol.cap}};
}

inline Json encode(const CondProb& p) {
  return Json{{"outcomes", p.outcomes()}, {"given", p.given()}, {"values", p.values()}};
}

namespace detail {

inline Json envelope(const std::string& kind, Json dims, Json data) {
  return Json{{"format", kFormatTag}, {"version", kFormatVersion}, {"kind", kind}, {"dims", std::move(dims)},
              {"data", std::move(data)}};
}

struct Encoder {
  Json operator()(const POVM& p) const {
    return envelope("povm", {{"k", p.k()}, {"d", p.d()}}, {{"effects", encode_effects(p.effects())}});
  }
  Json operator()(const Multimeter& m) const {
    Json povms = Json::array();
    for (const auto& p : m.povms()) povms.push_back(encode_effects(p.effects()));
    return envelope("multimeter", encode(dims_of(m)), {{"povms", std::move(povms)}});
  }
  Json operator()(const Instrument& inst) const {
    Json branches = Json::array();
    for (const auto& b : inst.branches()) branches.push_back(encode(b.choi()));
    return envelope("instrument", {{"din", inst.din()}, {"dout", inst.dout()}, {"outcomes", inst.outcomes()}},
                    {{"branches", std::move(branches)}});
  }
  Json operator()(const Superchannel& psi) const {
    return envelope("superchannel", {{"in", encode(psi.in())}, {"out", encode(psi.out())}},
                    {{"choi", encode(psi.choi())}, {"certified", psi.certified()}});
  }
  Json operator()(const GeneralRealization& r) const {
    Json lambda = Json::array(), povms = Json::array();
    for (std::size_t y = 0; y < r.lambda.size(); ++y) {
      Json per_x = Json::array(), per_x_b = Json::array();
      for (std::size_t x = 0; x < r.lambda[y].size(); ++x) {
        per_x.push_back(encode(r.lambda[y][x].choi()));
        Json per_a = Json::array();
        for (const auto& p : r.b[y][x]) per_a.push_back(encode_effects(p.effects()));
        per_x_b.push_back(std::move(per_a));
      }
      lambda.push_back(std::move(per_x));
      povms.push_back(std::move(per_x_b));
    }
    return envelope("general_realization", {{"in", encode(r.in)}, {"out", encode(r.out)}, {"s", r.s}},
                    {{"lambda", std::move(lambda)}, {"b", std::move(povms)}});
  }
  Json operator()(const ClassicalRealization& r) const {
    Json lambda = Json::array();
    for (const auto& inst : r.lambda) {
      Json branches = Json::array();
      for (const auto& b : inst.branches()) branches.push_back(encode(b.choi()));
      lambda.push_back(std::move(branches));
    }
    return envelope("classical_realization", {{"in", encode(r.in)}, {"out", encode(r.out)}, {"s", r.s}},
                    {{"lambda", std::move(lambda)}, {"nu", r.nu.values()}});
  }
};

}  // namespace detail

inline Json to_json(const Artifact& a) {
  Json j = std::visit(detail::Encoder{}, a.value);
  if (a.provenance) {
    if (!std::holds_alternative<Superchannel>(a.value)) throw SchemaError("provenance is only recorded for superchannels");
    j["provenance"] = *a.provenance;
  }
  return j;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline std::string write_string(const Artifact& a) { return dump(to_json(a)); }

// ---- decoding ---------------------------------------------------------------

namespace detail {

inline const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(where + ": missing \"" + key + "\"");
  return *it;
}

inline std::size_t count(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw SchemaError(where + "." + key + ": expected a non-negative integer");
  const auto n = v.get<std::size_t>();
  if (n == 0) throw SchemaError(where + "." + key + ": must be positive");
  return n;
}

inline const Json& array_of(const Json& v, std::size_t len, const std::string& where) {
  if (!v.is_array()) throw SchemaError(where + ": expected an array");
  if (v.size() != len)
    throw SchemaError(where + ": expected " + std::to_string(len) + " entries, found " + std::to_string(v.size()));
  return v;
}

inline double number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw SchemaError(where + ": expected a number");
  return v.get<double>();
}

inline CMat decode_matrix(const Json& v, std::size_t rows, std::size_t cols, const std::string& where) {
  CMat m(rows, cols);
  array_of(v, rows, where);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_where = where + "[" + std::to_string(i) + "]";
    array_of(v[i], cols, row_where);
    for (std::size_t j = 0; j < cols; ++j) {
      const std::string entry_where = row_where + "[" + std::to_string(j) + "]";
      const Json& z = array_of(v[i][j], 2, entry_where);
      m(i, j) = Complex(number(z[0], entry_where), number(z[1], entry_where));
    }
  }
  return m;
}

inline std::vector<CMat> decode_effects(const Json& v, std::size_t k, std::size_t d, const std::string& where) {
  array_of(v, k, where);
  std::vector<CMat> out;
  for (std::size_t a = 0; a < k; ++a) out.push_back(decode_matrix(v[a], d, d, where + "[" + std::to_string(a) + "]"));
  return out;
}

inline SlotDims decode_slot(const Json& v, const std::string& where) {
  return {count(v, "g", where), count(v, "k", where), count(v, "d", where)};
}

inline POVM decode_povm(const Json& dims, const Json& data) {
  const std::size_t k = count(dims, "k", "dims"), d = count(dims, "d", "dims");
  return POVM(d, decode_effects(field(data, "effects", "data"), k, d, "data.effects"));
}

inline Multimeter decode_multimeter(const Json& dims, const Json& data) {
  const SlotDims s = decode_slot(dims, "dims");
  const Json& povms = array_of(field(data, "povms", "data"), s.g, "data.povms");
  std::vector<POVM> out;
  for (std::size_t x = 0; x < s.g; ++x)
    out.emplace_back(s.d, decode_effects(povms[x], s.k, s.d, "data.povms[" + std::to_string(x) + "]"));
  return Multimeter(std::move(out));
}

inline std::vector<CPMap> decode_branches(const Json& v, std::size_t count_, std::size_t din, std::size_t dout,
                                          const std::string& where) {
  array_of(v, count_, where);
  std::vector<CPMap> out;
  for (std::size_t i = 0; i < count_; ++i)
    out.emplace_back(din, dout, decode_matrix(v[i], din * dout, din * dout, where + "[" + std::to_string(i) + "]"));
  return out;
}

inline Instrument decode_instrument(const Json& dims, const Json& data) {
  const std::size_t din = count(dims, "din", "dims"), dout = count(dims, "dout", "dims");
  const std::size_t outcomes = count(dims, "outcomes", "dims");
  return Instrument(din, dout, decode_branches(field(data, "branches", "data"), outcomes, din, dout, "data.branches"));
}

inline Superchannel decode_superchannel(const Json& dims, const Json& data) {
  const SlotDims in = decode_slot(field(dims, "in", "dims"), "dims.in");
  const SlotDims out = decode_slot(field(dims, "out", "dims"), "dims.out");
  const std::size_t size = in.size() * out.size();
  CMat choi = decode_matrix(field(data, "choi", "data"), size, size, "data.choi");
  bool certified = false;
  if (const auto it = data.find("certified"); it != data.end()) {
    if (!it->is_boolean()) throw SchemaError("data.certified: expected a boolean");
    certified = it->get<bool>();
  }
  return Superchannel(in, out, CPMap(in.size(), out.size(), std::move(choi)), certified);
}

inline GeneralRealization decode_general(const Json& dims, const Json& data) {
  GeneralRealization r;
  r.in = decode_slot(field(dims, "in", "dims"), "dims.in");
  r.out = decode_slot(field(dims, "out", "dims"), "dims.out");
  r.s = count(dims, "s", "dims");
  const Json& lambda = array_of(field(data, "lambda", "data"), r.out.g, "data.lambda");
  const Json& povms = array_of(field(data, "b", "data"), r.out.g, "data.b");
  for (std::size_t y = 0; y < r.out.g; ++y) {
    const std::string ly = "data.lambda[" + std::to_string(y) + "]";
    r.lambda.push_back(decode_branches(lambda[y], r.in.g, r.out.d, r.in.d * r.s, ly));
    const std::string by = "data.b[" + std::to_string(y) + "]";
    array_of(povms[y], r.in.g, by);
    std::vector<std::vector<POVM>> per_x;
    for (std::size_t x = 0; x < r.in.g; ++x) {
      const std::string bx = by + "[" + std::to_string(x) + "]";
      array_of(povms[y][x], r.in.k, bx);
      std::vector<POVM> per_a;
      for (std::size_t a = 0; a < r.in.k; ++a)
        per_a.emplace_back(r.s, decode_effects(povms[y][x][a], r.out.k, r.s, bx + "[" + std::to_string(a) + "]"));
      per_x.push_back(std::move(per_a));
    }
    r.b.push_back(std::move(per_x));
  }
  return r;
}

inline ClassicalRealization decode_classical(const Json& dims, const Json& data) {
  ClassicalRealization r;
  r.in = decode_slot(field(dims, "in", "dims"), "dims.in");
  r.out = decode_slot(field(dims, "out", "dims"), "dims.out");
  r.s = count(dims, "s", "dims");
  const Json& lambda = array_of(field(data, "lambda", "data"), r.out.g, "data.lambda");
  for (std::size_t y = 0; y < r.out.g; ++y)
    r.lambda.emplace_back(r.out.d, r.in.d,
                          decode_branches(lambda[y], r.in.g * r.s, r.out.d, r.in.d, "data.lambda[" + std::to_string(y) + "]"));
  r.nu = CondProb(r.out.k, {r.in.k, r.in.g, r.out.g, r.s});
  const Json& nu = array_of(field(data, "nu", "data"), r.nu.values().size(), "data.nu");
  for (std::size_t i = 0; i < nu.size(); ++i) r.nu.values()[i] = number(nu[i], "data.nu[" + std::to_string(i) + "]");
  return r;
}

}  // namespace detail

// Structural decoding only; run validate_artifact for the physical invariants.
inline Artifact from_json(const Json& j) {
  using namespace detail;
  if (!j.is_object()) throw SchemaError("artifact must be a JSON object");
  const Json& format = field(j, "format", "artifact");
  if (!format.is_string() || format.get<std::string>() != kFormatTag) throw SchemaError("not an mmsim artifact");
  const Json& version = field(j, "version", "artifact");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion)
    throw SchemaError("unsupported artifact version");
  const Json& kind_field = field(j, "kind", "artifact");
  if (!kind_field.is_string()) throw SchemaError("artifact.kind: expected a string");
  const std::string kind = kind_field.get<std::string>();
  const Json& dims = field(j, "dims", "artifact");
  const Json& data = field(j, "data", "artifact");

  Artifact out;
  try {
    if (kind == "povm") out.value = decode_povm(dims, data);
    else if (kind == "multimeter") out.value = decode_multimeter(dims, data);
    else if (kind == "instrument") out.value = decode_instrument(dims, data);
    else if (kind == "superchannel") out.value = decode_superchannel(dims, data);
    else if (kind == "general_realization") out.value = decode_general(dims, data);
    else if (kind == "classical_realization") out.value = decode_classical(dims, data);
    else throw SchemaError("unknown artifact kind \"" + kind + "\"");
  } catch (const DimensionError& e) {
    throw SchemaError(std::string("inconsistent dims: ") + e.what());
  }
  if (const auto it = j.find("provenance"); it != j.end()) {
    if (kind != "superchannel") throw SchemaError("provenance is only recorded for superchannels");
    if (!it->is_string()) throw SchemaError("artifact.provenance: expected a string");
    out.provenance = it->get<std::string>();
  }
  return out;
}

inline Artifact read_string(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  return from_json(j);
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Artifact read_file(const std::string& path) { return read_string(read_text(path)); }

// Write to a sibling temporary and rename over the target.
inline void write_text(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SchemaError("cannot write " + path);
    out << text;
    if (!out.flush()) throw SchemaError("cannot write " + path);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw SchemaError("cannot write " + path + ": " + ec.message());
  }
}

inline void write_file(const std::string& path, const Artifact& a) { write_text(path, write_string(a)); }

// Runs the validator for the artifact's kind; throws the matching mmsim::Error.
inline void validate_artifact(const Artifact& a, const Tolerances& tol = {}) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Superchannel>) {
          // the stored flag is not trusted
          (void)certify(Superchannel(v.in(), v.out(), v.map()), tol);
        } else {
          validate(v, tol);
        }
      },
      a.value);
}

}  // namespace mmsim::io
