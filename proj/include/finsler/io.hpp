#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "builtins.hpp"
#include "errors.hpp"
#include "lie_core.hpp"

namespace finsler::io {

using Json = nlohmann::ordered_json;

// Shortest exact text for a double: 17 significant digits, "-0" folded to
// "0", non-finite values as null.
inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void write(std::string& out, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(k).dump() + ": ";
        write(out, v, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          write(out, j[i], indent + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        write(out, j[i], indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_number(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace detail

// Serializes with stable key order and 17-significant-digit numbers.
inline std::string to_text(const Json& j) {
  std::string out;
  detail::write(out, j, 0);
  out += "\n";
  return out;
}

inline Json vector_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// Raw contents of an algebra file before structural validation. Indices in
// `brackets` are converted to 0-based.
struct AlgebraDocument {
  std::string name;
  int dim = 0;
  int h_dim = 0;
  std::vector<std::string> basis;
  std::vector<StructureConstant> brackets;
  std::vector<double> gram;
  std::optional<std::vector<double>> x;
};

namespace detail {

template <class T>
T field(const Json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw InputError("missing field '" + path + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError("field '" + path + key + "' has the wrong type");
  }
}

inline int index_field(const Json& rec, const std::string& path, const char* key, int dim) {
  const Json& v = rec.contains(key) ? rec.at(key) : Json();
  if (!v.is_number_integer())
    throw InputError("field '" + path + key + "' must be an integer");
  const int i = v.get<int>();
  if (i < 1 || i > dim)
    throw InputError("field '" + path + key + "' = " + std::to_string(i) +
                     " out of range 1.." + std::to_string(dim));
  return i - 1;
}

}  // namespace detail

// Parses an algebra document. Structural errors (bad JSON, wrong types,
// index ranges, duplicates, i >= j, sizes) raise InputError with the field
// path; mathematical validity is checked separately by diagnose().
inline AlgebraDocument parse_document(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("parse error: ") + e.what());
  }
  if (!j.is_object()) throw InputError("algebra file must be a JSON object");
  AlgebraDocument d;
  d.name = detail::field<std::string>(j, "", "name");
  d.dim = detail::field<int>(j, "", "dim");
  d.h_dim = detail::field<int>(j, "", "h_dim");
  if (d.dim < 1) throw InputError("field 'dim' must be >= 1");
  if (d.h_dim < 0 || d.h_dim >= d.dim)
    throw InputError("field 'h_dim' must satisfy 0 <= h_dim < dim");
  d.basis = detail::field<std::vector<std::string>>(j, "", "basis");
  if (static_cast<int>(d.basis.size()) != d.dim)
    throw InputError("field 'basis' must list " + std::to_string(d.dim) + " labels");

  if (!j.contains("brackets") || !j.at("brackets").is_array())
    throw InputError("field 'brackets' must be an array");
  std::set<std::tuple<int, int, int>> seen;
  const auto& br = j.at("brackets");
  for (std::size_t n = 0; n < br.size(); ++n) {
    const std::string path = "brackets[" + std::to_string(n) + "].";
    const auto& rec = br[n];
    if (!rec.is_object()) throw InputError("field 'brackets[" + std::to_string(n) + "]' must be an object");
    StructureConstant c;
    c.i = detail::index_field(rec, path, "i", d.dim);
    c.j = detail::index_field(rec, path, "j", d.dim);
    c.k = detail::index_field(rec, path, "k", d.dim);
    if (!rec.contains("c") || !rec.at("c").is_number())
      throw InputError("field '" + path + "c' must be a number");
    c.c = rec.at("c").get<double>();
    if (c.i >= c.j)
      throw InputError("field '" + path + "i' must be less than '" + path + "j'");
    if (!seen.insert({c.i, c.j, c.k}).second)
      throw InputError("duplicate structure constant (" + std::to_string(c.i + 1) + "," +
                       std::to_string(c.j + 1) + "," + std::to_string(c.k + 1) + ")");
    d.brackets.push_back(c);
  }

  d.gram = detail::field<std::vector<double>>(j, "", "gram");
  const auto q = static_cast<std::size_t>(d.dim - d.h_dim);
  if (d.gram.size() != q * q)
    throw InputError("field 'gram' must hold " + std::to_string(q * q) +
                     " entries (row-major (dim-h_dim)^2)");
  if (j.contains("x") && !j.at("x").is_null()) {
    d.x = detail::field<std::vector<double>>(j, "", "x");
    if (d.x->size() != q)
      throw InputError("field 'x' must hold " + std::to_string(q) + " m-coordinates");
  }
  return d;
}

inline LieAlgebra to_algebra(const AlgebraDocument& d) {
  return LieAlgebra::from_brackets(d.name, d.basis, d.brackets);
}

inline Mat to_gram(const AlgebraDocument& d) {
  const int q = d.dim - d.h_dim;
  Mat g(q, q);
  for (int r = 0; r < q; ++r)
    for (int c = 0; c < q; ++c) g(r, c) = d.gram[static_cast<std::size_t>(r) * q + c];
  return g;
}

// Mathematical diagnostics: algebra identities, decomposition, gram, drift.
inline std::vector<std::string> diagnose(const AlgebraDocument& d) {
  const auto algebra = to_algebra(d);
  auto out = space_diagnostics(algebra, d.h_dim, to_gram(d));
  if (out.empty() && d.x) {
    const auto rs = ReductiveSpace::create(algebra, d.h_dim, to_gram(d));
    const DriftVector x{Eigen::Map<const Vec>(d.x->data(), static_cast<Eigen::Index>(d.x->size()))};
    const auto adm = check_drift_admissible(rs, x);
    if (!adm.norm_below_one)
      out.push_back("drift vector violates g(X,X) < 1 (g(X,X) = " + format_number(adm.norm_sq) + ")");
    if (!adm.h_invariant)
      out.push_back("drift vector is not ad(h)-invariant (residual " +
                    format_number(adm.h_residual) + ")");
  }
  return out;
}

inline Builtin to_builtin(const AlgebraDocument& d) {
  auto rs = ReductiveSpace::create(to_algebra(d), d.h_dim, to_gram(d));
  DriftVector x = DriftVector::zero(rs.m_dim());
  if (d.x) x.coords = Eigen::Map<const Vec>(d.x->data(), static_cast<Eigen::Index>(d.x->size()));
  return {std::move(rs), std::move(x)};
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json document_json(const ReductiveSpace& rs, const DriftVector& x) {
  const auto& a = rs.algebra();
  Json j;
  j["name"] = a.name();
  j["dim"] = a.dim();
  j["h_dim"] = rs.h_dim();
  j["basis"] = a.labels();
  Json br = Json::array();
  for (const auto& c : a.upper_entries()) {
    Json rec;
    rec["i"] = c.i + 1;
    rec["j"] = c.j + 1;
    rec["k"] = c.k + 1;
    rec["c"] = c.c;
    br.push_back(rec);
  }
  j["brackets"] = br;
  Json gram = Json::array();
  for (int r = 0; r < rs.m_dim(); ++r)
    for (int c = 0; c < rs.m_dim(); ++c) gram.push_back(rs.gram()(r, c));
  j["gram"] = gram;
  j["x"] = vector_json(x.coords);
  return j;
}

inline std::string export_document(const ReductiveSpace& rs, const DriftVector& x) {
  return to_text(document_json(rs, x));
}

}  // namespace finsler::io
