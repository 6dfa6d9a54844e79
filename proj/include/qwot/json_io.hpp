#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qwot/matrix.hpp"

namespace qwot {

/// 17 significant digits: enough for exact double round-trips.
inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

/// Shared matrix file format: {"dim": n, "re": [...], "im": [...]} with
/// row-major n^2 arrays.
inline std::string matrix_to_json_string(const ComplexMatrix& m) {
  std::ostringstream os;
  os << "{\"dim\": " << m.dim() << ", \"re\": [";
  const auto& a = m.data();
  for (size_t i = 0; i < a.size(); ++i) {
    if (i) os << ", ";
    os << format_real(a[i].real());
  }
  os << "], \"im\": [";
  for (size_t i = 0; i < a.size(); ++i) {
    if (i) os << ", ";
    os << format_real(a[i].imag());
  }
  os << "]}";
  return os.str();
}

inline ComplexMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("re") || !j.contains("im"))
    throw ParseError("matrix JSON must be an object with dim, re and im");
  if (!j["dim"].is_number_integer()) throw ParseError("dim must be an integer");
  const long long dim = j["dim"].get<long long>();
  if (dim < 1 || dim > 256) throw ParseError("dim out of range [1, 256]");
  const auto& re = j["re"];
  const auto& im = j["im"];
  const size_t want = static_cast<size_t>(dim) * static_cast<size_t>(dim);
  if (!re.is_array() || !im.is_array() || re.size() != want || im.size() != want)
    throw ParseError("re and im must be arrays of dim^2 numbers");
  std::vector<cplx> entries(want);
  for (size_t k = 0; k < want; ++k) {
    if (!re[k].is_number() || !im[k].is_number()) throw ParseError("matrix entries must be numbers");
    entries[k] = cplx(re[k].get<double>(), im[k].get<double>());
  }
  return ComplexMatrix(static_cast<int>(dim), std::move(entries));
}

inline nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

inline ComplexMatrix load_matrix(const std::string& path) {
  return matrix_from_json(parse_json_file(path));
}

/// Operator files hold either one matrix object or an array of them.
inline std::vector<ComplexMatrix> load_matrix_list(const std::string& path) {
  const nlohmann::json j = parse_json_file(path);
  std::vector<ComplexMatrix> out;
  if (j.is_array()) {
    if (j.empty()) throw ParseError("operator list in " + path + " is empty");
    for (const auto& item : j) out.push_back(matrix_from_json(item));
  } else {
    out.push_back(matrix_from_json(j));
  }
  return out;
}

}  // namespace qwot
