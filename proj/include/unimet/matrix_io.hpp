#pragma once

// Matrix files: {"n": <int>, "re": [[...]], "im": [[...]]}, row-major n x n.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "unimet/core.hpp"
#include "unimet/errors.hpp"
#include "unimet/hermitian.hpp"

namespace unimet {

using json = nlohmann::json;

inline json matrix_to_json(const ComplexMatrix& m) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json rr = json::array();
    json ri = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return json{{"n", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_object()) throw input_error("matrix json: expected an object");
  if (!j.contains("n") || !j["n"].is_number_integer()) {
    throw input_error("matrix json: missing integer field \"n\"");
  }
  const auto n = j["n"].get<long long>();
  if (n < 1) throw input_error("matrix json: n must be positive");
  for (const char* key : {"re", "im"}) {
    if (!j.contains(key) || !j[key].is_array() || static_cast<long long>(j[key].size()) != n) {
      throw input_error(std::string("matrix json: \"") + key + "\" must have n rows");
    }
    for (const auto& row : j[key]) {
      if (!row.is_array() || static_cast<long long>(row.size()) != n) {
        throw input_error(std::string("matrix json: every \"") + key + "\" row must have n entries");
      }
      for (const auto& x : row) {
        if (!x.is_number()) throw input_error("matrix json: non-numeric entry");
      }
    }
  }
  const auto size = static_cast<Eigen::Index>(n);
  ComplexMatrix m(size, size);
  for (Eigen::Index r = 0; r < size; ++r) {
    for (Eigen::Index c = 0; c < size; ++c) {
      const auto ur = static_cast<std::size_t>(r);
      const auto uc = static_cast<std::size_t>(c);
      m(r, c) = cplx{j["re"][ur][uc].get<double>(), j["im"][ur][uc].get<double>()};
    }
  }
  return m;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw input_error(path + ": " + e.what());
  }
}

inline ComplexMatrix read_matrix(const std::string& path) {
  try {
    return matrix_from_json(read_json_file(path));
  } catch (const input_error& e) {
    throw input_error(path + ": " + e.what());
  }
}

inline UnitaryMatrix read_unitary(const std::string& path, double tolerance = default_unitary_tolerance) {
  auto m = read_matrix(path);
  try {
    return validate_unitary(std::move(m), tolerance);
  } catch (const input_error& e) {
    throw input_error(path + ": " + e.what());
  }
}

inline HermitianMatrix read_hermitian(const std::string& path,
                                      double tolerance = default_hermitian_tolerance) {
  const auto m = read_matrix(path);
  try {
    return HermitianMatrix(m, tolerance);
  } catch (const input_error& e) {
    throw input_error(path + ": " + e.what());
  }
}

inline void write_matrix(const std::string& path, const ComplexMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << matrix_to_json(m).dump(2) << '\n';
}

}  // namespace unimet
