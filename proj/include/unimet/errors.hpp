#pragma once

#include <stdexcept>
#include <string>

namespace unimet {

/// Malformed or out-of-contract input: bad shape, failed unitarity or
/// Hermiticity check, inadmissible weights, mismatched dimensions.
class input_error : public std::invalid_argument {
 public:
  explicit input_error(const std::string& what) : std::invalid_argument(what) {}
};

class dimension_mismatch : public input_error {
 public:
  explicit dimension_mismatch(const std::string& what) : input_error(what) {}
};

/// A decomposition failed or produced a result outside its own tolerances.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require_same_dim(long a, long b, const char* where) {
  if (a != b) {
    throw dimension_mismatch(std::string(where) + ": dimension mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
  }
}

}  // namespace unimet
