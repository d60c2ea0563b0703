#pragma once

#include <stdexcept>
#include <string>

namespace transa {

// Malformed or inconsistent input data (files, vocabularies, splits).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values encountered during optimization.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace transa
