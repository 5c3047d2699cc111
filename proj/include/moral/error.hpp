#pragma once

#include <stdexcept>
#include <string>

namespace moral {

// Malformed or inconsistent input data (files, ids, label strings).
// The CLI maps this to exit code 3.
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (zero-norm vectors, divergence, non-finite values).
// The CLI maps this to exit code 4.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace moral
