#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace qlsq {

using Complex = std::complex<double>;

/// Invalid input or configuration (CLI exit code 2).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure, typically a quasi-singular Gram matrix (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem or serialization failure (CLI exit code 4).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qlsq
