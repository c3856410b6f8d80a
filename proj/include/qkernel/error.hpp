#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qkernel {

/// Base for every error raised by the library. The CLI maps all of these to
/// exit status 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed container header or unparsable text.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value found while validating a matrix.
class ValidationError : public Error {
 public:
  ValidationError(std::size_t row, std::size_t col)
      : Error("non-finite value at (" + std::to_string(row) + "," + std::to_string(col) + ")"),
        row_(row),
        col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

/// Dimension or length mismatch.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Invalid scheme parameters or generator configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File system failure; the message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Relative error requested against an all-zero reference product while the
/// perturbed product is non-zero.
class DegenerateBaselineError : public Error {
 public:
  using Error::Error;
};

}  // namespace qkernel
