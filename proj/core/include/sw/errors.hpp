#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sw {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise unusable input data.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Dimension mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent layer or command configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterative kernel failed to converge or diverged.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Backward pass requested without a matching forward cache.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Eigenvalue gap too small for the eigendecomposition gradient.
class DegenerateSpectrum : public Error {
 public:
  DegenerateSpectrum(const std::string& what, double gap, double threshold);
  double gap() const noexcept { return gap_; }
  double threshold() const noexcept { return threshold_; }

 private:
  double gap_;
  double threshold_;
};

/// Malformed binary file; carries the byte offset where parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class FileError : public Error {
 public:
  using Error::Error;
};

/// The finite-difference oracle saw a non-finite function value.
class OracleFailure : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

}  // namespace sw
