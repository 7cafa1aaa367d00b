#pragma once

#include <stdexcept>
#include <string>

namespace qintent {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file or stream could not be opened or read.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input text does not follow the documented file format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Tensor or vector dimensions are incompatible.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value violates a domain invariant (bad label, bad distribution, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace qintent
