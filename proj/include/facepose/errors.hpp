// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace facepose {

/// Root of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed depth file. Carries the 1-based line (text formats) or the byte
/// offset (binary formats) where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t offset)
      : Error(what), line_(line), offset_(offset) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Every point of a cloud fell outside the grid extents.
class EmptyProjectionError : public Error {
 public:
  using Error::Error;
};

/// A configuration or generator spec violates its invariants.
class SpecError : public Error {
 public:
  using Error::Error;
};

class NoseNotFound : public Error {
 public:
  using Error::Error;
};

class EyeCornersNotFound : public Error {
 public:
  using Error::Error;
};

}  // namespace facepose
