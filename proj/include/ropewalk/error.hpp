#pragma once

#include <stdexcept>
#include <string>

namespace ropewalk {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid geometry: degenerate edges, doubled-back vertices, self-intersection.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line number (0 when unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Iterative numerical routine failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ropewalk
