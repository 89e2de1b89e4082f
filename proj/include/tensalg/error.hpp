#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tensalg {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. `position()` is a 0-based character offset for
/// index specs and a 1-based line number for files.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Operands whose index lists, registries, or extents do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure inside a solver (singular system, breakdown, divergence).
/// `iteration()` is the iteration at which an iterative solver gave up.
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what, std::size_t iteration = 0)
      : Error(what), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace tensalg
