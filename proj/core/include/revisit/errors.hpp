#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace revisit {

// Malformed input text. line() is 1-based; 0 when the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Argument outside the mathematical domain of an operation (non-positive
// Dirichlet parameter, index out of range, mismatched dimensions, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Every particle weight vanished during a measurement update.
class FilterDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hyperparameter optimization produced a non-finite objective.
class OptimizationError : public std::runtime_error {
 public:
  OptimizationError(const std::string& what, std::size_t column)
      : std::runtime_error(what + " (column " + std::to_string(column) + ")"),
        column_(column) {}

  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

}  // namespace revisit
