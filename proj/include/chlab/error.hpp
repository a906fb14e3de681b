#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument does not hold (bad grid size, N <= 0, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested outside the domain where a quantity is defined,
/// e.g. a tabulated weight queried past the end of its table.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario text. Carries the 1-based line and the offending key.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& what)
      : Error("line " + std::to_string(line) + (field.empty() ? "" : ", field '" + field + "'") +
              ": " + what),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace chlab
