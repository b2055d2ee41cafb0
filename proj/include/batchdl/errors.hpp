#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace batchdl {

/// Shape or precondition violation detected before any computation.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear system stayed singular after the ridge fallback.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double condition_estimate)
      : std::runtime_error(what), condition_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_; }

 private:
  double condition_;
};

/// Input carries no information for the requested operation (e.g. an all-zero matrix).
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace batchdl
