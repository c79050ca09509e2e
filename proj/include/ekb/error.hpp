#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ekb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ContradictionError : public Error {
 public:
  using Error::Error;
};

class DuplicateError : public Error {
 public:
  using Error::Error;
};

class UnknownTermError : public Error {
 public:
  explicit UnknownTermError(const std::string& term)
      : Error("unknown term: " + term), term_(term) {}

  [[nodiscard]] const std::string& term() const noexcept { return term_; }

 private:
  std::string term_;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class NoConvergentDimensionError : public Error {
 public:
  using Error::Error;
};

class EnsembleFitError : public Error {
 public:
  using Error::Error;
};

class DegenerateAggregateError : public Error {
 public:
  using Error::Error;
};

class DigestMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace ekb
