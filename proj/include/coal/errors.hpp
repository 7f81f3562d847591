#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coal {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed dataset or hierarchy text. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A data or hierarchy file could not be opened or read.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters: schedules, noise specs, hierarchies, experiment configs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite inputs reaching a numeric kernel.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition (e.g. a queried cost was not observed).
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace coal
