#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hqc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration: unknown columns, bad flag values, missing input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The data cannot support the requested computation (too few rows, degenerate samples).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace hqc
