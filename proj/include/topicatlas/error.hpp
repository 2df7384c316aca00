#pragma once

#include <stdexcept>
#include <string>

namespace topicatlas {

// Base class for every error raised by the library. The CLI maps the
// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or argument (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

// Parse failure in a text file; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}

  std::size_t line() const { return line_; }
  // Message without the line prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

// Non-finite or otherwise broken numerics (exit code 4).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace topicatlas
