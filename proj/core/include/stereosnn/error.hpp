#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stereosnn {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration. The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

  // Same error with `prefix` (e.g. a file name) in front, line kept.
  ParseError with_prefix(const std::string& prefix) const {
    ParseError e(prefix + what(), 0);
    e.line_ = line_;
    return e;
  }

 private:
  std::size_t line_;
};

// Filesystem failure (missing file, unwritable directory).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace stereosnn
