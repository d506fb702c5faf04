#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace irdecide {

/// Base class for every error raised by the toolkit. The CLI maps all of
/// them to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number of the offending
/// line (0 when the error is not tied to a line, e.g. broken JSON).
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& message);

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a semantic invariant (duplicate ids,
/// missing cost factor, non-positive cost, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// An evaluation or slice ended up with no queries to work on.
class EmptySetError : public Error {
 public:
  using Error::Error;
};

}  // namespace irdecide
