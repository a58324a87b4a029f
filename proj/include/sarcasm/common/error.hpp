#pragma once

#include <stdexcept>
#include <string>

namespace sarcasm {

// Base of every error the library throws. Callers that only need a message
// catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (JSONL, vector files, config files).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Dataset-level invariants: duplicate ids, missing labels, broken references.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// History timestamp ordering or h ∩ T disjointness violated.
class HistoryError : public Error {
 public:
  using Error::Error;
};

// Bad configuration: wrong dimensions, missing models, overlapping split specs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside an operation's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace sarcasm
