#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reveval {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed XML. Carries the originating file and 1-based line.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), file_(std::move(file)), line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// Well-formed XML that does not follow the corpus schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Schema-valid content that violates a data invariant (e.g. an empty edit).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public MetricError {
 public:
  using MetricError::MetricError;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace reveval
