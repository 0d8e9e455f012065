#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tabtext {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration or schema is invalid; raised before any work starts.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A table header does not cover a column the schema declares.
class SchemaMismatchError : public Error {
 public:
  SchemaMismatchError(const std::string& table, const std::string& column)
      : Error("schema mismatch in table '" + table + "': header has no column '" + column + "'"),
        column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

// Row-level parse failure. Line numbers are 1-based physical lines of the input.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Embedding backend failure. text_index is the offending input position.
class BackendError : public Error {
 public:
  BackendError(const std::string& message, std::size_t text_index = npos)
      : Error(text_index == npos ? message
                                 : message + " (text index " + std::to_string(text_index) + ")"),
        detail_(message),
        text_index_(text_index) {}
  std::size_t text_index() const noexcept { return text_index_; }
  // Message without the text index suffix.
  const std::string& detail() const noexcept { return detail_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::string detail_;
  std::size_t text_index_;
};

class AggregationError : public Error {
 public:
  using Error::Error;
};

// Static source holds more than one row for an entity.
class AmbiguityError : public Error {
 public:
  AmbiguityError(const std::string& entity, const std::string& source)
      : Error("entity '" + entity + "' has multiple rows in static source '" + source + "'"),
        entity_(entity),
        source_(source) {}
  const std::string& entity() const noexcept { return entity_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::string entity_;
  std::string source_;
};

class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Pipeline failure annotated with the stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("stage '" + stage + "' failed: " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace tabtext
