#pragma once

#include <stdexcept>
#include <string>

namespace absforge {

enum class ParseErrorKind {
  Syntax,
  UnsupportedRequirement,
  UnsupportedFeature,
  UndeclaredPredicate,
  UndeclaredType,
  UndeclaredObject,
  ArityMismatch,
  TypeMismatch,
  UnboundVariable,
  DomainMismatch,
  NegativeGoal,
  Duplicate,
};

const char* to_string(ParseErrorKind kind);

/// Error raised by the PDDL, formula and QNP readers. what() is formatted as
/// `file:line:col: message`.
class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::string file, int line, int col, const std::string& message);

  ParseErrorKind kind() const { return kind_; }
  const std::string& file() const { return file_; }
  int line() const { return line_; }
  int column() const { return col_; }
  const std::string& message() const { return message_; }

 private:
  ParseErrorKind kind_;
  std::string file_;
  int line_;
  int col_;
  std::string message_;
};

/// Exhausted search or expansion budget.
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace absforge
