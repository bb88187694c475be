#include "absforge/error.hpp"

namespace absforge {

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::Syntax: return "SyntaxError";
    case ParseErrorKind::UnsupportedRequirement: return "UnsupportedRequirement";
    case ParseErrorKind::UnsupportedFeature: return "UnsupportedFeature";
    case ParseErrorKind::UndeclaredPredicate: return "UndeclaredPredicate";
    case ParseErrorKind::UndeclaredType: return "UndeclaredType";
    case ParseErrorKind::UndeclaredObject: return "UndeclaredObject";
    case ParseErrorKind::ArityMismatch: return "ArityMismatch";
    case ParseErrorKind::TypeMismatch: return "TypeMismatch";
    case ParseErrorKind::UnboundVariable: return "UnboundVariable";
    case ParseErrorKind::DomainMismatch: return "DomainMismatch";
    case ParseErrorKind::NegativeGoal: return "NegativeGoal";
    case ParseErrorKind::Duplicate: return "Duplicate";
  }
  return "ParseError";
}

namespace {

std::string format_location(const std::string& file, int line, int col, const std::string& message) {
  return (file.empty() ? std::string("<input>") : file) + ":" + std::to_string(line) + ":" +
         std::to_string(col) + ": " + message;
}

}  // namespace

ParseError::ParseError(ParseErrorKind kind, std::string file, int line, int col,
                       const std::string& message)
    : std::runtime_error(format_location(file, line, col, message)),
      kind_(kind),
      file_(std::move(file)),
      line_(line),
      col_(col),
      message_(message) {}

}  // namespace absforge
