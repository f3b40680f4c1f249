#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace emp {

enum class ErrorKind {
  ParseError,
  CycleDetected,
  ScopeMismatch,
  UnknownVariable,
  UncoveredVariable,
  InvalidScope,
  InvalidCardinality,
  DuplicateId,
  InvalidValue,
  OutOfDomain,
  MissingDependency,
  ZeroEvidence,
  TooLarge,
  DegenerateMStep,
  UndefinedQuotient,
  InvalidModel,
  InvalidObservation,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::ScopeMismatch: return "ScopeMismatch";
    case ErrorKind::UnknownVariable: return "UnknownVariable";
    case ErrorKind::UncoveredVariable: return "UncoveredVariable";
    case ErrorKind::InvalidScope: return "InvalidScope";
    case ErrorKind::InvalidCardinality: return "InvalidCardinality";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::MissingDependency: return "MissingDependency";
    case ErrorKind::ZeroEvidence: return "ZeroEvidence";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::DegenerateMStep: return "DegenerateMStep";
    case ErrorKind::UndefinedQuotient: return "UndefinedQuotient";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::InvalidObservation: return "InvalidObservation";
  }
  return "Unknown";
}

/// Errors raised by validation, inference and the document layer.
///
/// `path()` locates the offending item, e.g. `factors[2].values` for a
/// document or `f_C` for a factor built programmatically. It may be empty.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string detail, std::string path = {})
      : std::runtime_error(compose(kind, detail, path)),
        kind_(kind),
        detail_(std::move(detail)),
        path_(std::move(path)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& path() const noexcept { return path_; }

  /// Returns a copy of this error located under `prefix`.
  Error at(const std::string& prefix) const {
    return Error(kind_, detail_, path_.empty() ? prefix : prefix + "." + path_);
  }

 private:
  static std::string compose(ErrorKind kind, const std::string& detail,
                             const std::string& path) {
    std::string msg(to_string(kind));
    if (!path.empty()) msg += " at " + path;
    msg += ": " + detail;
    return msg;
  }

  ErrorKind kind_;
  std::string detail_;
  std::string path_;
};

}  // namespace emp
