#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mcqforge {

enum class ErrorKind {
  // core-model
  MissingField,
  EmptyText,
  DuplicateId,
  BadUrl,
  BadField,
  OptionCountError,
  DuplicateOption,
  GoldIndexOutOfRange,
  GoldMismatch,
  // llm-gateway
  TransientExhausted,
  AuthError,
  HttpError,
  MalformedResponse,
  CacheIoError,
  JsonExtractError,
  // augmentor
  UnknownCountry,
  SchemaError,
  DistractorQualityError,
  SampleTooLarge,
  // evaluator
  EmptyEvalSet,
  DuplicateModelDataset,
  // plumbing
  IoError,
  ConfigError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::EmptyText: return "EmptyText";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::BadUrl: return "BadUrl";
    case ErrorKind::BadField: return "BadField";
    case ErrorKind::OptionCountError: return "OptionCountError";
    case ErrorKind::DuplicateOption: return "DuplicateOption";
    case ErrorKind::GoldIndexOutOfRange: return "GoldIndexOutOfRange";
    case ErrorKind::GoldMismatch: return "GoldMismatch";
    case ErrorKind::TransientExhausted: return "TransientExhausted";
    case ErrorKind::AuthError: return "AuthError";
    case ErrorKind::HttpError: return "HttpError";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::CacheIoError: return "CacheIoError";
    case ErrorKind::JsonExtractError: return "JsonExtractError";
    case ErrorKind::UnknownCountry: return "UnknownCountry";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::DistractorQualityError: return "DistractorQualityError";
    case ErrorKind::SampleTooLarge: return "SampleTooLarge";
    case ErrorKind::EmptyEvalSet: return "EmptyEvalSet";
    case ErrorKind::DuplicateModelDataset: return "DuplicateModelDataset";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// One violated field of a record.
struct FieldIssue {
  ErrorKind kind;
  std::string field;
  std::string detail;
  std::size_t line = 0;  // 1-based source line when known

  bool operator==(const FieldIssue&) const = default;
};

/// Raised by record validation; carries every violation found, not just the
/// first. kind() reports the first issue so callers can switch on it.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<FieldIssue> issues)
      : Error(issues.empty() ? ErrorKind::BadField : issues.front().kind,
              describe(issues)),
        issues_(std::move(issues)) {}

  const std::vector<FieldIssue>& issues() const noexcept { return issues_; }

  bool has(ErrorKind kind, std::string_view field) const {
    for (const auto& issue : issues_) {
      if (issue.kind == kind && issue.field == field) return true;
    }
    return false;
  }

 private:
  static std::string describe(const std::vector<FieldIssue>& issues) {
    std::string out;
    for (const auto& issue : issues) {
      if (!out.empty()) out += "; ";
      if (issue.line != 0) out += "line " + std::to_string(issue.line) + ": ";
      out += std::string(to_string(issue.kind)) + "(" + issue.field + ")";
      if (!issue.detail.empty()) out += " " + issue.detail;
    }
    return out;
  }

  std::vector<FieldIssue> issues_;
};

}  // namespace mcqforge
