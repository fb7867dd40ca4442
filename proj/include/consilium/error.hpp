#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace consilium {

enum class ErrorCode {
  parse_error,
  validation_error,
  domain_error,
  config_error,
  phase_error,
  role_error,
  conflict,
  not_found,
  forbidden,
  bad_request,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::validation_error: return "validation_error";
    case ErrorCode::domain_error: return "domain_error";
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::phase_error: return "phase_error";
    case ErrorCode::role_error: return "role_error";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::forbidden: return "forbidden";
    case ErrorCode::bad_request: return "bad_request";
  }
  return "error";
}

// Every failure the library reports carries a machine-readable code; the HTTP
// layer maps codes to status, the CLI maps them to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(ErrorCode::validation_error, join(violations)),
        violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
      if (!out.empty()) out += "; ";
      out += item;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace consilium
