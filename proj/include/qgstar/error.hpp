#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qgstar {

using Complex = std::complex<double>;

enum class ErrorCode {
  BadEdgeCount,
  ConstraintViolated,
  LengthMismatch,
  ExcludedCoupling,
  NonPositiveDistance,
  NotDecreasing,
  InvalidConfig,
  DegenerateBracket,
  NonRealSchedule,
  InvalidQuery,
  SingularDenominator,
  SingularSystem,
  QuadratureNotConverged,
  InsufficientData,
  NonPositiveValue,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadEdgeCount: return "BadEdgeCount";
    case ErrorCode::ConstraintViolated: return "ConstraintViolated";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ExcludedCoupling: return "ExcludedCoupling";
    case ErrorCode::NonPositiveDistance: return "NonPositiveDistance";
    case ErrorCode::NotDecreasing: return "NotDecreasing";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DegenerateBracket: return "DegenerateBracket";
    case ErrorCode::NonRealSchedule: return "NonRealSchedule";
    case ErrorCode::InvalidQuery: return "InvalidQuery";
    case ErrorCode::SingularDenominator: return "SingularDenominator";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace qgstar
