#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace periodic {

enum class ErrorCode {
  SingularBasis,
  DimensionMismatch,
  DivergentIntegral,
  PoleAtOne,
  DomainError,
  PlanMismatch,
  PolePoint,
  LatticePoint,
  UnreachableTolerance,
  DegenerateConfiguration,
  InvalidN,
  InvalidArgument,
  UsageError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace periodic
