#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pnorm {

enum class ErrorCode {
  SingularSystem,
  NonFinite,
  InfeasibleConstraint,
  Overflow,
  InfeasibleRhs,
  DimensionMismatch,
  BadExponent,
  EmptyGrid,
  OracleFailure,
  IterationLimit,
  CertificationFailed,
  DegenerateQ,
  LineSearchStalled,
  SelfLoop,
  DisconnectedDemand,
  UnbalancedDemand,
  ZeroInitial,
  NoConvergence,
  EmptyBox,
  ParseError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library is reported as an Error carrying a code, so
// callers (the CLI in particular) can map failures to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by certification; ratio = achieved / required residual value.
class CertificationError : public Error {
 public:
  CertificationError(const std::string& message, double ratio)
      : Error(ErrorCode::CertificationFailed, message), ratio_(ratio) {}

  double ratio() const noexcept { return ratio_; }

 private:
  double ratio_;
};

}  // namespace pnorm
