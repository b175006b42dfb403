#include "pnorm/errors.hpp"

namespace pnorm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InfeasibleConstraint: return "InfeasibleConstraint";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::InfeasibleRhs: return "InfeasibleRhs";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadExponent: return "BadExponent";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::OracleFailure: return "OracleFailure";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::CertificationFailed: return "CertificationFailed";
    case ErrorCode::DegenerateQ: return "DegenerateQ";
    case ErrorCode::LineSearchStalled: return "LineSearchStalled";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DisconnectedDemand: return "DisconnectedDemand";
    case ErrorCode::UnbalancedDemand: return "UnbalancedDemand";
    case ErrorCode::ZeroInitial: return "ZeroInitial";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::EmptyBox: return "EmptyBox";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace pnorm
