#include "emergence/error.hpp"

namespace emergence {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::RowSumOutOfTolerance: return "RowSumOutOfTolerance";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidLens: return "InvalidLens";
    case ErrorCode::InvalidPrototype: return "InvalidPrototype";
    case ErrorCode::TauZero: return "TauZero";
    case ErrorCode::NotARefinement: return "NotARefinement";
    case ErrorCode::ExplosionCap: return "ExplosionCap";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NoCommonStationary: return "NoCommonStationary";
    case ErrorCode::InvalidProtocol: return "InvalidProtocol";
    case ErrorCode::RevViolation: return "RevViolation";
    case ErrorCode::EdgeMissing: return "EdgeMissing";
    case ErrorCode::RowStarved: return "RowStarved";
    case ErrorCode::NotReversible: return "NotReversible";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::BadWindow: return "BadWindow";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

void raise(ErrorCode code, std::string_view module, const std::string& message) {
  throw Error(code, std::string(module), message);
}

}  // namespace emergence
