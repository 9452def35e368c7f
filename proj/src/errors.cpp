#include "wft/errors.hpp"

namespace wft {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CurveEscapesDomain: return "CurveEscapesDomain";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::NotAJump: return "NotAJump";
    case ErrorCode::RHViolation: return "RHViolation";
    case ErrorCode::CatalogMiss: return "CatalogMiss";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::DegenerateFrame: return "DegenerateFrame";
    case ErrorCode::NotOnGrid: return "NotOnGrid";
    case ErrorCode::NonMonotoneBreakpoints: return "NonMonotoneBreakpoints";
    case ErrorCode::CrossingOrderViolation: return "CrossingOrderViolation";
    case ErrorCode::EventBudgetExceeded: return "EventBudgetExceeded";
    case ErrorCode::OutOfSpan: return "OutOfSpan";
    case ErrorCode::GNLShockEncounter: return "GNLShockEncounter";
    case ErrorCode::DiscontinuousAtProbe: return "DiscontinuousAtProbe";
    case ErrorCode::NoAdjacentShards: return "NoAdjacentShards";
    case ErrorCode::DependentOutgoing: return "DependentOutgoing";
    case ErrorCode::ParallelSpeeds: return "ParallelSpeeds";
    case ErrorCode::ProbeOnFront: return "ProbeOnFront";
    case ErrorCode::ProbeAtInteractionTime: return "ProbeAtInteractionTime";
    case ErrorCode::EventReorder: return "EventReorder";
    case ErrorCode::MixedFamilies: return "MixedFamilies";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ScenarioError: return "ScenarioError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace wft
