#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wft {

enum class ErrorCode {
  CurveEscapesDomain,
  ValidationFailed,
  NotAJump,
  RHViolation,
  CatalogMiss,
  OutOfDomain,
  DegenerateFrame,
  NotOnGrid,
  NonMonotoneBreakpoints,
  CrossingOrderViolation,
  EventBudgetExceeded,
  OutOfSpan,
  GNLShockEncounter,
  DiscontinuousAtProbe,
  NoAdjacentShards,
  DependentOutgoing,
  ParallelSpeeds,
  ProbeOnFront,
  ProbeAtInteractionTime,
  EventReorder,
  MixedFamilies,
  InvalidArgument,
  ScenarioError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. The code is stable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail);

}  // namespace wft
