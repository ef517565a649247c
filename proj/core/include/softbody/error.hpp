#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace softbody {

// Stable error identifiers. The string form (see to_string) is part of the
// wire protocol and the CLI diagnostics, so values must never be renamed.
enum class ErrorCode {
  InvalidParams,
  SelfLoop,
  UnknownParticle,
  DimensionForbidsFace,
  DegenerateFace,
  SameObject,
  NotVolumetric,
  OpenSurface,
  ZeroLength,
  NotEnclosed,
  NotApplicable,
  NonfiniteState,
  DuplicateName,
  UnknownAlgorithm,
  SameAlgorithm,
  DegenerateNormal,
  WrongStatus,
  PlaybackImmutable,
  EmptySeries,
  EndOfSeries,
  IoFailure,
  SchemaMismatch,
  CorruptDocument,
  InvariantViolation,
  NonpositiveEntry,
  InvalidMatrix,
  LabelMismatch,
  UnknownInstance,
  InstanceLimit,
  UnknownType,
  ParseError,
  BadRequest,
  BindFailure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace softbody
