#include "softbody/error.hpp"

namespace softbody {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "INVALID_PARAMS";
    case ErrorCode::SelfLoop: return "SELF_LOOP";
    case ErrorCode::UnknownParticle: return "UNKNOWN_PARTICLE";
    case ErrorCode::DimensionForbidsFace: return "DIMENSION_FORBIDS_FACE";
    case ErrorCode::DegenerateFace: return "DEGENERATE_FACE";
    case ErrorCode::SameObject: return "SAME_OBJECT";
    case ErrorCode::NotVolumetric: return "NOT_VOLUMETRIC";
    case ErrorCode::OpenSurface: return "OPEN_SURFACE";
    case ErrorCode::ZeroLength: return "ZERO_LENGTH";
    case ErrorCode::NotEnclosed: return "NOT_ENCLOSED";
    case ErrorCode::NotApplicable: return "NOT_APPLICABLE";
    case ErrorCode::NonfiniteState: return "NONFINITE_STATE";
    case ErrorCode::DuplicateName: return "DUPLICATE_NAME";
    case ErrorCode::UnknownAlgorithm: return "UNKNOWN_ALGORITHM";
    case ErrorCode::SameAlgorithm: return "SAME_ALGORITHM";
    case ErrorCode::DegenerateNormal: return "DEGENERATE_NORMAL";
    case ErrorCode::WrongStatus: return "WRONG_STATUS";
    case ErrorCode::PlaybackImmutable: return "PLAYBACK_IMMUTABLE";
    case ErrorCode::EmptySeries: return "EMPTY_SERIES";
    case ErrorCode::EndOfSeries: return "END_OF_SERIES";
    case ErrorCode::IoFailure: return "IO_FAILURE";
    case ErrorCode::SchemaMismatch: return "SCHEMA_MISMATCH";
    case ErrorCode::CorruptDocument: return "CORRUPT_DOCUMENT";
    case ErrorCode::InvariantViolation: return "INVARIANT_VIOLATION";
    case ErrorCode::NonpositiveEntry: return "NONPOSITIVE_ENTRY";
    case ErrorCode::InvalidMatrix: return "INVALID_MATRIX";
    case ErrorCode::LabelMismatch: return "LABEL_MISMATCH";
    case ErrorCode::UnknownInstance: return "UNKNOWN_INSTANCE";
    case ErrorCode::InstanceLimit: return "INSTANCE_LIMIT";
    case ErrorCode::UnknownType: return "UNKNOWN_TYPE";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::BadRequest: return "BAD_REQUEST";
    case ErrorCode::BindFailure: return "BIND_FAILURE";
  }
  return "UNKNOWN";
}

}  // namespace softbody
