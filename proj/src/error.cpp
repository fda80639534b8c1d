#include "tgf/error.hpp"

namespace tgf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return "InvalidArgument";
    case ErrorCode::DegenerateVectors:
      return "DegenerateVectors";
    case ErrorCode::NotOrthonormal:
      return "NotOrthonormal";
    case ErrorCode::WidthExceedsSpec:
      return "WidthExceedsSpec";
    case ErrorCode::EmptyGroundTruth:
      return "EmptyGroundTruth";
    case ErrorCode::ParseError:
      return "ParseError";
    case ErrorCode::UnitError:
      return "UnitError";
    case ErrorCode::CategoryUnknown:
      return "CategoryUnknown";
    case ErrorCode::NoContact:
      return "NoContact";
    case ErrorCode::UnknownGrasp:
      return "UnknownGrasp";
    case ErrorCode::TaskNotAssigned:
      return "TaskNotAssigned";
    case ErrorCode::CatalogTooSmall:
      return "CatalogTooSmall";
    case ErrorCode::PlacementFailed:
      return "PlacementFailed";
    case ErrorCode::UnknownObject:
      return "UnknownObject";
    case ErrorCode::InvalidCamera:
      return "InvalidCamera";
    case ErrorCode::TaskNotAllowedForCategory:
      return "TaskNotAllowedForCategory";
    case ErrorCode::UnknownTriplet:
      return "UnknownTriplet";
    case ErrorCode::EmptyInput:
      return "EmptyInput";
    case ErrorCode::LengthMismatch:
      return "LengthMismatch";
    case ErrorCode::NonFinite:
      return "NonFinite";
    case ErrorCode::SchemaMismatch:
      return "SchemaMismatch";
    case ErrorCode::CorruptFile:
      return "CorruptFile";
    case ErrorCode::MissingDependency:
      return "MissingDependency";
    case ErrorCode::WorkspaceLocked:
      return "WorkspaceLocked";
    case ErrorCode::IoError:
      return "IoError";
  }
  return "Error";
}

}  // namespace tgf
