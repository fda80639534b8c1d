#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tgf {

enum class ErrorCode {
  InvalidArgument,
  DegenerateVectors,
  NotOrthonormal,
  WidthExceedsSpec,
  EmptyGroundTruth,
  ParseError,
  UnitError,
  CategoryUnknown,
  NoContact,
  UnknownGrasp,
  TaskNotAssigned,
  CatalogTooSmall,
  PlacementFailed,
  UnknownObject,
  InvalidCamera,
  TaskNotAllowedForCategory,
  UnknownTriplet,
  EmptyInput,
  LengthMismatch,
  NonFinite,
  SchemaMismatch,
  CorruptFile,
  MissingDependency,
  WorkspaceLocked,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Domain error. Every failure the library reports carries one of the codes
/// above; the CLI maps all of them to exit status 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace tgf
