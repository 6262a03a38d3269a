#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rotodrum {

enum class ErrorCode {
  InvalidArgument,
  NotOnBoundary,
  NotOutgoing,
  NotInContact,
  NotApproaching,
  NoWallHit,
  SimultaneousCollision,
  InfeasibleEnsemble,
  UnsupportedDomain,
  VerticalChord,
  RootNotFound,
  IrrelevantRoot,
  SequenceTerminates,
  InsufficientData,
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rotodrum
