#include "rotodrum/errors.hpp"

namespace rotodrum {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotOnBoundary: return "NotOnBoundary";
    case ErrorCode::NotOutgoing: return "NotOutgoing";
    case ErrorCode::NotInContact: return "NotInContact";
    case ErrorCode::NotApproaching: return "NotApproaching";
    case ErrorCode::NoWallHit: return "NoWallHit";
    case ErrorCode::SimultaneousCollision: return "SimultaneousCollision";
    case ErrorCode::InfeasibleEnsemble: return "InfeasibleEnsemble";
    case ErrorCode::UnsupportedDomain: return "UnsupportedDomain";
    case ErrorCode::VerticalChord: return "VerticalChord";
    case ErrorCode::RootNotFound: return "RootNotFound";
    case ErrorCode::IrrelevantRoot: return "IrrelevantRoot";
    case ErrorCode::SequenceTerminates: return "SequenceTerminates";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

}  // namespace rotodrum
