#include "pcup/error.hpp"

namespace pcup {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::EmptyCloud: return "EmptyCloud";
  case ErrorCode::KTooLarge: return "KTooLarge";
  case ErrorCode::DegenerateCloud: return "DegenerateCloud";
  case ErrorCode::TooFewPoints: return "TooFewPoints";
  case ErrorCode::TooManySteps: return "TooManySteps";
  case ErrorCode::BadCount: return "BadCount";
  case ErrorCode::LadderMismatch: return "LadderMismatch";
  case ErrorCode::OutOfRange: return "OutOfRange";
  case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
  case ErrorCode::NonFiniteState: return "NonFiniteState";
  case ErrorCode::BadRate: return "BadRate";
  case ErrorCode::EmptyMesh: return "EmptyMesh";
  case ErrorCode::Corrupt: return "Corrupt";
  case ErrorCode::VersionMismatch: return "VersionMismatch";
  case ErrorCode::Io: return "Io";
  case ErrorCode::Malformed: return "Malformed";
  case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
  case ErrorCode::BadConfig: return "BadConfig";
  case ErrorCode::BadArgument: return "BadArgument";
  }
  return "Unknown";
}

} // namespace pcup
