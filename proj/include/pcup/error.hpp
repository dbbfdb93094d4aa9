#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcup {

enum class ErrorCode {
  EmptyCloud,
  KTooLarge,
  DegenerateCloud,
  TooFewPoints,
  TooManySteps,
  BadCount,
  LadderMismatch,
  OutOfRange,
  NonFiniteLoss,
  NonFiniteState,
  BadRate,
  EmptyMesh,
  Corrupt,
  VersionMismatch,
  Io,
  Malformed,
  UnsupportedFormat,
  BadConfig,
  BadArgument,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable error kind.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string &detail() const noexcept { return detail_; }

private:
  ErrorCode code_;
  std::string detail_;
};

} // namespace pcup
