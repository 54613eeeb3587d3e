#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace examforge {

// Every failure the library reports carries one of these codes. The service
// maps each code to exactly one machine code and HTTP status.
enum class ErrorCode {
  kIo,
  kBankLoad,
  kInvalidBank,
  kUnknownSubarea,
  kUnknownProblem,
  kNonMonotoneDate,
  kInvalidBlueprint,
  kInvalidDecisionVector,
  kPinsExceedTarget,
  kInfeasible,
  kDegenerateDuplicates,
  kBandInfeasible,
  kTerminalState,
  kNoDraft,
  kBankChanged,
  kSessionNotFound,
  kMissingFragment,
  kInvalidArgument,
  kBankLocked,
  kTranscript,
};

std::string_view machine_code(ErrorCode code);
int http_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace examforge
