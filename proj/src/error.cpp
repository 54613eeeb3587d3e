#include "examforge/error.hpp"

namespace examforge {

std::string_view machine_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kBankLoad: return "bank_load_error";
    case ErrorCode::kInvalidBank: return "invalid_bank";
    case ErrorCode::kUnknownSubarea: return "unknown_subarea";
    case ErrorCode::kUnknownProblem: return "unknown_problem";
    case ErrorCode::kNonMonotoneDate: return "non_monotone_date";
    case ErrorCode::kInvalidBlueprint: return "invalid_blueprint";
    case ErrorCode::kInvalidDecisionVector: return "invalid_decision_vector";
    case ErrorCode::kPinsExceedTarget: return "pins_exceed_target";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kDegenerateDuplicates: return "degenerate_duplicates";
    case ErrorCode::kBandInfeasible: return "band_infeasible";
    case ErrorCode::kTerminalState: return "terminal_state";
    case ErrorCode::kNoDraft: return "no_draft";
    case ErrorCode::kBankChanged: return "bank_changed";
    case ErrorCode::kSessionNotFound: return "session_not_found";
    case ErrorCode::kMissingFragment: return "missing_fragment";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kBankLocked: return "bank_locked";
    case ErrorCode::kTranscript: return "transcript_error";
  }
  return "internal_error";
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownProblem:
    case ErrorCode::kSessionNotFound:
      return 404;
    case ErrorCode::kTerminalState:
    case ErrorCode::kNoDraft:
    case ErrorCode::kBankChanged:
    case ErrorCode::kBankLocked:
      return 409;
    case ErrorCode::kIo:
    case ErrorCode::kBankLoad:
    case ErrorCode::kInvalidBank:
    case ErrorCode::kMissingFragment:
    case ErrorCode::kTranscript:
      return 500;
    default:
      return 400;
  }
}

}  // namespace examforge
