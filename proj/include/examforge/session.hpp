#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "examforge/bank.hpp"
#include "examforge/selector.hpp"

namespace examforge {

enum class SessionStatus { kActive, kAccepted, kAbandoned };

std::string_view status_name(SessionStatus status);
SessionStatus parse_status(std::string_view name);

// One run of the sampler. A failed run keeps the diagnosis instead of a draft.
struct Step {
  int step_number = 0;  // from 1
  DecisionVector decision_vector;
  std::uint64_t seed = 0;  // derive_seed(base_seed, step_number)
  std::optional<ExamDraft> draft;
  std::optional<FeasibilityReport> failure;
  std::string failure_code;  // machine code of the selection error
  std::string failure_message;

  bool ok() const { return draft.has_value(); }
  bool operator==(const Step&) const = default;
};

// Stepwise alignment loop: each step samples a draft under the educator's
// current decision vector; accepting commits the latest draft.
struct Session {
  std::string id;
  Blueprint blueprint;
  std::string bank_ref;  // bank_fingerprint of the snapshot the session runs on
  std::vector<Step> steps;
  SessionStatus status = SessionStatus::kActive;
  std::uint64_t base_seed = 0;

  const Step* latest() const { return steps.empty() ? nullptr : &steps.back(); }
  // Decision vector of the latest step, or all R before the first step.
  DecisionVector latest_decision_vector() const;
  // Draft of the latest step when that step succeeded.
  const ExamDraft* latest_draft() const;

  bool operator==(const Session&) const = default;
};

std::uint64_t step_seed(std::uint64_t base_seed, int step_number);

// Deterministic id derived from the seed and bank reference.
std::string default_session_id(std::uint64_t base_seed, const std::string& bank_ref);

// Throws on an invalid bank or blueprint (kInvalidBlueprint, kUnknownSubarea).
Session new_session(const Bank& bank, const Blueprint& blueprint, std::uint64_t base_seed,
                    std::string id = {});

// Appends a step. Invalid decision vectors are rejected before sampling;
// infeasible ones are recorded as failed steps.
Session step(const Session& session, const Bank& bank, const DecisionVector& dv);

// Latest decision vector with one entry replaced; no step is taken.
DecisionVector pin(const Session& session, const Bank& bank, int slot_index,
                   const std::string& problem_id);
DecisionVector unpin(const Session& session, int slot_index);

// Same edits on an explicit vector, for composing several pins.
DecisionVector pin(const DecisionVector& dv, const Blueprint& blueprint, const Bank& bank,
                   int slot_index, const std::string& problem_id);
DecisionVector unpin(const DecisionVector& dv, const Blueprint& blueprint, int slot_index);

// Commits the latest draft: returns the accepted session and the bank with
// usage recorded at the blueprint's exam date.
std::pair<Session, Bank> accept(const Session& session, const Bank& bank);
Session abandon(const Session& session);

struct StepSummary {
  int step_number = 0;
  std::string decision_vector;  // compact "[R M(P7) R]" form
  std::uint64_t seed = 0;
  std::string outcome;  // "ok" or the failure machine code
  std::vector<std::string> assignment;
  std::optional<DraftMetrics> metrics;
  std::optional<FeasibilityReport> feasibility;
};

std::vector<StepSummary> history(const Session& session);

// Recomputes every step from (blueprint, base_seed, decision vectors) and
// lists the steps whose outcome differs from the recorded one.
std::vector<std::string> replay_mismatches(const Session& recorded, const Bank& bank);

}  // namespace examforge
