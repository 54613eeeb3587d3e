#include "examforge/session.hpp"

#include <algorithm>
#include <cstdio>

namespace examforge {

namespace {

void require_active(const Session& s) {
  if (s.status != SessionStatus::kActive) {
    throw Error(ErrorCode::kTerminalState, "session \"" + s.id + "\" is " +
                                               std::string(status_name(s.status)) +
                                               "; start a new session");
  }
}

void require_same_bank(const Session& s, const Bank& bank) {
  const std::string ref = bank_fingerprint(bank);
  if (ref != s.bank_ref) {
    throw Error(ErrorCode::kBankChanged, "bank changed since session \"" + s.id +
                                             "\" started (" + s.bank_ref + " -> " + ref +
                                             "); start a new session");
  }
}

void require_slot(const Blueprint& bp, int slot_index) {
  if (slot_index < 1 || slot_index > static_cast<int>(bp.slots.size())) {
    throw Error(ErrorCode::kInvalidDecisionVector,
                "slot " + std::to_string(slot_index) + " does not exist (blueprint has " +
                    std::to_string(bp.slots.size()) + " slots)");
  }
}

Step run_step(const Bank& bank, const Blueprint& blueprint, const DecisionVector& dv,
              int step_number, std::uint64_t base_seed) {
  Step st;
  st.step_number = step_number;
  st.decision_vector = dv;
  st.seed = step_seed(base_seed, step_number);
  try {
    st.draft = sample_draft(bank, blueprint, dv, st.seed);
  } catch (const SelectionError& e) {
    st.failure = e.report();
    st.failure_code = std::string(machine_code(e.code()));
    st.failure_message = e.what();
  }
  return st;
}

}  // namespace

std::string_view status_name(SessionStatus status) {
  switch (status) {
    case SessionStatus::kActive: return "active";
    case SessionStatus::kAccepted: return "accepted";
    case SessionStatus::kAbandoned: return "abandoned";
  }
  return "active";
}

SessionStatus parse_status(std::string_view name) {
  if (name == "active") return SessionStatus::kActive;
  if (name == "accepted") return SessionStatus::kAccepted;
  if (name == "abandoned") return SessionStatus::kAbandoned;
  throw Error(ErrorCode::kTranscript, "unknown session status \"" + std::string(name) + "\"");
}

DecisionVector Session::latest_decision_vector() const {
  if (steps.empty()) return DecisionVector::all_random(blueprint.slots.size());
  return steps.back().decision_vector;
}

const ExamDraft* Session::latest_draft() const {
  if (steps.empty() || !steps.back().draft) return nullptr;
  return &*steps.back().draft;
}

std::uint64_t step_seed(std::uint64_t base_seed, int step_number) {
  return derive_seed(base_seed, static_cast<std::uint64_t>(step_number));
}

std::string default_session_id(std::uint64_t base_seed, const std::string& bank_ref) {
  std::uint64_t h = base_seed;
  for (unsigned char c : bank_ref) h = mix64(h ^ c);
  char buf[16];
  std::snprintf(buf, sizeof buf, "s-%012llx",
                static_cast<unsigned long long>(h & 0xFFFFFFFFFFFFULL));
  return buf;
}

Session new_session(const Bank& bank, const Blueprint& blueprint, std::uint64_t base_seed,
                    std::string id) {
  require_valid(bank);
  validate_blueprint(blueprint, bank);
  Session s;
  s.blueprint = blueprint;
  s.bank_ref = bank_fingerprint(bank);
  s.base_seed = base_seed;
  s.id = id.empty() ? default_session_id(base_seed, s.bank_ref) : std::move(id);
  return s;
}

Session step(const Session& session, const Bank& bank, const DecisionVector& dv) {
  require_active(session);
  require_same_bank(session, bank);
  validate_decision_vector(bank, session.blueprint, dv);
  Session next = session;
  next.steps.push_back(run_step(bank, session.blueprint, dv,
                                static_cast<int>(session.steps.size()) + 1, session.base_seed));
  return next;
}

DecisionVector pin(const DecisionVector& dv, const Blueprint& blueprint, const Bank& bank,
                   int slot_index, const std::string& problem_id) {
  require_slot(blueprint, slot_index);
  DecisionVector next = dv;
  next.entries.resize(blueprint.slots.size());
  next.entries[static_cast<std::size_t>(slot_index - 1)] = Decision::manual(problem_id);
  validate_decision_vector(bank, blueprint, next);
  return next;
}

DecisionVector unpin(const DecisionVector& dv, const Blueprint& blueprint, int slot_index) {
  require_slot(blueprint, slot_index);
  DecisionVector next = dv;
  next.entries.resize(blueprint.slots.size());
  next.entries[static_cast<std::size_t>(slot_index - 1)] = Decision::random();
  return next;
}

DecisionVector pin(const Session& session, const Bank& bank, int slot_index,
                   const std::string& problem_id) {
  require_active(session);
  return pin(session.latest_decision_vector(), session.blueprint, bank, slot_index, problem_id);
}

DecisionVector unpin(const Session& session, int slot_index) {
  require_active(session);
  return unpin(session.latest_decision_vector(), session.blueprint, slot_index);
}

std::pair<Session, Bank> accept(const Session& session, const Bank& bank) {
  require_active(session);
  const ExamDraft* draft = session.latest_draft();
  if (!draft) {
    throw Error(ErrorCode::kNoDraft, "session \"" + session.id +
                                         "\" has no successful draft to accept; run a step first");
  }
  require_same_bank(session, bank);
  Bank updated = record_usage(bank, draft->assignment, session.blueprint.exam_date);
  Session done = session;
  done.status = SessionStatus::kAccepted;
  return {std::move(done), std::move(updated)};
}

Session abandon(const Session& session) {
  require_active(session);
  Session done = session;
  done.status = SessionStatus::kAbandoned;
  return done;
}

std::vector<StepSummary> history(const Session& session) {
  std::vector<StepSummary> out;
  for (const auto& st : session.steps) {
    StepSummary sum;
    sum.step_number = st.step_number;
    sum.decision_vector = st.decision_vector.to_string();
    sum.seed = st.seed;
    if (st.draft) {
      sum.outcome = "ok";
      sum.assignment = st.draft->assignment;
      sum.metrics = st.draft->metrics;
    } else {
      sum.outcome = st.failure_code;
      sum.feasibility = st.failure;
    }
    out.push_back(std::move(sum));
  }
  return out;
}

std::vector<std::string> replay_mismatches(const Session& recorded, const Bank& current) {
  // An accepted session changed the bank itself; undo that commit to recover
  // the snapshot the steps ran on.
  Bank bank = current;
  if (bank_fingerprint(bank) != recorded.bank_ref && recorded.status == SessionStatus::kAccepted &&
      recorded.latest_draft()) {
    const auto& ids = recorded.latest_draft()->assignment;
    for (auto& p : bank.problems) {
      if (std::find(ids.begin(), ids.end(), p.id) != ids.end() && !p.usage_dates.empty() &&
          p.usage_dates.back() == recorded.blueprint.exam_date) {
        p.usage_dates.pop_back();
      }
    }
    bank.rebuild_index();
  }
  require_same_bank(recorded, bank);

  std::vector<std::string> problems;
  for (const auto& st : recorded.steps) {
    const Step again =
        run_step(bank, recorded.blueprint, st.decision_vector, st.step_number, recorded.base_seed);
    if (again.seed != st.seed) {
      problems.push_back("step " + std::to_string(st.step_number) + ": seed differs");
    } else if (again.draft != st.draft) {
      problems.push_back("step " + std::to_string(st.step_number) + ": draft differs");
    } else if (again.failure_code != st.failure_code) {
      problems.push_back("step " + std::to_string(st.step_number) + ": outcome differs");
    }
  }
  return problems;
}

}  // namespace examforge
