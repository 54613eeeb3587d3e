#pragma once

// JSON forms of the domain types, shared by the transcript files, the CLI's
// --format json output and the HTTP API. Output uses insertion-ordered
// objects so serialized text is stable. Seeds and big counts travel as
// decimal strings; parsers also accept plain integers for seeds.

#include <cstdint>

#include "json.hpp"

#include "examforge/bank.hpp"
#include "examforge/selector.hpp"

namespace examforge {

using Json = nlohmann::ordered_json;

std::string seed_to_string(std::uint64_t seed);
std::uint64_t parse_seed(const Json& value);
std::uint64_t parse_seed(const std::string& text);

Json to_json(const Blueprint& blueprint);
// Accepts slots as ["A", "B"] or [{"slot_index": 1, "subarea": "A"}, ...].
// Throws Error(kInvalidBlueprint) on malformed input.
Blueprint blueprint_from_json(const Json& j);

// Entries are "R" or {"M": "<problem id>"}.
Json to_json(const DecisionVector& dv);
DecisionVector decision_vector_from_json(const Json& j);

Json to_json(const DraftMetrics& m);
DraftMetrics metrics_from_json(const Json& j);

Json to_json(const ExamDraft& draft);
ExamDraft draft_from_json(const Json& j);

Json to_json(const FeasibilityReport& report);
FeasibilityReport feasibility_from_json(const Json& j);

Json to_json(const ValidationReport& report);

// Problem metadata; fragment bodies only when `bank` is given.
Json problem_json(const Problem& problem, const Bank* bank_for_bodies = nullptr);

}  // namespace examforge
