#include "examforge/json_io.hpp"

#include <charconv>

namespace examforge {

namespace {

[[noreturn]] void malformed(ErrorCode code, const std::string& what) { throw Error(code, what); }

const Json& field(const Json& j, const char* key, ErrorCode code) {
  if (!j.is_object()) malformed(code, "expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) malformed(code, std::string("missing field \"") + key + "\"");
  return *it;
}

int int_field(const Json& j, const char* key, ErrorCode code) {
  const Json& v = field(j, key, code);
  if (!v.is_number_integer()) malformed(code, std::string("field \"") + key + "\" must be an integer");
  const auto n = v.get<long long>();
  if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) {
    malformed(code, std::string("field \"") + key + "\" out of range");
  }
  return static_cast<int>(n);
}

double number_field(const Json& j, const char* key, ErrorCode code) {
  const Json& v = field(j, key, code);
  if (!v.is_number()) malformed(code, std::string("field \"") + key + "\" must be a number");
  return v.get<double>();
}

std::string string_field(const Json& j, const char* key, ErrorCode code) {
  const Json& v = field(j, key, code);
  if (!v.is_string()) malformed(code, std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::string verdict_name(Verdict v) { return v == Verdict::kExact ? "exact" : "probabilistic"; }

}  // namespace

std::string seed_to_string(std::uint64_t seed) { return std::to_string(seed); }

std::uint64_t parse_seed(const std::string& text) {
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::kInvalidArgument, "invalid seed \"" + text + "\"");
  }
  return value;
}

std::uint64_t parse_seed(const Json& value) {
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  if (value.is_number_integer() && value.get<long long>() >= 0) {
    return static_cast<std::uint64_t>(value.get<long long>());
  }
  if (value.is_string()) return parse_seed(value.get<std::string>());
  throw Error(ErrorCode::kInvalidArgument, "seed must be a non-negative integer or decimal string");
}

Json to_json(const Blueprint& bp) {
  Json slots = Json::array();
  for (const auto& s : bp.slots) slots.push_back({{"slot_index", s.slot_index}, {"subarea", s.subarea}});
  Json j;
  j["slots"] = std::move(slots);
  j["target_points"] = bp.target_points;
  j["recency_window_days"] = bp.recency_window_days;
  if (bp.difficulty_band) {
    j["difficulty_band"] = {{"min", bp.difficulty_band->min}, {"max", bp.difficulty_band->max}};
  } else {
    j["difficulty_band"] = nullptr;
  }
  j["exam_date"] = bp.exam_date.to_string();
  return j;
}

Blueprint blueprint_from_json(const Json& j) {
  constexpr auto kCode = ErrorCode::kInvalidBlueprint;
  Blueprint bp;
  const Json& slots = field(j, "slots", kCode);
  if (!slots.is_array()) malformed(kCode, "\"slots\" must be an array");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Json& s = slots[i];
    if (s.is_string()) {
      bp.slots.push_back({static_cast<int>(i) + 1, s.get<std::string>()});
    } else {
      bp.slots.push_back({int_field(s, "slot_index", kCode), string_field(s, "subarea", kCode)});
    }
  }
  bp.target_points = int_field(j, "target_points", kCode);
  if (j.contains("recency_window_days")) {
    bp.recency_window_days = int_field(j, "recency_window_days", kCode);
  }
  if (auto it = j.find("difficulty_band"); it != j.end() && !it->is_null()) {
    bp.difficulty_band = DifficultyBand{number_field(*it, "min", kCode), number_field(*it, "max", kCode)};
  }
  try {
    bp.exam_date = Date::parse(string_field(j, "exam_date", kCode));
  } catch (const Error& e) {
    if (e.code() == kCode) throw;
    malformed(kCode, e.what());
  }
  return bp;
}

Json to_json(const DecisionVector& dv) {
  Json out = Json::array();
  for (const auto& e : dv.entries) {
    if (e.is_random()) {
      out.push_back("R");
    } else {
      out.push_back({{"M", *e.pinned}});
    }
  }
  return out;
}

DecisionVector decision_vector_from_json(const Json& j) {
  constexpr auto kCode = ErrorCode::kInvalidDecisionVector;
  if (!j.is_array()) malformed(kCode, "decision vector must be an array");
  DecisionVector dv;
  for (const auto& e : j) {
    if (e.is_string() && e.get<std::string>() == "R") {
      dv.entries.push_back(Decision::random());
    } else if (e.is_object() && e.size() == 1 && e.contains("M") && e["M"].is_string()) {
      dv.entries.push_back(Decision::manual(e["M"].get<std::string>()));
    } else {
      malformed(kCode, "decision entries must be \"R\" or {\"M\": \"<problem id>\"}, got " + e.dump());
    }
  }
  return dv;
}

Json to_json(const DraftMetrics& m) {
  Json j;
  j["total_points"] = m.total_points;
  j["weighted_difficulty"] = m.weighted_difficulty;
  j["solo_histogram"] = m.solo_histogram;
  j["ilo_coverage"] = m.ilo_coverage;
  return j;
}

DraftMetrics metrics_from_json(const Json& j) {
  constexpr auto kCode = ErrorCode::kTranscript;
  DraftMetrics m;
  m.total_points = int_field(j, "total_points", kCode);
  m.weighted_difficulty = number_field(j, "weighted_difficulty", kCode);
  const Json& hist = field(j, "solo_histogram", kCode);
  if (!hist.is_array() || hist.size() != 5) malformed(kCode, "solo_histogram must have 5 entries");
  for (std::size_t i = 0; i < 5; ++i) m.solo_histogram[i] = hist[i].get<int>();
  for (const auto& ilo : field(j, "ilo_coverage", kCode)) m.ilo_coverage.insert(ilo.get<std::string>());
  return m;
}

Json to_json(const ExamDraft& draft) {
  Json j;
  j["assignment"] = draft.assignment;
  j["metrics"] = to_json(draft.metrics);
  j["seed_used"] = seed_to_string(draft.seed_used);
  return j;
}

ExamDraft draft_from_json(const Json& j) {
  constexpr auto kCode = ErrorCode::kTranscript;
  ExamDraft d;
  for (const auto& id : field(j, "assignment", kCode)) d.assignment.push_back(id.get<std::string>());
  d.metrics = metrics_from_json(field(j, "metrics", kCode));
  d.seed_used = parse_seed(field(j, "seed_used", kCode));
  return d;
}

Json to_json(const FeasibilityReport& r) {
  Json j;
  j["feasible"] = r.feasible;
  j["verdict"] = verdict_name(r.verdict);
  j["reason"] = r.reason;
  j["completion_count"] = r.completion_count.str();
  j["target_points"] = r.target_points;
  j["pinned_points"] = r.pinned_points;
  j["remaining_points"] = r.remaining_points;
  if (r.achievable_point_range) {
    j["achievable_point_range"] = {{"min", r.achievable_point_range->min},
                                   {"max", r.achievable_point_range->max}};
  } else {
    j["achievable_point_range"] = nullptr;
  }
  j["per_slot_candidate_counts"] = r.per_slot_candidate_counts;
  j["restarts"] = r.restarts;
  if (r.observed_difficulty) {
    j["observed_difficulty"] = {{"min", r.observed_difficulty->min},
                                {"max", r.observed_difficulty->max}};
  } else {
    j["observed_difficulty"] = nullptr;
  }
  return j;
}

FeasibilityReport feasibility_from_json(const Json& j) {
  constexpr auto kCode = ErrorCode::kTranscript;
  FeasibilityReport r;
  r.feasible = field(j, "feasible", kCode).get<bool>();
  r.verdict = string_field(j, "verdict", kCode) == "probabilistic" ? Verdict::kProbabilistic
                                                                     : Verdict::kExact;
  r.reason = string_field(j, "reason", kCode);
  r.completion_count = BigCount(string_field(j, "completion_count", kCode));
  r.target_points = int_field(j, "target_points", kCode);
  r.pinned_points = int_field(j, "pinned_points", kCode);
  r.remaining_points = int_field(j, "remaining_points", kCode);
  if (const Json& range = field(j, "achievable_point_range", kCode); !range.is_null()) {
    r.achievable_point_range = PointRange{int_field(range, "min", kCode), int_field(range, "max", kCode)};
  }
  for (const auto& c : field(j, "per_slot_candidate_counts", kCode)) {
    r.per_slot_candidate_counts.push_back(c.get<int>());
  }
  r.restarts = int_field(j, "restarts", kCode);
  if (const Json& obs = field(j, "observed_difficulty", kCode); !obs.is_null()) {
    r.observed_difficulty = DifficultyRange{number_field(obs, "min", kCode), number_field(obs, "max", kCode)};
  }
  return r;
}

Json to_json(const ValidationReport& report) {
  auto issues = [](const std::vector<ValidationIssue>& list) {
    Json arr = Json::array();
    for (const auto& i : list) {
      Json o;
      o["problem_id"] = i.problem_id ? Json(*i.problem_id) : Json(nullptr);
      o["rule"] = i.rule;
      o["message"] = i.message;
      arr.push_back(std::move(o));
    }
    return arr;
  };
  Json j;
  j["ok"] = report.ok();
  j["errors"] = issues(report.errors);
  j["warnings"] = issues(report.warnings);
  return j;
}

Json problem_json(const Problem& p, const Bank* bank_for_bodies) {
  Json j;
  j["id"] = p.id;
  j["subarea"] = p.subarea;
  j["points"] = p.points;
  j["ilo_refs"] = p.ilo_refs;
  j["solo_level"] = p.solo_level;
  j["difficulty"] = p.difficulty;
  Json dates = Json::array();
  for (const auto& d : p.usage_dates) dates.push_back(d.to_string());
  j["usage_dates"] = std::move(dates);
  if (bank_for_bodies) {
    j["statement"] = read_fragment(*bank_for_bodies, p, false);
    j["solution"] = read_fragment(*bank_for_bodies, p, true);
  }
  return j;
}

}  // namespace examforge
