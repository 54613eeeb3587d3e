#include "examforge/bank.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "examforge/error.hpp"

namespace examforge {

void Bank::rebuild_index() {
  index_.clear();
  index_.reserve(problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) index_.emplace(problems[i].id, i);
}

const Problem* Bank::find(const std::string& id) const {
  if (auto it = index_.find(id); it != index_.end() && it->second < problems.size() &&
                                 problems[it->second].id == id) {
    return &problems[it->second];
  }
  for (const auto& p : problems) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

const Problem& Bank::at(const std::string& id) const {
  if (const Problem* p = find(id)) return *p;
  throw Error(ErrorCode::kUnknownProblem, "unknown problem id '" + id + "'");
}

ValidationReport validate_bank(const Bank& bank) {
  ValidationReport report;
  auto error = [&](const Problem* p, std::string rule, std::string message) {
    report.errors.push_back({p ? std::optional(p->id) : std::nullopt, std::move(rule),
                             std::move(message)});
  };

  if (bank.schema_version != kSchemaVersion) {
    error(nullptr, "schema_version",
          "unsupported schema_version " + std::to_string(bank.schema_version));
  }

  std::set<std::string> seen;
  for (const auto& p : bank.problems) {
    if (p.id.empty()) error(&p, "empty_id", "problem id is empty");
    if (!seen.insert(p.id).second) error(&p, "duplicate_id", "duplicate id \"" + p.id + "\"");
    if (!bank.has_subarea(p.subarea)) {
      error(&p, "unknown_subarea", "subarea \"" + p.subarea + "\" is not registered");
    }
    if (p.points < 1) {
      error(&p, "points_positive", "points must be >= 1, got " + std::to_string(p.points));
    }
    if (!(p.difficulty >= 0.0 && p.difficulty <= 1.0)) {
      std::ostringstream os;
      os << "difficulty must lie in [0, 1], got " << p.difficulty;
      error(&p, "difficulty_range", os.str());
    }
    if (p.solo_level < 1 || p.solo_level > 5) {
      error(&p, "solo_range",
            "solo_level must lie in 1..5, got " + std::to_string(p.solo_level));
    }
    for (std::size_t i = 1; i < p.usage_dates.size(); ++i) {
      if (!(p.usage_dates[i - 1] < p.usage_dates[i])) {
        error(&p, "usage_dates_order",
              "usage_dates must be strictly ascending (" + p.usage_dates[i - 1].to_string() +
                  " then " + p.usage_dates[i].to_string() + ")");
        break;
      }
    }
    if (p.ilo_refs.empty()) {
      report.warnings.push_back({p.id, "no_ilo_refs", "problem is not linked to any ILO"});
    }
  }

  for (const auto& k : bank.unknown_keys) {
    report.warnings.push_back(
        {k.problem_id, "unknown_key", "unknown key \"" + k.key + "\" ignored"});
  }
  return report;
}

void require_valid(const Bank& bank) {
  const auto report = validate_bank(bank);
  if (report.ok()) return;
  std::string message = "bank has " + std::to_string(report.errors.size()) + " validation error(s)";
  const std::size_t shown = std::min<std::size_t>(report.errors.size(), 3);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& e = report.errors[i];
    message += "; " + (e.problem_id ? *e.problem_id + ": " : std::string()) + e.message;
  }
  throw Error(ErrorCode::kInvalidBank, message);
}

std::vector<Problem> query_problems(const Bank& bank, const ProblemFilter& filter) {
  if (filter.subarea && !bank.has_subarea(*filter.subarea)) {
    throw Error(ErrorCode::kUnknownSubarea, "unknown subarea \"" + *filter.subarea + "\"");
  }
  std::vector<Problem> out;
  for (const auto& p : bank.problems) {
    if (filter.subarea && p.subarea != *filter.subarea) continue;
    if (filter.min_points && p.points < *filter.min_points) continue;
    if (filter.max_points && p.points > *filter.max_points) continue;
    if (filter.solo_level && p.solo_level != *filter.solo_level) continue;
    if (filter.ilo &&
        std::find(p.ilo_refs.begin(), p.ilo_refs.end(), *filter.ilo) == p.ilo_refs.end()) {
      continue;
    }
    if (filter.unused_since) {
      const auto last = p.last_used();
      if (last && *last >= *filter.unused_since) continue;
    }
    out.push_back(p);
  }
  std::sort(out.begin(), out.end(),
            [](const Problem& a, const Problem& b) { return a.id < b.id; });
  return out;
}

Bank record_usage(const Bank& bank, const std::vector<std::string>& problem_ids,
                  const Date& exam_date) {
  std::set<std::string> ids;
  for (const auto& id : problem_ids) {
    const Problem& p = bank.at(id);
    if (!ids.insert(id).second) {
      throw Error(ErrorCode::kInvalidArgument, "problem id \"" + id + "\" listed twice");
    }
    if (auto last = p.last_used(); last && !(*last < exam_date)) {
      throw Error(ErrorCode::kNonMonotoneDate,
                  "exam date " + exam_date.to_string() + " is not after the last usage " +
                      last->to_string() + " of \"" + id + "\"");
    }
  }
  Bank updated = bank;
  for (auto& p : updated.problems) {
    if (ids.count(p.id)) p.usage_dates.push_back(exam_date);
  }
  updated.rebuild_index();
  return updated;
}

}  // namespace examforge
