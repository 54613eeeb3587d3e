#include "examforge/selector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace examforge {

namespace {

// Seed of the fixed stream used for witness search on large instances.
constexpr std::uint64_t kWitnessSeed = 0x5EEDF00DCAFEULL;

std::vector<const Problem*> eligible_pointers(const Bank& bank, const Blueprint& blueprint,
                                              const std::string& subarea,
                                              const std::set<std::string>& excluded) {
  std::vector<const Problem*> out;
  for (const auto& p : bank.problems) {
    if (p.subarea != subarea || excluded.count(p.id) || used_recently(p, blueprint)) continue;
    out.push_back(&p);
  }
  std::sort(out.begin(), out.end(),
            [](const Problem* a, const Problem* b) { return a->id < b->id; });
  return out;
}

bool all_distinct(std::vector<const Problem*> chosen) {
  std::sort(chosen.begin(), chosen.end());
  return std::adjacent_find(chosen.begin(), chosen.end()) == chosen.end();
}

}  // namespace

Blueprint Blueprint::from_subareas(const std::vector<std::string>& subareas, int target_points,
                                   const Date& exam_date) {
  Blueprint bp;
  for (std::size_t i = 0; i < subareas.size(); ++i) {
    bp.slots.push_back({static_cast<int>(i) + 1, subareas[i]});
  }
  bp.target_points = target_points;
  bp.exam_date = exam_date;
  return bp;
}

void validate_blueprint(const Blueprint& blueprint) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kInvalidBlueprint, what); };
  if (blueprint.slots.empty()) bad("blueprint has no slots");
  for (std::size_t i = 0; i < blueprint.slots.size(); ++i) {
    const auto& slot = blueprint.slots[i];
    if (slot.slot_index != static_cast<int>(i) + 1) {
      bad("slot indices must run 1..n without gaps (position " + std::to_string(i + 1) +
          " has index " + std::to_string(slot.slot_index) + ")");
    }
    if (slot.subarea.empty()) bad("slot " + std::to_string(i + 1) + " has no subarea");
  }
  if (blueprint.target_points <= 0) {
    bad("target_points must be positive, got " + std::to_string(blueprint.target_points));
  }
  if (blueprint.recency_window_days < 0) bad("recency_window_days must be non-negative");
  if (const auto& band = blueprint.difficulty_band) {
    if (!(band->min >= 0.0 && band->min <= band->max && band->max <= 1.0)) {
      std::ostringstream os;
      os << "difficulty band must satisfy 0 <= min <= max <= 1, got [" << band->min << ", "
         << band->max << "]";
      bad(os.str());
    }
  }
}

void validate_blueprint(const Blueprint& blueprint, const Bank& bank) {
  validate_blueprint(blueprint);
  for (const auto& slot : blueprint.slots) {
    if (!bank.has_subarea(slot.subarea)) {
      throw Error(ErrorCode::kUnknownSubarea, "slot " + std::to_string(slot.slot_index) +
                                                  ": unknown subarea \"" + slot.subarea + "\"");
    }
  }
}

std::string DecisionVector::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i) out += ' ';
    out += entries[i].is_random() ? std::string("R") : "M(" + *entries[i].pinned + ")";
  }
  return out + "]";
}

void validate_decision_vector(const Bank& bank, const Blueprint& blueprint,
                              const DecisionVector& dv) {
  auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidDecisionVector, what);
  };
  if (dv.size() != blueprint.slots.size()) {
    bad("decision vector has " + std::to_string(dv.size()) + " entries, blueprint has " +
        std::to_string(blueprint.slots.size()) + " slots");
  }
  std::set<std::string> pinned;
  for (std::size_t i = 0; i < dv.size(); ++i) {
    const auto& entry = dv.entries[i];
    if (entry.is_random()) continue;
    const std::string slot = "slot " + std::to_string(i + 1);
    const Problem* p = bank.find(*entry.pinned);
    if (!p) bad(slot + ": unknown problem \"" + *entry.pinned + "\"");
    if (p->subarea != blueprint.slots[i].subarea) {
      bad(slot + ": problem \"" + p->id + "\" belongs to subarea \"" + p->subarea +
          "\", slot requires \"" + blueprint.slots[i].subarea + "\"");
    }
    if (!pinned.insert(p->id).second) bad("problem \"" + p->id + "\" is pinned twice");
  }
}

bool used_recently(const Problem& problem, const Blueprint& blueprint) {
  if (blueprint.recency_window_days <= 0) return false;
  for (const auto& d : problem.usage_dates) {
    const long age = blueprint.exam_date.days_since(d);
    if (age >= 0 && age < blueprint.recency_window_days) return true;
  }
  return false;
}

std::vector<Problem> eligible_candidates(const Bank& bank, const Blueprint& blueprint,
                                         int slot_index, const std::set<std::string>& excluded) {
  if (slot_index < 1 || slot_index > static_cast<int>(blueprint.slots.size())) {
    throw Error(ErrorCode::kInvalidArgument, "no slot " + std::to_string(slot_index));
  }
  const auto& subarea = blueprint.slots[static_cast<std::size_t>(slot_index - 1)].subarea;
  std::vector<Problem> out;
  for (const Problem* p : eligible_pointers(bank, blueprint, subarea, excluded)) {
    out.push_back(*p);
  }
  return out;
}

DraftMetrics compute_metrics(const Bank& bank, const std::vector<std::string>& assignment) {
  DraftMetrics m;
  double weighted = 0.0;
  for (const auto& id : assignment) {
    const Problem& p = bank.at(id);
    m.total_points += p.points;
    weighted += static_cast<double>(p.points) * p.difficulty;
    if (p.solo_level >= 1 && p.solo_level <= 5) ++m.solo_histogram[p.solo_level - 1];
    m.ilo_coverage.insert(p.ilo_refs.begin(), p.ilo_refs.end());
  }
  m.weighted_difficulty = m.total_points > 0 ? weighted / m.total_points : 0.0;
  return m;
}

// ---------------------------------------------------------------------------

DraftSampler::DraftSampler(const Bank& bank, const Blueprint& blueprint,
                           const DecisionVector& dv)
    : bank_(&bank), blueprint_(blueprint), dv_(dv), counts_(0, 0) {
  require_valid(bank);
  validate_blueprint(blueprint, bank);
  validate_decision_vector(bank, blueprint, dv);

  std::set<std::string> pinned_ids;
  for (std::size_t i = 0; i < dv.size(); ++i) {
    if (dv.entries[i].is_random()) {
      random_slots_.push_back(i);
    } else {
      pinned_ids.insert(*dv.entries[i].pinned);
      pinned_points_ += bank.at(*dv.entries[i].pinned).points;
    }
  }
  remaining_points_ = blueprint.target_points - pinned_points_;
  pins_exceed_ = remaining_points_ < 0;

  std::vector<std::vector<int>> points;
  for (std::size_t slot : random_slots_) {
    candidates_.push_back(
        eligible_pointers(bank, blueprint, blueprint.slots[slot].subarea, pinned_ids));
    auto& pts = points.emplace_back();
    for (const Problem* p : candidates_.back()) pts.push_back(p->points);
  }
  if (!pins_exceed_) counts_ = count_completions(points, remaining_points_);
}

bool DraftSampler::draw_completion(Xoshiro256& rng, std::vector<const Problem*>& chosen) const {
  int budget = remaining_points_;
  for (std::size_t j = 0; j < candidates_.size(); ++j) {
    BigCount r = rng.uniform_below(counts_.at(j, budget));
    const Problem* pick = nullptr;
    for (const Problem* c : candidates_[j]) {
      if (c->points > budget) continue;
      const BigCount& weight = counts_.at(j + 1, budget - c->points);
      if (r < weight) {
        pick = c;
        break;
      }
      r -= weight;
    }
    chosen[j] = pick;
    budget -= pick->points;
  }
  return all_distinct(chosen);
}

ExamDraft DraftSampler::sample(std::uint64_t seed) const {
  if (pins_exceed_ || counts_.total().is_zero()) {
    fail_sampling(ErrorCode::kInfeasible, 0, std::nullopt);
  }

  Xoshiro256 rng(seed);
  std::vector<const Problem*> chosen(candidates_.size());
  int restarts = 0;
  int band_rejections = 0;
  std::optional<DifficultyRange> observed;

  for (;;) {
    if (!draw_completion(rng, chosen)) {
      if (++restarts > kMaxDuplicateRestarts) {
        fail_sampling(ErrorCode::kDegenerateDuplicates, restarts, observed);
      }
      continue;
    }

    ExamDraft draft;
    draft.seed_used = seed;
    draft.assignment.resize(dv_.size());
    for (std::size_t i = 0; i < dv_.size(); ++i) {
      if (!dv_.entries[i].is_random()) draft.assignment[i] = *dv_.entries[i].pinned;
    }
    for (std::size_t j = 0; j < random_slots_.size(); ++j) {
      draft.assignment[random_slots_[j]] = chosen[j]->id;
    }
    draft.metrics = compute_metrics(*bank_, draft.assignment);

    if (const auto& band = blueprint_.difficulty_band;
        band && !band->contains(draft.metrics.weighted_difficulty)) {
      const double d = draft.metrics.weighted_difficulty;
      if (!observed) {
        observed = DifficultyRange{d, d};
      } else {
        observed->min = std::min(observed->min, d);
        observed->max = std::max(observed->max, d);
      }
      if (++band_rejections >= kMaxBandRejections) {
        fail_sampling(ErrorCode::kBandInfeasible, restarts, observed);
      }
      continue;
    }
    return draft;
  }
}

bool DraftSampler::find_witness_exhaustive() const {
  std::vector<const Problem*> stack;
  stack.reserve(candidates_.size());
  auto dfs = [&](auto&& self, std::size_t j, int budget) -> bool {
    if (j == candidates_.size()) return budget == 0;
    for (const Problem* c : candidates_[j]) {
      if (c->points > budget || counts_.at(j + 1, budget - c->points).is_zero()) continue;
      if (std::find(stack.begin(), stack.end(), c) != stack.end()) continue;
      stack.push_back(c);
      if (self(self, j + 1, budget - c->points)) return true;
      stack.pop_back();
    }
    return false;
  };
  return dfs(dfs, 0, remaining_points_);
}

bool DraftSampler::find_witness_sampling() const {
  Xoshiro256 rng(kWitnessSeed);
  std::vector<const Problem*> chosen(candidates_.size());
  for (int i = 0; i < kWitnessSamples; ++i) {
    if (draw_completion(rng, chosen)) return true;
  }
  return false;
}

FeasibilityReport DraftSampler::base_report() const {
  FeasibilityReport r;
  r.target_points = blueprint_.target_points;
  r.pinned_points = pinned_points_;
  r.remaining_points = remaining_points_;
  r.completion_count = pins_exceed_ ? BigCount(0) : counts_.total();

  bool any_empty = false;
  PointRange range{pinned_points_, pinned_points_};
  std::size_t j = 0;
  for (std::size_t i = 0; i < dv_.size(); ++i) {
    if (!dv_.entries[i].is_random()) {
      r.per_slot_candidate_counts.push_back(1);
      continue;
    }
    const auto& cands = candidates_[j++];
    r.per_slot_candidate_counts.push_back(static_cast<int>(cands.size()));
    if (cands.empty()) {
      any_empty = true;
      continue;
    }
    const auto [lo, hi] = std::minmax_element(
        cands.begin(), cands.end(),
        [](const Problem* a, const Problem* b) { return a->points < b->points; });
    range.min += (*lo)->points;
    range.max += (*hi)->points;
  }
  if (!any_empty) r.achievable_point_range = range;
  return r;
}

FeasibilityReport DraftSampler::feasibility() const {
  FeasibilityReport r = base_report();
  if (pins_exceed_) {
    r.reason = "pins_exceed_target";
  } else if (!r.achievable_point_range) {
    r.reason = "empty_slot";
  } else if (r.completion_count.is_zero()) {
    r.reason = "no_exact_sum";
  } else if (r.completion_count < kExactFeasibilityLimit) {
    r.feasible = find_witness_exhaustive();
    r.reason = r.feasible ? "ok" : "duplicates_only";
  } else {
    r.feasible = find_witness_sampling();
    if (r.feasible) {
      r.reason = "ok";
    } else {
      r.verdict = Verdict::kProbabilistic;
      r.reason = "duplicates_only";
    }
  }
  return r;
}

void DraftSampler::fail_sampling(ErrorCode code, int restarts,
                                 std::optional<DifficultyRange> observed) const {
  FeasibilityReport r = feasibility();
  r.restarts = restarts;
  r.observed_difficulty = observed;
  std::ostringstream msg;
  if (code == ErrorCode::kDegenerateDuplicates && !r.feasible &&
      r.verdict == Verdict::kExact) {
    code = ErrorCode::kInfeasible;
  }
  switch (code) {
    case ErrorCode::kInfeasible:
      msg << "no duplicate-free selection reaches exactly " << r.target_points << " points";
      if (r.reason == "pins_exceed_target") {
        msg << ": pinned problems already total " << r.pinned_points << " points";
      } else if (r.reason == "empty_slot") {
        msg << ": some slot has no eligible candidate";
      } else if (r.achievable_point_range) {
        msg << " (achievable totals " << r.achievable_point_range->min << ".."
            << r.achievable_point_range->max << ")";
      }
      break;
    case ErrorCode::kDegenerateDuplicates:
      r.reason = "degenerate_duplicates";
      msg << "gave up after " << kMaxDuplicateRestarts
          << " restarts: almost every exact-sum selection repeats a problem";
      break;
    case ErrorCode::kBandInfeasible:
      r.reason = "band_infeasible";
      msg << "no draft within the difficulty band [" << blueprint_.difficulty_band->min << ", "
          << blueprint_.difficulty_band->max << "] after " << kMaxBandRejections << " draws";
      if (observed) msg << " (observed " << observed->min << ".." << observed->max << ")";
      break;
    default:
      break;
  }
  throw SelectionError(code, msg.str(), std::move(r));
}

ExamDraft sample_draft(const Bank& bank, const Blueprint& blueprint, const DecisionVector& dv,
                       std::uint64_t seed) {
  return DraftSampler(bank, blueprint, dv).sample(seed);
}

FeasibilityReport check_feasibility(const Bank& bank, const Blueprint& blueprint,
                                    const DecisionVector& dv) {
  return DraftSampler(bank, blueprint, dv).feasibility();
}

}  // namespace examforge
