#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "examforge/bank.hpp"
#include "examforge/date.hpp"
#include "examforge/error.hpp"
#include "examforge/rng.hpp"

namespace examforge {

inline constexpr int kDefaultRecencyWindowDays = 730;
inline constexpr int kMaxDuplicateRestarts = 10'000;
inline constexpr int kMaxBandRejections = 10'000;
// Below this many completions (duplicates permitted) feasibility is decided
// by exhaustive witness search; above it by bounded sampling.
inline constexpr std::uint64_t kExactFeasibilityLimit = 1'000'000;
inline constexpr int kWitnessSamples = 10'000;

struct Slot {
  int slot_index = 0;  // 1-based
  std::string subarea;

  bool operator==(const Slot&) const = default;
};

struct DifficultyBand {
  double min = 0.0;
  double max = 1.0;

  bool contains(double d) const { return d >= min && d <= max; }
  bool operator==(const DifficultyBand&) const = default;
};

struct Blueprint {
  std::vector<Slot> slots;
  int target_points = 0;
  int recency_window_days = kDefaultRecencyWindowDays;
  std::optional<DifficultyBand> difficulty_band;
  Date exam_date;

  // Slots 1..n bound to the given subarea codes in order.
  static Blueprint from_subareas(const std::vector<std::string>& subareas, int target_points,
                                 const Date& exam_date);

  bool operator==(const Blueprint&) const = default;
};

// Structural checks; throws Error(kInvalidBlueprint).
void validate_blueprint(const Blueprint& blueprint);
// Structural checks plus every slot subarea registered in the bank
// (Error(kUnknownSubarea) otherwise).
void validate_blueprint(const Blueprint& blueprint, const Bank& bank);

// One decision-vector entry: random (R) or a teacher pin (M).
struct Decision {
  std::optional<std::string> pinned;

  static Decision random() { return {}; }
  static Decision manual(std::string id) { return {std::move(id)}; }
  bool is_random() const { return !pinned.has_value(); }

  bool operator==(const Decision&) const = default;
};

struct DecisionVector {
  std::vector<Decision> entries;

  static DecisionVector all_random(std::size_t slots) {
    return {std::vector<Decision>(slots, Decision::random())};
  }
  std::size_t size() const { return entries.size(); }
  // Compact form, e.g. "[R M(P7) R]".
  std::string to_string() const;

  bool operator==(const DecisionVector&) const = default;
};

// Throws Error(kInvalidDecisionVector) on length mismatch, unknown problem,
// subarea mismatch or a problem pinned twice.
void validate_decision_vector(const Bank& bank, const Blueprint& blueprint,
                              const DecisionVector& dv);

struct DraftMetrics {
  int total_points = 0;
  double weighted_difficulty = 0.0;  // sum(points * difficulty) / sum(points)
  std::array<int, 5> solo_histogram{};  // index 0 = SOLO level 1
  std::set<std::string> ilo_coverage;

  bool operator==(const DraftMetrics&) const = default;
};

struct ExamDraft {
  std::vector<std::string> assignment;  // one problem id per slot
  DraftMetrics metrics;
  std::uint64_t seed_used = 0;

  bool operator==(const ExamDraft&) const = default;
};

struct PointRange {
  int min = 0;
  int max = 0;

  bool operator==(const PointRange&) const = default;
};

struct DifficultyRange {
  double min = 0.0;
  double max = 0.0;

  bool operator==(const DifficultyRange&) const = default;
};

enum class Verdict { kExact, kProbabilistic };

struct FeasibilityReport {
  bool feasible = false;
  Verdict verdict = Verdict::kExact;
  // ok | pins_exceed_target | empty_slot | no_exact_sum | duplicates_only |
  // degenerate_duplicates | band_infeasible
  std::string reason;
  BigCount completion_count = 0;  // duplicates permitted
  int target_points = 0;
  int pinned_points = 0;
  int remaining_points = 0;
  // Totals reachable ignoring duplicates and exactness (pins included);
  // empty when some random slot has no candidate.
  std::optional<PointRange> achievable_point_range;
  std::vector<int> per_slot_candidate_counts;  // pinned slots count 1
  // Filled when sampling gave up.
  int restarts = 0;
  std::optional<DifficultyRange> observed_difficulty;

  bool operator==(const FeasibilityReport&) const = default;
};

// Raised by sample_draft when no draft can be produced; carries diagnostics.
class SelectionError : public Error {
 public:
  SelectionError(ErrorCode code, const std::string& message, FeasibilityReport report)
      : Error(code, message), report_(std::move(report)) {}

  const FeasibilityReport& report() const { return report_; }

 private:
  FeasibilityReport report_;
};

// True when the problem has a usage date d with 0 <= exam_date - d < window.
bool used_recently(const Problem& problem, const Blueprint& blueprint);

// Problems of the slot's subarea, minus excluded ids, minus recently used
// ones; sorted by id.
std::vector<Problem> eligible_candidates(const Bank& bank, const Blueprint& blueprint,
                                         int slot_index, const std::set<std::string>& excluded);

// N[j][p]: number of ordered ways to fill random slots j..k-1 with exactly p
// points, each slot drawing from its own candidate list. Duplicates across
// slots are permitted. N[k][0] = 1.
class CountTable {
 public:
  CountTable(std::size_t slots, int remaining_points);

  const BigCount& at(std::size_t slot, int points) const {
    return cells_[slot * stride_ + static_cast<std::size_t>(points)];
  }
  BigCount& at(std::size_t slot, int points) {
    return cells_[slot * stride_ + static_cast<std::size_t>(points)];
  }
  const BigCount& total() const { return at(0, remaining_); }
  std::size_t slots() const { return slots_; }
  int remaining_points() const { return remaining_; }

 private:
  std::size_t slots_;
  int remaining_;
  std::size_t stride_;
  std::vector<BigCount> cells_;
};

// Throws Error(kPinsExceedTarget) when remaining_points < 0.
CountTable count_completions(const std::vector<std::vector<int>>& candidate_points,
                             int remaining_points);

DraftMetrics compute_metrics(const Bank& bank, const std::vector<std::string>& assignment);

// Sampling plan for one (bank, blueprint, decision vector): candidates and
// count table are built once, so repeated draws are cheap. The bank must
// outlive the sampler.
class DraftSampler {
 public:
  DraftSampler(const Bank& bank, const Blueprint& blueprint, const DecisionVector& dv);

  // Uniform over duplicate-free completions (and, with a band, over those
  // whose weighted difficulty lies in the band). Deterministic in `seed`.
  // Throws SelectionError.
  ExamDraft sample(std::uint64_t seed) const;

  FeasibilityReport feasibility() const;

  const CountTable& counts() const { return counts_; }
  const std::vector<std::vector<const Problem*>>& random_slot_candidates() const {
    return candidates_;
  }

 private:
  bool draw_completion(Xoshiro256& rng, std::vector<const Problem*>& chosen) const;
  bool find_witness_exhaustive() const;
  bool find_witness_sampling() const;
  FeasibilityReport base_report() const;
  [[noreturn]] void fail_sampling(ErrorCode code, int restarts,
                                  std::optional<DifficultyRange> observed) const;

  const Bank* bank_;
  Blueprint blueprint_;
  DecisionVector dv_;
  std::vector<std::size_t> random_slots_;  // 0-based slot positions of R entries
  std::vector<std::vector<const Problem*>> candidates_;  // per random slot, id order
  int pinned_points_ = 0;
  int remaining_points_ = 0;
  bool pins_exceed_ = false;
  CountTable counts_;
};

ExamDraft sample_draft(const Bank& bank, const Blueprint& blueprint, const DecisionVector& dv,
                       std::uint64_t seed);

FeasibilityReport check_feasibility(const Bank& bank, const Blueprint& blueprint,
                                    const DecisionVector& dv);

}  // namespace examforge
