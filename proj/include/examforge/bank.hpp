#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "examforge/date.hpp"

namespace examforge {

inline constexpr int kSchemaVersion = 1;

// One bank item. Fragments are LaTeX files addressed relative to the bank
// directory; their content is never parsed.
struct Problem {
  std::string id;
  std::string subarea;
  int points = 0;
  std::vector<std::string> ilo_refs;
  int solo_level = 0;       // 1 prestructural .. 5 extended abstract
  double difficulty = 0.0;  // index of difficulty, 0 easiest .. 1 hardest
  std::string statement_path;
  std::string solution_path;
  std::vector<Date> usage_dates;  // ascending

  std::optional<Date> last_used() const {
    if (usage_dates.empty()) return std::nullopt;
    return usage_dates.back();
  }

  bool operator==(const Problem&) const = default;
};

// Location of an unrecognized key found while loading, kept so that
// validation can report it as a warning.
struct UnknownKey {
  std::optional<std::string> problem_id;
  std::string key;

  bool operator==(const UnknownKey&) const = default;
};

// Immutable snapshot of a problem bank. Mutating operations return a new value.
struct Bank {
  int schema_version = kSchemaVersion;
  std::map<std::string, std::string> subareas;  // code -> title
  std::vector<Problem> problems;                // manifest order
  std::filesystem::path root;                   // directory fragments resolve against
  std::vector<UnknownKey> unknown_keys;

  // Id -> position in `problems`. Lookups verify the hit, so a stale index
  // only costs a linear scan.
  void rebuild_index();

  const Problem* find(const std::string& id) const;
  const Problem& at(const std::string& id) const;  // throws kUnknownProblem
  bool has_subarea(const std::string& code) const { return subareas.count(code) != 0; }

  bool operator==(const Bank& other) const {
    return schema_version == other.schema_version && subareas == other.subareas &&
           problems == other.problems;
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

struct ValidationIssue {
  std::optional<std::string> problem_id;
  std::string rule;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool ok() const { return errors.empty(); }
};

// Rule codes: points_positive, difficulty_range, solo_range, usage_dates_order,
// duplicate_id, empty_id, unknown_subarea, schema_version (errors) and
// unknown_key, no_ilo_refs (warnings).
ValidationReport validate_bank(const Bank& bank);

// Throws Error(kInvalidBank) listing the first few violations when the bank
// does not validate. Downstream operations call this before using a bank.
void require_valid(const Bank& bank);

struct ProblemFilter {
  std::optional<std::string> subarea;
  std::optional<int> min_points;
  std::optional<int> max_points;
  std::optional<std::string> ilo;
  std::optional<int> solo_level;
  // Keeps problems with no usage on or after this date.
  std::optional<Date> unused_since;
};

// Matching problems ordered by id. Unknown subarea -> Error(kUnknownSubarea).
std::vector<Problem> query_problems(const Bank& bank, const ProblemFilter& filter);

// Appends exam_date to each listed problem. The date must be strictly after
// every listed problem's last usage.
Bank record_usage(const Bank& bank, const std::vector<std::string>& problem_ids,
                  const Date& exam_date);

// --- persistence (bank.json + fragment files) ---

inline constexpr const char* kManifestName = "bank.json";

// Loads `<dir>/bank.json` (or the file itself when `path` names a file).
// Throws Error(kBankLoad) with the offending location for missing files,
// malformed JSON, missing keys, unsupported schema versions, duplicate ids and
// dangling fragment paths.
Bank load_bank(const std::filesystem::path& path);

// Like load_bank, but duplicate ids and dangling fragments are collected into
// `issues` (rules duplicate_id, dangling_fragment) instead of thrown. Still
// throws for documents that cannot be read at all.
Bank load_bank_collecting(const std::filesystem::path& path, ValidationReport& issues);

// Canonical manifest text: fixed key order, two-space indent, trailing newline.
std::string serialize_manifest(const Bank& bank);

// Short stable identifier of the bank content (hash of the canonical manifest).
std::string bank_fingerprint(const Bank& bank);

class DirectoryLock;

// Atomically replaces `<dir>/bank.json`. The overload without a lock acquires
// the bank directory lock itself.
void save_bank(const Bank& bank, const std::filesystem::path& dir);
void save_bank(const Bank& bank, const std::filesystem::path& dir, const DirectoryLock& held);

// Reads a fragment file; throws Error(kMissingFragment) naming the problem.
std::string read_fragment(const Bank& bank, const Problem& problem, bool solution);

}  // namespace examforge
