#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "examforge/bank.hpp"
#include "examforge/composer.hpp"
#include "examforge/session.hpp"
#include "examforge/transcript.hpp"

namespace examforge {

// A bank directory together with its session transcripts (`<bank>/sessions`)
// and optional course metadata (`<bank>/course.json`). Both the CLI and the
// HTTP service drive the alignment loop through this class, so the two
// produce identical transcripts and documents.
//
// Lock order: bank directory lock, then session lock.
class Workspace {
 public:
  explicit Workspace(std::filesystem::path bank_dir);

  const std::filesystem::path& bank_dir() const { return bank_dir_; }
  TranscriptStore& sessions() { return store_; }
  const TranscriptStore& sessions() const { return store_; }

  // Current bank snapshot; reloaded when the manifest changes on disk.
  std::shared_ptr<const Bank> bank() const;

  // A missing seed is drawn from OS entropy. A missing id is derived from the
  // seed; a numeric suffix resolves collisions.
  Session create_session(const Blueprint& blueprint, std::optional<std::uint64_t> base_seed,
                         std::string id = {});
  Session load_session(const std::string& id) const { return store_.load(id); }

  // Builds the decision vector from the locked current state, then steps.
  using DecisionBuilder = std::function<DecisionVector(const Session&, const Bank&)>;
  Session run_step(const std::string& id, const DecisionBuilder& build);
  Session run_step(const std::string& id, const DecisionVector& dv);

  // Records usage of the latest draft in the bank and marks the session
  // accepted. Returns the session and the saved bank.
  std::pair<Session, Bank> accept(const std::string& id);
  Session abandon(const std::string& id);

  // `<bank>/course.json` when present, defaults otherwise; the exam date
  // falls back to the blueprint's.
  CourseMeta course_meta(const Session& session) const;

  // Renders the latest successful draft. Error(kNoDraft) when there is none.
  RenderedDoc render(const std::string& id, DocKind kind) const;
  RenderedDoc render(const Session& session, DocKind kind) const;

 private:
  std::filesystem::path bank_dir_;
  TranscriptStore store_;

  mutable std::mutex bank_mutex_;
  mutable std::shared_ptr<const Bank> cached_bank_;
  mutable std::filesystem::file_time_type cached_mtime_{};
  mutable std::uintmax_t cached_size_ = 0;
};

std::uint64_t entropy_seed();

}  // namespace examforge
