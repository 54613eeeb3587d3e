#pragma once

// Session transcripts: UTF-8, one JSON object per line, append-only.
//
//   {"record":"new","format":"examforge-transcript","version":1,"session_id":...,
//    "base_seed":"<u64>","bank_ref":...,"blueprint":{...}}
//   {"record":"step","step_number":n,"seed":"<u64>","decision_vector":[...],
//    "outcome":"ok","draft":{...}}
//   {"record":"step",...,"outcome":"<error code>","message":...,"feasibility":{...}}
//   {"record":"accept"} | {"record":"abandon"}
//
// The header plus the ordered decision vectors determine every draft; the
// recorded outcomes let a session reload without re-sampling.

#include <filesystem>
#include <functional>
#include <istream>
#include <string>
#include <vector>

#include "examforge/session.hpp"

namespace examforge {

inline constexpr int kTranscriptVersion = 1;

std::string header_record(const Session& session);
std::string step_record(const Step& step);
std::string status_record(SessionStatus status);

// Whole transcript text for a session.
std::string serialize_transcript(const Session& session);
// Parses and checks record order, step numbering and seed derivation.
// A final line without newline that fails to parse is treated as a torn
// write and ignored.
Session parse_transcript(std::string_view text);

// Directory of `<id>.jsonl` transcripts. Each file doubles as its own lock:
// readers take a shared flock, updates an exclusive one.
class TranscriptStore {
 public:
  explicit TranscriptStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(const std::string& id) const;
  bool exists(const std::string& id) const;
  std::vector<std::string> list() const;

  // Writes a new transcript; Error(kInvalidArgument) if the id is taken.
  void create(const Session& session);
  Session load(const std::string& id) const;

  // Read-modify-append under the session lock. `change` receives the current
  // state and returns the next one, which may only add steps or leave the
  // active status; the difference is appended as records.
  Session update(const std::string& id, const std::function<Session(const Session&)>& change);

 private:
  std::filesystem::path dir_;
};

}  // namespace examforge
