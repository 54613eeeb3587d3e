#include "examforge/transcript.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "examforge/file_lock.hpp"
#include "examforge/json_io.hpp"

namespace examforge {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "examforge-transcript";

[[noreturn]] void bad_transcript(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kTranscript, "transcript line " + std::to_string(line) + ": " + what);
}

void check_id(const std::string& id) {
  const bool ok = !id.empty() && id.size() <= 128 && id.front() != '.' &&
                  std::all_of(id.begin(), id.end(), [](unsigned char c) {
                    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
                  });
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "invalid session id \"" + id + "\"");
}

void write_all(const fs::path& path, const std::string& text, int flags) {
  const int fd = ::open(path.c_str(), flags | O_WRONLY | O_CLOEXEC, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw Error(ErrorCode::kInvalidArgument, "transcript already exists: " + path.string());
    }
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  std::size_t done = 0;
  while (done < text.size()) {
    const ssize_t n = ::write(fd, text.data() + done, text.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw Error(ErrorCode::kIo, "write failed for " + path.string());
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kSessionNotFound, "no session transcript at " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string header_record(const Session& s) {
  Json j;
  j["record"] = "new";
  j["format"] = kFormat;
  j["version"] = kTranscriptVersion;
  j["session_id"] = s.id;
  j["base_seed"] = seed_to_string(s.base_seed);
  j["bank_ref"] = s.bank_ref;
  j["blueprint"] = to_json(s.blueprint);
  return j.dump() + "\n";
}

std::string step_record(const Step& st) {
  Json j;
  j["record"] = "step";
  j["step_number"] = st.step_number;
  j["seed"] = seed_to_string(st.seed);
  j["decision_vector"] = to_json(st.decision_vector);
  if (st.draft) {
    j["outcome"] = "ok";
    j["draft"] = to_json(*st.draft);
  } else {
    j["outcome"] = st.failure_code;
    j["message"] = st.failure_message;
    j["feasibility"] = st.failure ? to_json(*st.failure) : Json(nullptr);
  }
  return j.dump() + "\n";
}

std::string status_record(SessionStatus status) {
  Json j;
  j["record"] = status == SessionStatus::kAccepted ? "accept" : "abandon";
  return j.dump() + "\n";
}

std::string serialize_transcript(const Session& session) {
  std::string out = header_record(session);
  for (const auto& st : session.steps) out += step_record(st);
  if (session.status != SessionStatus::kActive) out += status_record(session.status);
  return out;
}

Session parse_transcript(std::string_view text) {
  Session s;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const bool complete = nl != std::string_view::npos;
    const std::string_view line = text.substr(pos, complete ? nl - pos : text.size() - pos);
    pos = complete ? nl + 1 : text.size();
    ++line_no;
    if (line.empty()) continue;

    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      if (!complete) break;  // torn final write
      bad_transcript(line_no, std::string("malformed record: ") + e.what());
    }

    try {
      const std::string kind = j.at("record").get<std::string>();
      if (!have_header) {
        if (kind != "new") bad_transcript(line_no, "first record must be \"new\"");
        if (j.at("format").get<std::string>() != kFormat) bad_transcript(line_no, "not a transcript");
        if (j.at("version").get<int>() != kTranscriptVersion) {
          bad_transcript(line_no, "unsupported transcript version");
        }
        s.id = j.at("session_id").get<std::string>();
        s.base_seed = parse_seed(j.at("base_seed"));
        s.bank_ref = j.at("bank_ref").get<std::string>();
        s.blueprint = blueprint_from_json(j.at("blueprint"));
        have_header = true;
        continue;
      }
      if (s.status != SessionStatus::kActive) {
        bad_transcript(line_no, "record after terminal " + std::string(status_name(s.status)));
      }
      if (kind == "step") {
        Step st;
        st.step_number = j.at("step_number").get<int>();
        if (st.step_number != static_cast<int>(s.steps.size()) + 1) {
          bad_transcript(line_no, "step numbers must increase by one");
        }
        st.seed = parse_seed(j.at("seed"));
        if (st.seed != step_seed(s.base_seed, st.step_number)) {
          bad_transcript(line_no, "step seed does not match the base seed");
        }
        st.decision_vector = decision_vector_from_json(j.at("decision_vector"));
        const std::string outcome = j.at("outcome").get<std::string>();
        if (outcome == "ok") {
          st.draft = draft_from_json(j.at("draft"));
        } else {
          st.failure_code = outcome;
          st.failure_message = j.value("message", "");
          if (const auto& f = j.at("feasibility"); !f.is_null()) st.failure = feasibility_from_json(f);
        }
        s.steps.push_back(std::move(st));
      } else if (kind == "accept") {
        s.status = SessionStatus::kAccepted;
      } else if (kind == "abandon") {
        s.status = SessionStatus::kAbandoned;
      } else {
        bad_transcript(line_no, "unknown record \"" + kind + "\"");
      }
    } catch (const Json::exception& e) {
      bad_transcript(line_no, e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kTranscript) throw;
      bad_transcript(line_no, e.what());
    }
  }
  if (!have_header) throw Error(ErrorCode::kTranscript, "empty transcript");
  return s;
}

TranscriptStore::TranscriptStore(fs::path dir) : dir_(std::move(dir)) {}

fs::path TranscriptStore::path_for(const std::string& id) const {
  check_id(id);
  return dir_ / (id + ".jsonl");
}

bool TranscriptStore::exists(const std::string& id) const { return fs::exists(path_for(id)); }

std::vector<std::string> TranscriptStore::list() const {
  std::vector<std::string> ids;
  if (!fs::is_directory(dir_)) return ids;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void TranscriptStore::create(const Session& session) {
  fs::create_directories(dir_);
  write_all(path_for(session.id), header_record(session) + [&] {
    std::string rest;
    for (const auto& st : session.steps) rest += step_record(st);
    if (session.status != SessionStatus::kActive) rest += status_record(session.status);
    return rest;
  }(), O_CREAT | O_EXCL);
}

Session TranscriptStore::load(const std::string& id) const {
  const fs::path path = path_for(id);
  if (!fs::exists(path)) throw Error(ErrorCode::kSessionNotFound, "no session \"" + id + "\"");
  FileLock lock(path, FileLock::Mode::kShared);
  return parse_transcript(read_all(path));
}

Session TranscriptStore::update(const std::string& id,
                                const std::function<Session(const Session&)>& change) {
  const fs::path path = path_for(id);
  if (!fs::exists(path)) throw Error(ErrorCode::kSessionNotFound, "no session \"" + id + "\"");
  FileLock lock(path, FileLock::Mode::kExclusive);
  const Session current = parse_transcript(read_all(path));
  Session next = change(current);

  const bool prefix_kept =
      next.id == current.id && next.base_seed == current.base_seed &&
      next.blueprint == current.blueprint && next.steps.size() >= current.steps.size() &&
      std::equal(current.steps.begin(), current.steps.end(), next.steps.begin());
  if (!prefix_kept) {
    throw Error(ErrorCode::kTranscript, "session update would rewrite history");
  }
  if (next.status != current.status && current.status != SessionStatus::kActive) {
    throw Error(ErrorCode::kTerminalState, "session \"" + id + "\" is already terminal");
  }

  std::string records;
  for (std::size_t i = current.steps.size(); i < next.steps.size(); ++i) {
    records += step_record(next.steps[i]);
  }
  if (next.status != current.status) records += status_record(next.status);
  if (!records.empty()) write_all(path, records, O_APPEND);
  return next;
}

}  // namespace examforge
