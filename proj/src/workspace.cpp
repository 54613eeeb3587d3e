#include "examforge/workspace.hpp"

#include <random>

#include "examforge/file_lock.hpp"

namespace examforge {

namespace fs = std::filesystem;

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

Workspace::Workspace(fs::path bank_dir)
    : bank_dir_(std::move(bank_dir)), store_(bank_dir_ / "sessions") {}

std::shared_ptr<const Bank> Workspace::bank() const {
  const fs::path manifest = bank_dir_ / kManifestName;
  std::error_code ec;
  const auto mtime = fs::last_write_time(manifest, ec);
  const auto size = ec ? 0 : fs::file_size(manifest, ec);
  std::lock_guard<std::mutex> guard(bank_mutex_);
  if (!cached_bank_ || ec || mtime != cached_mtime_ || size != cached_size_) {
    cached_bank_ = std::make_shared<const Bank>(load_bank(bank_dir_));
    cached_mtime_ = mtime;
    cached_size_ = size;
  }
  return cached_bank_;
}

Session Workspace::create_session(const Blueprint& blueprint,
                                  std::optional<std::uint64_t> base_seed, std::string id) {
  const auto bank_snapshot = bank();
  const std::uint64_t seed = base_seed ? *base_seed : entropy_seed();
  Session s = new_session(*bank_snapshot, blueprint, seed, id);
  if (id.empty()) {
    const std::string base = s.id;
    for (int n = 2; store_.exists(s.id); ++n) s.id = base + "-" + std::to_string(n);
  }
  store_.create(s);
  return s;
}

Session Workspace::run_step(const std::string& id, const DecisionBuilder& build) {
  const auto bank_snapshot = bank();
  return store_.update(id, [&](const Session& current) {
    return step(current, *bank_snapshot, build(current, *bank_snapshot));
  });
}

Session Workspace::run_step(const std::string& id, const DecisionVector& dv) {
  return run_step(id, [&](const Session&, const Bank&) { return dv; });
}

std::pair<Session, Bank> Workspace::accept(const std::string& id) {
  DirectoryLock bank_lock(bank_dir_);
  const Bank current = load_bank(bank_dir_);
  Bank updated;
  Session done = store_.update(id, [&](const Session& s) {
    auto [accepted, bank_after] = examforge::accept(s, current);
    save_bank(bank_after, bank_dir_, bank_lock);
    updated = std::move(bank_after);
    return accepted;
  });
  return {std::move(done), std::move(updated)};
}

Session Workspace::abandon(const std::string& id) {
  return store_.update(id, [](const Session& s) { return examforge::abandon(s); });
}

CourseMeta Workspace::course_meta(const Session& session) const {
  const fs::path path = bank_dir_ / "course.json";
  CourseMeta meta;
  if (fs::exists(path)) meta = load_course_meta(path);
  if (meta.course_title.empty()) meta.course_title = "Written Examination";
  if (meta.exam_date.empty()) meta.exam_date = session.blueprint.exam_date.to_string();
  return meta;
}

RenderedDoc Workspace::render(const std::string& id, DocKind kind) const {
  return render(store_.load(id), kind);
}

RenderedDoc Workspace::render(const Session& session, DocKind kind) const {
  const ExamDraft* draft = session.latest_draft();
  if (!draft) {
    throw Error(ErrorCode::kNoDraft,
                "session \"" + session.id + "\" has no successful draft to render");
  }
  return examforge::render(kind, *draft, *bank(), course_meta(session));
}

}  // namespace examforge
