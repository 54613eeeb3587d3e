#pragma once

#include <filesystem>

namespace examforge {

// Exclusive advisory lock (flock) on a lock file. Works across processes and
// across threads of one process, since every instance opens its own file
// description.
class FileLock {
 public:
  enum class Mode { kShared, kExclusive };

  explicit FileLock(const std::filesystem::path& lock_file, Mode mode = Mode::kExclusive);
  ~FileLock();

  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;
  FileLock(FileLock&& other) noexcept;
  FileLock& operator=(FileLock&&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

// Lock guarding a bank directory; held for every manifest write.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  FileLock lock_;
};

}  // namespace examforge
