#include "examforge/file_lock.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "examforge/error.hpp"

namespace examforge {

FileLock::FileLock(const std::filesystem::path& lock_file, Mode mode) : path_(lock_file) {
  fd_ = ::open(lock_file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error(ErrorCode::kIo,
                "cannot open lock file " + lock_file.string() + ": " + std::strerror(errno));
  }
  const int op = mode == Mode::kExclusive ? LOCK_EX : LOCK_SH;
  while (::flock(fd_, op) != 0) {
    if (errno == EINTR) continue;
    const int err = errno;
    ::close(fd_);
    throw Error(ErrorCode::kBankLocked,
                "cannot lock " + lock_file.string() + ": " + std::strerror(err));
  }
}

FileLock::FileLock(FileLock&& other) noexcept : path_(std::move(other.path_)), fd_(other.fd_) {
  other.fd_ = -1;
}

FileLock::~FileLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

DirectoryLock::DirectoryLock(const std::filesystem::path& dir)
    : dir_(dir), lock_(dir / ".bank.lock") {}

}  // namespace examforge
