#include "capax/grid/channel.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "capax/util/error.hpp"

extern char** environ;

namespace capax::grid {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

SubprocessChannel::SubprocessChannel(const std::string& command) {
  // writes to a dead trainer must surface as EPIPE, not kill the harness
  static const bool sigpipe_ignored = [] { return std::signal(SIGPIPE, SIG_IGN) != SIG_ERR; }();
  (void)sigpipe_ignored;
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw Error(ErrorCode::Io, std::string("pipe: ") + std::strerror(errno));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error(ErrorCode::Io, std::string("pipe: ") + std::strerror(errno));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setpgroup(&attr, 0);
  sigset_t defaults;
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGPIPE);
  sigaddset(&defaults, SIGINT);
  posix_spawnattr_setsigdefault(&attr, &defaults);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGDEF);

  const std::string exec_cmd = "exec " + command;
  const char* argv[] = {"/bin/sh", "-c", exec_cmd.c_str(), nullptr};
  const int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, &attr, const_cast<char* const*>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    pid_ = -1;
    throw Error(ErrorCode::Io, "cannot spawn trainer '" + command + "': " + std::strerror(rc));
  }
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

SubprocessChannel::~SubprocessChannel() {
  close_stdin();
  if (pid_ > 0 && !reap(std::chrono::milliseconds(2000))) {
    ::kill(-pid_, SIGKILL);
    reap(std::chrono::milliseconds(-1));
  }
  close_fd(from_child_);
}

void SubprocessChannel::close_stdin() { close_fd(to_child_); }

bool SubprocessChannel::reap(std::chrono::milliseconds grace) {
  if (pid_ <= 0 || wait_status_) return true;
  const auto deadline = std::chrono::steady_clock::now() + grace;
  for (;;) {
    int status = 0;
    const pid_t r = ::waitpid(pid_, &status, grace.count() < 0 ? 0 : WNOHANG);
    if (r == pid_) {
      wait_status_ = status;
      return true;
    }
    if (r < 0 && errno != EINTR) return true;
    if (grace.count() >= 0 && std::chrono::steady_clock::now() >= deadline) return false;
    if (grace.count() >= 0) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
}

bool SubprocessChannel::send(std::string_view line) {
  if (to_child_ < 0) return false;
  std::string data(line);
  data += '\n';
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;  // EPIPE once SIGPIPE is ignored
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

Received SubprocessChannel::receive(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      Received r{Received::Kind::Line, buffer_.substr(0, nl)};
      if (!r.line.empty() && r.line.back() == '\r') r.line.pop_back();
      buffer_.erase(0, nl + 1);
      return r;
    }
    if (eof_) {
      if (!buffer_.empty()) {
        Received r{Received::Kind::Line, std::move(buffer_)};
        buffer_.clear();
        return r;
      }
      return {Received::Kind::Eof, {}};
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return {Received::Kind::Timeout, {}};
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1LL << 30)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      eof_ = true;
      continue;
    }
    if (rc == 0) return {Received::Kind::Timeout, {}};
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      eof_ = true;
    } else if (n == 0) {
      eof_ = true;
    } else {
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }
}

void SubprocessChannel::terminate() {
  close_stdin();
  if (pid_ > 0 && !wait_status_) {
    ::kill(-pid_, SIGKILL);
    reap(std::chrono::milliseconds(-1));
  }
}

std::string SubprocessChannel::describe_exit() {
  if (!wait_status_) reap(std::chrono::milliseconds(200));
  if (!wait_status_) return "trainer still running";
  const int st = *wait_status_;
  if (WIFEXITED(st)) return "trainer exited with status " + std::to_string(WEXITSTATUS(st));
  if (WIFSIGNALED(st)) return "trainer killed by signal " + std::to_string(WTERMSIG(st));
  return "trainer ended";
}

bool LoopbackChannel::send(std::string_view line) {
  for (auto& out : handler_(line)) pending_.push_back(std::move(out));
  return true;
}

Received LoopbackChannel::receive(std::chrono::milliseconds) {
  if (pending_.empty()) return {Received::Kind::Eof, {}};
  Received r{Received::Kind::Line, std::move(pending_.front())};
  pending_.pop_front();
  return r;
}

ChannelFactory subprocess_factory(std::string command) {
  return [command = std::move(command)]() -> std::unique_ptr<TrainerChannel> {
    return std::make_unique<SubprocessChannel>(command);
  };
}

}  // namespace capax::grid
