#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <sys/types.h>

namespace capax::grid {

struct Received {
  enum class Kind { Line, Eof, Timeout };
  Kind kind = Kind::Eof;
  std::string line;
};

/// Bidirectional line transport to one trainer.
class TrainerChannel {
 public:
  virtual ~TrainerChannel() = default;

  /// Sends one line (newline appended). Returns false if the peer is gone.
  virtual bool send(std::string_view line) = 0;

  virtual Received receive(std::chrono::milliseconds timeout) = 0;

  /// Ends the peer immediately; used after a failure.
  virtual void terminate() {}

  /// Human-readable end state of the peer, e.g. an exit status.
  virtual std::string describe_exit() { return {}; }
};

using ChannelFactory = std::function<std::unique_ptr<TrainerChannel>()>;

/// Trainer child process started through /bin/sh -c, speaking over its
/// stdin/stdout pipes. The child gets its own process group so terminal
/// interrupts reach only the harness.
class SubprocessChannel final : public TrainerChannel {
 public:
  /// Throws Error(Io) when the process cannot be spawned.
  explicit SubprocessChannel(const std::string& command);
  ~SubprocessChannel() override;

  SubprocessChannel(const SubprocessChannel&) = delete;
  SubprocessChannel& operator=(const SubprocessChannel&) = delete;

  bool send(std::string_view line) override;
  Received receive(std::chrono::milliseconds timeout) override;
  void terminate() override;
  std::string describe_exit() override;

 private:
  void close_stdin();
  bool reap(std::chrono::milliseconds grace);

  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  bool eof_ = false;
  std::optional<int> wait_status_;
};

/// In-process peer driven by a message handler; each inbound line yields zero
/// or more outbound lines.
class LoopbackChannel final : public TrainerChannel {
 public:
  using Handler = std::function<std::vector<std::string>(std::string_view)>;

  explicit LoopbackChannel(Handler handler) : handler_(std::move(handler)) {}

  bool send(std::string_view line) override;
  Received receive(std::chrono::milliseconds timeout) override;

 private:
  Handler handler_;
  std::deque<std::string> pending_;
};

ChannelFactory subprocess_factory(std::string command);

}  // namespace capax::grid
