#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capax/grid/channel.hpp"
#include "capax/grid/protocol.hpp"
#include "capax/synth/surface.hpp"

namespace capax::synth {

/// Everything one synthetic run would report, generated up front from the
/// run_id seed so any stopping point sees the same prefix.
struct SimulatedRun {
  std::vector<grid::EpochReport> epochs;  // max_epochs entries
  double test_dice = 0.0;
  double test_loss = 0.0;
  double mean = 0.0;

  /// Final message for a run stopped after `epochs_run` epochs: metrics at
  /// the first epoch holding the strict minimum val_loss.
  grid::FinalMetrics final_after(int epochs_run) const;
};

SimulatedRun simulate_run(const grid::protocol::Start& start, const ResponseSurface& surface);

/// Protocol state machine of the synthetic trainer. handle() consumes one
/// harness line and returns the lines to send back.
class TrainerSession {
 public:
  explicit TrainerSession(ResponseSurface surface) : surface_(surface) {}

  std::vector<std::string> handle(std::string_view line);

  /// True once the final (or an error) message has been produced.
  bool finished() const { return finished_; }

  /// True when the session ended with an error message.
  bool failed() const { return failed_; }

 private:
  ResponseSurface surface_;
  std::optional<SimulatedRun> run_;
  int epochs_sent_ = 0;
  bool finished_ = false;
  bool failed_ = false;
};

/// Factory for in-process synthetic trainers (no child processes).
grid::ChannelFactory loopback_factory(const ResponseSurface& surface);

}  // namespace capax::synth
