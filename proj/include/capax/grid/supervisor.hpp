#pragma once

#include <atomic>
#include <chrono>
#include <string>

#include "capax/grid/channel.hpp"
#include "capax/grid/types.hpp"

namespace capax::grid {

inline constexpr const char* kCancelledDiagnostic = "cancelled";

struct SupervisorOptions {
  std::string manifest_path;
  std::chrono::milliseconds epoch_timeout{std::chrono::hours(1)};
  /// Checked between reads; when set the run ends as failed/"cancelled".
  const std::atomic<bool>* cancel = nullptr;
};

/// Drives one run over the trainer protocol. The harness decides when to
/// stop (see EarlyStopping) and takes final metrics from the trainer's
/// closing message, which must name the same best epoch. Protocol errors,
/// trainer exits and timeouts yield a failed result with a diagnostic.
RunResult supervise_run(const RunSpec& spec, TrainerChannel& trainer, const SupervisorOptions& options = {});

}  // namespace capax::grid
