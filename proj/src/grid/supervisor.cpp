#include "capax/grid/supervisor.hpp"

#include <algorithm>

#include "capax/grid/early_stopping.hpp"
#include "capax/grid/protocol.hpp"
#include "capax/util/error.hpp"

namespace capax::grid {

namespace {

struct RunFailure {
  std::string diagnostic;
};

// Waits for one line, polling the cancel flag in short slices.
Received next_line(TrainerChannel& trainer, const SupervisorOptions& options) {
  using namespace std::chrono;
  const auto deadline = steady_clock::now() + options.epoch_timeout;
  for (;;) {
    if (options.cancel && options.cancel->load()) throw RunFailure{kCancelledDiagnostic};
    const auto left = duration_cast<milliseconds>(deadline - steady_clock::now());
    if (left.count() <= 0) return {Received::Kind::Timeout, {}};
    const auto slice = options.cancel ? std::min(left, milliseconds(200)) : left;
    auto r = trainer.receive(slice);
    if (r.kind != Received::Kind::Timeout) return r;
  }
}

protocol::TrainerMessage expect_message(TrainerChannel& trainer, const SupervisorOptions& options,
                                        std::string_view waiting_for) {
  const auto r = next_line(trainer, options);
  if (r.kind == Received::Kind::Timeout)
    throw RunFailure{"timed out after " + std::to_string(options.epoch_timeout.count()) + " ms waiting for " +
                     std::string(waiting_for)};
  if (r.kind == Received::Kind::Eof) {
    std::string why = trainer.describe_exit();
    throw RunFailure{"trainer closed its output while waiting for " + std::string(waiting_for) +
                     (why.empty() ? "" : " (" + why + ")")};
  }
  try {
    auto msg = protocol::decode_trainer(r.line);
    if (auto* err = std::get_if<protocol::TrainerError>(&msg)) throw RunFailure{"trainer error: " + err->message};
    return msg;
  } catch (const Error& e) {
    throw RunFailure{e.what()};
  }
}

}  // namespace

RunResult supervise_run(const RunSpec& spec, TrainerChannel& trainer, const SupervisorOptions& options) {
  RunResult result;
  result.run_id = spec.run_id;
  result.status = RunStatus::failed;

  try {
    if (!trainer.send(protocol::encode(protocol::make_start(spec, options.manifest_path))))
      throw RunFailure{"could not send start message (" + trainer.describe_exit() + ")"};

    EarlyStopping stopper(spec.max_epochs, spec.patience);
    while (!stopper.stopped()) {
      auto msg = expect_message(trainer, options, "epoch " + std::to_string(stopper.epochs_seen() + 1));
      auto* epoch = std::get_if<EpochReport>(&msg);
      if (!epoch) throw RunFailure{"final message before the harness sent stop"};
      if (epoch->epoch != stopper.epochs_seen() + 1)
        throw RunFailure{"expected epoch " + std::to_string(stopper.epochs_seen() + 1) + ", got " +
                         std::to_string(epoch->epoch)};
      result.epochs.push_back(*epoch);
      const auto reply = stopper.observe(epoch->val_loss);
      if (!trainer.send(protocol::encode(reply)))
        throw RunFailure{"trainer went away after epoch " + std::to_string(epoch->epoch)};
    }

    auto msg = expect_message(trainer, options, "final message");
    auto* final_metrics = std::get_if<FinalMetrics>(&msg);
    if (!final_metrics) throw RunFailure{"epoch message after stop"};
    if (final_metrics->best_epoch != stopper.best_epoch())
      throw RunFailure{"trainer reported best_epoch " + std::to_string(final_metrics->best_epoch) +
                       ", harness tracked " + std::to_string(stopper.best_epoch())};

    result.final_metrics = *final_metrics;
    result.status = stopper.stopped_early() ? RunStatus::stopped_early : RunStatus::completed;
  } catch (const RunFailure& failure) {
    trainer.terminate();
    result.status = RunStatus::failed;
    result.final_metrics.reset();
    result.diagnostic = failure.diagnostic;
  }
  return result;
}

}  // namespace capax::grid
