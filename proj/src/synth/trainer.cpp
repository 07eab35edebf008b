#include "capax/synth/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "capax/util/error.hpp"
#include "capax/util/hash.hpp"
#include "capax/util/rng.hpp"

namespace capax::synth {

namespace {

constexpr std::uint64_t kTrajectoryStream = 1;
constexpr std::uint64_t kOutcomeStream = 2;

}  // namespace

SimulatedRun simulate_run(const grid::protocol::Start& start, const ResponseSurface& surface) {
  const auto [family, size] = grid::parse_model(start.model);
  const grid::ExperimentCondition condition{family, size, start.dataset_size, start.lr, start.reg};

  SimulatedRun run;
  run.mean = surface_mean(condition, surface);

  const std::uint64_t base = fnv1a64(start.run_id);
  Rng traj(mix_seed(base, kTrajectoryStream));
  Rng outcome(mix_seed(base, kOutcomeStream));

  // Exponential decay toward a floor set by the expected quality; the noise
  // makes the plateau ragged so early stopping triggers at varied epochs.
  const double quality = std::clamp(run.mean, 0.02, 0.98);
  const double floor = 0.02 + 0.2 * (1.0 - quality);
  const double amplitude = 0.5 + 0.3 * traj.uniform();
  const double tau = 3.0 + 9.0 * traj.uniform();
  const double noise = 0.002 + 0.004 * traj.uniform();

  run.epochs.reserve(static_cast<std::size_t>(start.max_epochs));
  for (int e = 1; e <= start.max_epochs; ++e) {
    const double decay = std::exp(-(e - 1) / tau);
    const double val_loss = std::max(1e-4, floor + amplitude * decay + noise * traj.normal());
    const double train_loss = std::max(1e-4, 0.85 * val_loss + 0.5 * noise * traj.normal());
    const double val_dice = std::clamp(quality * (1.0 - 0.9 * decay) + 0.01 * traj.normal(), 0.0, 1.0);
    run.epochs.push_back({e, train_loss, val_loss, val_dice});
  }

  run.test_dice = run.mean + surface.sigma * outcome.normal();
  if (surface.clamp_mode == ClampMode::clamped) run.test_dice = std::clamp(run.test_dice, 0.0, 1.0);
  run.test_loss = floor * (1.0 + 0.1 * std::abs(outcome.normal()));
  return run;
}

grid::FinalMetrics SimulatedRun::final_after(int epochs_run) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < static_cast<std::size_t>(epochs_run); ++i)
    if (epochs[i].val_loss < epochs[best].val_loss) best = i;
  const auto& e = epochs[best];
  return grid::FinalMetrics{e.epoch, e.val_loss, e.val_dice, test_loss, test_dice};
}

std::vector<std::string> TrainerSession::handle(std::string_view line) {
  namespace proto = grid::protocol;
  if (finished_) return {};
  try {
    const auto msg = proto::decode_harness(line);
    if (const auto* start = std::get_if<proto::Start>(&msg)) {
      if (run_) throw Error(ErrorCode::ProtocolViolation, "second start message");
      run_ = simulate_run(*start, surface_);
      epochs_sent_ = 1;
      return {proto::encode(run_->epochs.front())};
    }
    if (!run_) throw Error(ErrorCode::ProtocolViolation, "control message before start");
    if (std::get<proto::Control>(msg) == proto::Control::Stop) {
      finished_ = true;
      return {proto::encode(run_->final_after(epochs_sent_))};
    }
    if (epochs_sent_ >= static_cast<int>(run_->epochs.size()))
      throw Error(ErrorCode::ProtocolViolation, "continue past max_epochs");
    return {proto::encode(run_->epochs[static_cast<std::size_t>(epochs_sent_++)])};
  } catch (const Error& e) {
    finished_ = true;
    failed_ = true;
    return {proto::encode(proto::TrainerError{e.what()})};
  }
}

grid::ChannelFactory loopback_factory(const ResponseSurface& surface) {
  return [surface]() -> std::unique_ptr<grid::TrainerChannel> {
    auto session = std::make_shared<TrainerSession>(surface);
    return std::make_unique<grid::LoopbackChannel>(
        [session](std::string_view line) { return session->handle(line); });
  };
}

}  // namespace capax::synth
