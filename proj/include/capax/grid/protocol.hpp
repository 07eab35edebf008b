#pragma once

// Trainer wire protocol: one JSON object per line over the trainer's stdio.
//
//   harness -> trainer  {"type":"start",...}
//   trainer -> harness  {"type":"epoch","epoch":n,"train_loss":..,"val_loss":..,"val_dice":..}
//   harness -> trainer  {"type":"continue"} | {"type":"stop"}
//   trainer -> harness  {"type":"final","best_epoch":n,"val_loss":..,"val_dice":..,"test_loss":..,"test_dice":..}
//
// A trainer may instead send {"type":"error","message":...} and exit.

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "capax/grid/types.hpp"

namespace capax::grid::protocol {

struct Start {
  std::string run_id;
  std::string model;
  double lr = 0.0;
  double reg = 0.0;
  std::string manifest;
  std::size_t dataset_size = 0;
  int fold = 0;
  int max_epochs = 50;
  std::uint64_t seed = 0;

  bool operator==(const Start&) const = default;
};

enum class Control { Continue, Stop };

struct TrainerError {
  std::string message;
};

using TrainerMessage = std::variant<EpochReport, FinalMetrics, TrainerError>;
using HarnessMessage = std::variant<Start, Control>;

Start make_start(const RunSpec& spec, std::string_view manifest_path);

std::string encode(const Start& start);
std::string encode(Control control);
std::string encode(const EpochReport& epoch);
std::string encode(const FinalMetrics& final_metrics);
std::string encode(const TrainerError& error);

/// Throws ProtocolViolation on malformed JSON, unknown type or bad fields.
TrainerMessage decode_trainer(std::string_view line);
HarnessMessage decode_harness(std::string_view line);

}  // namespace capax::grid::protocol
