#include "capax/grid/protocol.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "capax/util/error.hpp"

namespace capax::grid::protocol {

namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void violation(const std::string& what) { throw Error(ErrorCode::ProtocolViolation, what); }

nlohmann::json parse_object(std::string_view line) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) violation("not a JSON object: " + std::string(line.substr(0, 120)));
  if (!j.contains("type") || !j["type"].is_string()) violation("message without a type");
  return j;
}

double real_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) violation(std::string("missing numeric field '") + key + "'");
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) violation(std::string("non-finite field '") + key + "'");
  return v;
}

long long int_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) violation(std::string("missing integer field '") + key + "'");
  return j[key].get<long long>();
}

std::string string_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) violation(std::string("missing string field '") + key + "'");
  return j[key].get<std::string>();
}

}  // namespace

Start make_start(const RunSpec& spec, std::string_view manifest_path) {
  return Start{spec.run_id,   std::string(model_name(spec.condition)), spec.condition.lr,
               spec.condition.reg, std::string(manifest_path), spec.condition.dataset_size,
               spec.fold,     spec.max_epochs, spec.seed};
}

std::string encode(const Start& s) {
  ojson j;
  j["type"] = "start";
  j["run_id"] = s.run_id;
  j["model"] = s.model;
  j["lr"] = s.lr;
  j["reg"] = s.reg;
  j["manifest"] = s.manifest;
  j["dataset_size"] = s.dataset_size;
  j["fold"] = s.fold;
  j["max_epochs"] = s.max_epochs;
  j["seed"] = s.seed;
  return j.dump();
}

std::string encode(Control control) {
  return control == Control::Continue ? R"({"type":"continue"})" : R"({"type":"stop"})";
}

std::string encode(const EpochReport& e) {
  ojson j;
  j["type"] = "epoch";
  j["epoch"] = e.epoch;
  j["train_loss"] = e.train_loss;
  j["val_loss"] = e.val_loss;
  j["val_dice"] = e.val_dice;
  return j.dump();
}

std::string encode(const FinalMetrics& f) {
  ojson j;
  j["type"] = "final";
  j["best_epoch"] = f.best_epoch;
  j["val_loss"] = f.val_loss;
  j["val_dice"] = f.val_dice;
  j["test_loss"] = f.test_loss;
  j["test_dice"] = f.test_dice;
  return j.dump();
}

std::string encode(const TrainerError& e) {
  ojson j;
  j["type"] = "error";
  j["message"] = e.message;
  return j.dump();
}

TrainerMessage decode_trainer(std::string_view line) {
  const auto j = parse_object(line);
  const auto type = j["type"].get<std::string>();
  if (type == "epoch") {
    EpochReport e;
    e.epoch = static_cast<int>(int_field(j, "epoch"));
    e.train_loss = real_field(j, "train_loss");
    e.val_loss = real_field(j, "val_loss");
    e.val_dice = real_field(j, "val_dice");
    if (e.epoch < 1) violation("epoch numbers start at 1");
    if (e.train_loss < 0.0 || e.val_loss < 0.0) violation("negative loss in epoch report");
    if (e.val_dice < 0.0 || e.val_dice > 1.0) violation("val_dice outside [0,1] in epoch report");
    return e;
  }
  if (type == "final") {
    FinalMetrics f;
    f.best_epoch = static_cast<int>(int_field(j, "best_epoch"));
    f.val_loss = real_field(j, "val_loss");
    f.val_dice = real_field(j, "val_dice");
    f.test_loss = real_field(j, "test_loss");
    f.test_dice = real_field(j, "test_dice");
    return f;
  }
  if (type == "error") return TrainerError{j.value("message", std::string("unspecified trainer error"))};
  violation("unexpected trainer message type '" + type + "'");
}

HarnessMessage decode_harness(std::string_view line) {
  const auto j = parse_object(line);
  const auto type = j["type"].get<std::string>();
  if (type == "continue") return Control::Continue;
  if (type == "stop") return Control::Stop;
  if (type != "start") violation("unexpected harness message type '" + type + "'");
  Start s;
  s.run_id = string_field(j, "run_id");
  s.model = string_field(j, "model");
  s.lr = real_field(j, "lr");
  s.reg = real_field(j, "reg");
  s.manifest = j.contains("manifest") && j["manifest"].is_string() ? j["manifest"].get<std::string>() : "";
  const auto dataset = int_field(j, "dataset_size");
  const auto fold = int_field(j, "fold");
  const auto max_epochs = int_field(j, "max_epochs");
  if (dataset <= 0 || fold < 0 || max_epochs < 1) violation("start message fields out of range");
  s.dataset_size = static_cast<std::size_t>(dataset);
  s.fold = static_cast<int>(fold);
  s.max_epochs = static_cast<int>(max_epochs);
  if (!j.contains("seed") || !j["seed"].is_number_unsigned()) violation("missing unsigned field 'seed'");
  s.seed = j["seed"].get<std::uint64_t>();
  return s;
}

}  // namespace capax::grid::protocol
