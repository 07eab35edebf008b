#include "capax/grid/condition.hpp"

#include <cmath>

#include "capax/util/error.hpp"
#include "capax/util/hash.hpp"

namespace capax::grid {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::EfficientNet: return "EfficientNet";
    case Family::ResNet: return "ResNet";
    case Family::VGG: return "VGG";
  }
  return "EfficientNet";
}

std::string_view to_string(ModelSize size) { return size == ModelSize::Long ? "long" : "short"; }

Family family_from_string(std::string_view text) {
  if (text == "EfficientNet") return Family::EfficientNet;
  if (text == "ResNet") return Family::ResNet;
  if (text == "VGG") return Family::VGG;
  throw Error(ErrorCode::UnknownLevel, "unknown family '" + std::string(text) + "'");
}

ModelSize model_size_from_string(std::string_view text) {
  if (text == "long") return ModelSize::Long;
  if (text == "short") return ModelSize::Short;
  throw Error(ErrorCode::UnknownLevel, "unknown model size '" + std::string(text) + "'");
}

std::string_view model_name(Family family, ModelSize size) {
  const bool deep = size == ModelSize::Long;
  switch (family) {
    case Family::EfficientNet: return deep ? "B5" : "B0";
    case Family::ResNet: return deep ? "R50" : "R18";
    case Family::VGG: return deep ? "V19" : "V16";
  }
  return "B5";
}

std::string_view model_name(const ExperimentCondition& c) { return model_name(c.family, c.size); }

std::pair<Family, ModelSize> parse_model(std::string_view name) {
  for (auto f : {Family::EfficientNet, Family::ResNet, Family::VGG})
    for (auto s : {ModelSize::Long, ModelSize::Short})
      if (model_name(f, s) == name) return {f, s};
  throw Error(ErrorCode::UnknownLevel, "unknown model '" + std::string(name) + "'");
}

std::size_t dev_images(const ExperimentCondition& c, double dev_fraction) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(c.dataset_size) * dev_fraction));
}

std::string make_run_id(const ExperimentCondition& c, int fold, std::uint64_t seed) {
  std::string key = "model=";
  key += model_name(c);
  key += ";dataset=" + std::to_string(c.dataset_size);
  key += ";lr=" + format_double(c.lr);
  key += ";reg=" + format_double(c.reg);
  key += ";fold=" + std::to_string(fold);
  key += ";seed=" + std::to_string(seed);
  return to_hex16(fnv1a64(key));
}

RunSpec make_run_spec(const ExperimentCondition& c, int fold, std::uint64_t seed, int max_epochs, int patience) {
  return RunSpec{make_run_id(c, fold, seed), c, fold, max_epochs, patience, seed};
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::failed: return "failed";
    case RunStatus::stopped_early: return "stopped_early";
  }
  return "failed";
}

RunStatus run_status_from_string(std::string_view text) {
  if (text == "completed") return RunStatus::completed;
  if (text == "failed") return RunStatus::failed;
  if (text == "stopped_early") return RunStatus::stopped_early;
  throw Error(ErrorCode::InvalidArgument, "unknown run status '" + std::string(text) + "'");
}

std::vector<ExperimentCondition> expand_grid(const GridConfig& config) {
  if (config.models.empty()) throw Error(ErrorCode::EmptyFactor, "no models configured");
  if (config.dataset_sizes.empty()) throw Error(ErrorCode::EmptyFactor, "no dataset sizes configured");
  if (config.lrs.empty()) throw Error(ErrorCode::EmptyFactor, "no learning rates configured");
  if (config.regs.empty()) throw Error(ErrorCode::EmptyFactor, "no regularization values configured");

  std::vector<ExperimentCondition> out;
  out.reserve(config.models.size() * config.dataset_sizes.size() * config.lrs.size() * config.regs.size());
  for (const auto& model : config.models) {
    const auto [family, size] = parse_model(model);
    for (auto dataset : config.dataset_sizes)
      for (double lr : config.lrs)
        for (double reg : config.regs) out.push_back({family, size, dataset, lr, reg});
  }
  return out;
}

}  // namespace capax::grid
