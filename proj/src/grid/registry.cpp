#include "capax/grid/registry.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "capax/util/error.hpp"

namespace capax::grid {

std::string encode_record(const RunRecord& record) {
  const auto& s = record.spec;
  const auto& r = record.result;
  nlohmann::ordered_json j;
  j["run_id"] = s.run_id;
  j["model"] = std::string(model_name(s.condition));
  j["family"] = std::string(to_string(s.condition.family));
  j["ls"] = std::string(to_string(s.condition.size));
  j["dataset_size"] = s.condition.dataset_size;
  j["lr"] = s.condition.lr;
  j["reg"] = s.condition.reg;
  j["fold"] = s.fold;
  j["seed"] = s.seed;
  j["max_epochs"] = s.max_epochs;
  j["patience"] = s.patience;
  j["status"] = std::string(to_string(r.status));
  if (r.final_metrics) {
    const auto& f = *r.final_metrics;
    j["best_epoch"] = f.best_epoch;
    j["val_loss"] = f.val_loss;
    j["val_dice"] = f.val_dice;
    j["test_loss"] = f.test_loss;
    j["test_dice"] = f.test_dice;
  }
  auto epochs = nlohmann::ordered_json::array();
  for (const auto& e : r.epochs)
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss},
                      {"val_dice", e.val_dice}});
  j["epochs"] = std::move(epochs);
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  return j.dump();
}

RunRecord decode_record(std::string_view line) {
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw RegistryCorrupt(0, "not a JSON object");
  try {
    RunRecord rec;
    auto& s = rec.spec;
    auto& r = rec.result;
    const auto [family, size] = parse_model(j.at("model").get<std::string>());
    s.condition.family = family;
    s.condition.size = size;
    s.condition.dataset_size = j.at("dataset_size").get<std::size_t>();
    s.condition.lr = j.at("lr").get<double>();
    s.condition.reg = j.at("reg").get<double>();
    s.fold = j.at("fold").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.max_epochs = j.at("max_epochs").get<int>();
    s.patience = j.at("patience").get<int>();
    s.run_id = j.at("run_id").get<std::string>();
    if (s.run_id != make_run_id(s.condition, s.fold, s.seed))
      throw RegistryCorrupt(0, "run_id " + s.run_id + " does not match its condition");
    r.run_id = s.run_id;
    r.status = run_status_from_string(j.at("status").get<std::string>());
    for (const auto& e : j.at("epochs"))
      r.epochs.push_back({e.at("epoch").get<int>(), e.at("train_loss").get<double>(), e.at("val_loss").get<double>(),
                          e.at("val_dice").get<double>()});
    if (r.status != RunStatus::failed) {
      FinalMetrics f;
      f.best_epoch = j.at("best_epoch").get<int>();
      f.val_loss = j.at("val_loss").get<double>();
      f.val_dice = j.at("val_dice").get<double>();
      f.test_loss = j.at("test_loss").get<double>();
      f.test_dice = j.at("test_dice").get<double>();
      r.final_metrics = f;
    } else if (j.contains("test_dice")) {
      throw RegistryCorrupt(0, "failed run carries test metrics");
    }
    r.diagnostic = j.value("diagnostic", std::string{});
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw RegistryCorrupt(0, e.what());
  } catch (const RegistryCorrupt&) {
    throw;
  } catch (const Error& e) {
    throw RegistryCorrupt(0, e.what());
  }
}

RunRegistry RunRegistry::parse(std::istream& in) {
  RunRegistry reg;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      reg.apply(decode_record(line));
    } catch (const RegistryCorrupt& e) {
      throw RegistryCorrupt(number, e.detail());
    }
  }
  return reg;
}

RunRegistry RunRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    if (!std::filesystem::exists(path)) return {};
    throw Error(ErrorCode::Io, "cannot read registry " + path.string());
  }
  return parse(in);
}

void RunRegistry::apply(RunRecord record) {
  if (record.result.finished()) {
    if (finished_.count(record.spec.run_id))
      throw RegistryCorrupt(0, "second finished record for run " + record.spec.run_id);
    finished_.emplace(record.spec.run_id, log_.size());
  }
  log_.push_back(std::move(record));
}

std::vector<RunRecord> RunRegistry::finished_records() const {
  std::vector<RunRecord> out;
  out.reserve(finished_.size());
  for (const auto& [id, index] : finished_) out.push_back(log_[index]);
  return out;
}

std::size_t RunRegistry::failed_count() const {
  std::size_t n = 0;
  for (const auto& r : log_) n += r.result.status == RunStatus::failed;
  return n;
}

std::string RunRegistry::serialize() const {
  std::string out;
  for (const auto& r : log_) {
    out += encode_record(r);
    out += '\n';
  }
  return out;
}

RegistryWriter::RegistryWriter(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app);
  if (!out_) throw Error(ErrorCode::Io, "cannot open registry " + path.string() + " for append");
}

void RegistryWriter::append(const RunRecord& record) {
  const std::string line = encode_record(record) + "\n";
  std::lock_guard lock(mutex_);
  out_ << line;
  out_.flush();
  if (!out_) throw Error(ErrorCode::Io, "write to registry " + path_.string() + " failed");
}

}  // namespace capax::grid
