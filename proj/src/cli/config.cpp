#include "capax/cli/config.hpp"

#include <fstream>

#include "capax/grid/types.hpp"
#include "capax/util/error.hpp"

namespace capax::cli {

using nlohmann::json;

plan::PlanOptions StudyConfig::plan_options() const {
  plan::PlanOptions o;
  o.sizes = grid.dataset_sizes;
  o.dev_fraction = dev_fraction;
  o.images_per_patient = images_per_patient;
  o.k_folds = k_folds;
  o.fold_mode = fold_mode;
  o.seed = plan_seed;
  return o;
}

synth::ResponseSurface StudyConfig::surface() const {
  return synth::ResponseSurface::reference(synthetic_sigma, synthetic_mode);
}

namespace {

bool has_type(const json& v, std::string_view type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  return false;
}

void check(const json& v, const json& schema, const std::string& where, std::vector<std::string>& out) {
  auto fail = [&](const std::string& what) { out.push_back((where.empty() ? "/" : where) + ": " + what); };

  if (auto it = schema.find("type"); it != schema.end() && !has_type(v, it->get<std::string>())) {
    fail("expected " + it->get<std::string>());
    return;
  }
  if (auto it = schema.find("enum"); it != schema.end()) {
    bool found = false;
    for (const auto& option : *it) found = found || option == v;
    if (!found) fail("value " + v.dump() + " not in " + it->dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (auto it = schema.find("minimum"); it != schema.end() && x < it->get<double>())
      fail("below minimum " + it->dump());
    if (auto it = schema.find("exclusiveMinimum"); it != schema.end() && x <= it->get<double>())
      fail("must exceed " + it->dump());
    if (auto it = schema.find("exclusiveMaximum"); it != schema.end() && x >= it->get<double>())
      fail("must be below " + it->dump());
  }
  if (v.is_string()) {
    if (auto it = schema.find("minLength"); it != schema.end() && v.get<std::string>().size() < it->get<std::size_t>())
      fail("shorter than " + it->dump());
  }
  if (v.is_array()) {
    if (auto it = schema.find("minItems"); it != schema.end() && v.size() < it->get<std::size_t>())
      fail("fewer than " + it->dump() + " items");
    if (auto it = schema.find("items"); it != schema.end())
      for (std::size_t i = 0; i < v.size(); ++i) check(v[i], *it, where + "/" + std::to_string(i), out);
  }
  if (v.is_object()) {
    const auto props = schema.find("properties");
    const auto extra = schema.find("additionalProperties");
    for (const auto& [key, value] : v.items()) {
      if (props != schema.end() && props->contains(key)) {
        check(value, (*props)[key], where + "/" + key, out);
      } else if (extra != schema.end() && extra->is_boolean() && !extra->get<bool>()) {
        out.push_back(where + "/" + key + ": unknown property");
      }
    }
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

}  // namespace

std::vector<std::string> schema_violations(const json& doc, const json& schema) {
  std::vector<std::string> out;
  check(doc, schema, "", out);
  return out;
}

StudyConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  static const json schema = json::parse(study_config_schema());
  if (auto problems = schema_violations(doc, schema); !problems.empty()) {
    std::string what = "config does not match schema";
    for (const auto& p : problems) what += "\n  " + p;
    invalid(what);
  }

  StudyConfig c;
  if (doc.contains("manifest")) c.manifest = resolve(base_dir, doc["manifest"]);
  if (doc.contains("inventory")) c.inventory = resolve(base_dir, doc["inventory"]);
  if (doc.contains("registry")) c.registry = resolve(base_dir, doc["registry"]);
  if (doc.contains("out")) c.out = resolve(base_dir, doc["out"]);
  if (!doc.contains("manifest") && !base_dir.empty()) c.manifest = base_dir / c.manifest;
  if (!doc.contains("registry") && !base_dir.empty()) c.registry = base_dir / c.registry;
  if (!doc.contains("out") && !base_dir.empty()) c.out = base_dir / c.out;
  c.synthetic_patients = doc.value("synthetic_patients", c.synthetic_patients);
  c.trainer = doc.value("trainer", c.trainer);
  c.parallelism = doc.value("parallelism", c.parallelism);

  if (auto s = doc.find("seeds"); s != doc.end()) {
    c.plan_seed = s->value("plan", c.plan_seed);
    c.run_seed = s->value("run", c.run_seed);
  }
  if (auto p = doc.find("plan"); p != doc.end()) {
    c.dev_fraction = p->value("dev_fraction", c.dev_fraction);
    c.images_per_patient = p->value("images_per_patient", c.images_per_patient);
    c.k_folds = p->value("k_folds", c.k_folds);
    if (p->contains("fold_mode")) c.fold_mode = plan::fold_mode_from_string((*p)["fold_mode"].get<std::string>());
  }
  if (auto g = doc.find("grid"); g != doc.end()) {
    if (g->contains("models")) c.grid.models = (*g)["models"].get<std::vector<std::string>>();
    if (g->contains("dataset_sizes")) c.grid.dataset_sizes = (*g)["dataset_sizes"].get<std::vector<std::size_t>>();
    if (g->contains("lrs")) c.grid.lrs = (*g)["lrs"].get<std::vector<double>>();
    if (g->contains("regs")) c.grid.regs = (*g)["regs"].get<std::vector<double>>();
  }
  if (auto t = doc.find("training"); t != doc.end()) {
    c.max_epochs = t->value("max_epochs", c.max_epochs);
    c.patience = t->value("patience", c.patience);
    if (t->contains("epoch_timeout_s"))
      c.epoch_timeout = std::chrono::milliseconds(static_cast<long long>((*t)["epoch_timeout_s"].get<double>() * 1000));
  }
  if (auto s = doc.find("synthetic"); s != doc.end()) {
    c.synthetic_sigma = s->value("sigma", c.synthetic_sigma);
    if (s->contains("mode"))
      c.synthetic_mode = (*s)["mode"] == "clamped" ? synth::ClampMode::clamped : synth::ClampMode::raw;
  }
  if (auto a = doc.find("analysis"); a != doc.end()) {
    if (a->contains("response")) c.response = metrics::metric_from_string((*a)["response"].get<std::string>());
    c.confidence = a->value("confidence", c.confidence);
  }
  return c;
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    invalid("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

StudyConfig resolve_config(const Overrides& o, const char* env_trainer) {
  StudyConfig c = o.config ? load_config(*o.config) : StudyConfig{};
  if (env_trainer != nullptr && *env_trainer != '\0') c.trainer = env_trainer;
  if (o.sizes) {
    if (o.sizes->empty()) invalid("--sizes needs at least one size");
    c.grid.dataset_sizes = *o.sizes;
  }
  if (o.seed) c.plan_seed = c.run_seed = *o.seed;
  if (o.parallelism) {
    if (*o.parallelism == 0) invalid("--parallelism must be at least 1");
    c.parallelism = *o.parallelism;
  }
  if (o.response) {
    try {
      c.response = metrics::metric_from_string(*o.response);
    } catch (const Error&) {
      invalid("unknown response '" + *o.response + "'");
    }
  }
  if (o.trainer) c.trainer = *o.trainer;
  if (o.registry) c.registry = *o.registry;
  if (o.out) c.out = *o.out;
  if (o.manifest) c.manifest = *o.manifest;
  if (o.max_runs) c.max_runs = *o.max_runs;
  if (c.trainer.empty()) invalid("trainer command is empty");
  for (const auto& m : c.grid.models) grid::parse_model(m);
  return c;
}

}  // namespace capax::cli
