#include "capax/plan/manifest.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "capax/util/error.hpp"

namespace capax::plan {

namespace {

using ojson = nlohmann::ordered_json;

ojson ref_to_json(const ImageRef& r) {
  ojson j;
  j["patient_id"] = r.patient_id;
  j["slice"] = r.slice_index;
  j["phase"] = r.phase_index;
  j["uri"] = r.source_uri;
  return j;
}

ImageRef ref_from_json(const nlohmann::json& j) {
  return ImageRef{j.at("patient_id").get<std::string>(), j.at("slice").get<int>(), j.at("phase").get<int>(),
                  j.at("uri").get<std::string>()};
}

ojson pool_to_json(const std::vector<PoolEntry>& pool) {
  ojson arr = ojson::array();
  for (const auto& e : pool) {
    ojson j;
    j["patient_id"] = e.patient_id;
    j["slices"] = e.slices;
    j["phases"] = e.phases;
    ojson sel = ojson::array();
    for (const auto& r : e.selected) sel.push_back(ref_to_json(r));
    j["selected"] = std::move(sel);
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<PoolEntry> pool_from_json(const nlohmann::json& arr) {
  std::vector<PoolEntry> pool;
  for (const auto& j : arr) {
    PoolEntry e{j.at("patient_id").get<std::string>(), j.at("slices").get<int>(), j.at("phases").get<int>(), {}};
    for (const auto& r : j.at("selected")) e.selected.push_back(ref_from_json(r));
    pool.push_back(std::move(e));
  }
  return pool;
}

}  // namespace

nlohmann::ordered_json manifest_to_json(const DatasetPlan& plan) {
  ojson doc;
  doc["format"] = kManifestFormat;
  doc["seed"] = plan.seed;
  doc["dev_fraction"] = plan.dev_fraction;
  doc["images_per_patient"] = plan.images_per_patient;
  doc["k_folds"] = plan.k_folds;
  doc["dev_pool"] = pool_to_json(plan.dev_pool);
  doc["test_pool"] = pool_to_json(plan.test_pool);
  ojson datasets = ojson::array();
  for (const auto& a : plan.sizes) {
    ojson d;
    d["dataset_size"] = a.dataset_size;
    d["fold_mode"] = std::string(to_string(a.fold_mode));
    ojson dev = ojson::array();
    for (std::size_t i = 0; i < a.dev.size(); ++i) {
      ojson r = ref_to_json(a.dev[i]);
      r["fold"] = a.dev_folds.at(i);
      dev.push_back(std::move(r));
    }
    ojson test = ojson::array();
    for (const auto& r : a.test) test.push_back(ref_to_json(r));
    d["dev"] = std::move(dev);
    d["test"] = std::move(test);
    datasets.push_back(std::move(d));
  }
  doc["datasets"] = std::move(datasets);
  return doc;
}

DatasetPlan manifest_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kManifestFormat)
      throw Error(ErrorCode::InvalidArgument, "unsupported manifest format");
    DatasetPlan plan;
    plan.seed = doc.at("seed").get<std::uint64_t>();
    plan.dev_fraction = doc.at("dev_fraction").get<double>();
    plan.images_per_patient = doc.at("images_per_patient").get<std::size_t>();
    plan.k_folds = doc.at("k_folds").get<int>();
    plan.dev_pool = pool_from_json(doc.at("dev_pool"));
    plan.test_pool = pool_from_json(doc.at("test_pool"));
    for (const auto& d : doc.at("datasets")) {
      SizeAssignment a;
      a.dataset_size = d.at("dataset_size").get<std::size_t>();
      a.fold_mode = fold_mode_from_string(d.at("fold_mode").get<std::string>());
      for (const auto& r : d.at("dev")) {
        a.dev.push_back(ref_from_json(r));
        a.dev_folds.push_back(r.at("fold").get<int>());
      }
      for (const auto& r : d.at("test")) a.test.push_back(ref_from_json(r));
      plan.sizes.push_back(std::move(a));
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed manifest: ") + e.what());
  }
}

std::string render_manifest(const DatasetPlan& plan) { return manifest_to_json(plan).dump(1) + "\n"; }

void write_manifest(const std::filesystem::path& path, const DatasetPlan& plan) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write manifest " + path.string());
  out << render_manifest(plan);
}

DatasetPlan read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read manifest " + path.string());
  const auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::InvalidArgument, "manifest " + path.string() + " is not JSON");
  return manifest_from_json(doc);
}

std::vector<PatientRecord> read_inventory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read inventory " + path.string());
  const auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.contains("patients"))
    throw Error(ErrorCode::InvalidArgument, "inventory " + path.string() + " needs a \"patients\" array");
  std::vector<PatientRecord> out;
  try {
    for (const auto& p : doc.at("patients"))
      out.push_back(make_patient(p.at("patient_id").get<std::string>(), p.at("slices").get<int>(),
                                 p.at("phases").get<int>(), p.value("uri_root", std::string{})));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed inventory: ") + e.what());
  }
  return out;
}

}  // namespace capax::plan
