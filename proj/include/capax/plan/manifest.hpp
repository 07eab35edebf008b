#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "capax/plan/patient.hpp"
#include "capax/plan/splits.hpp"

namespace capax::plan {

inline constexpr const char* kManifestFormat = "capax-manifest/1";

nlohmann::ordered_json manifest_to_json(const DatasetPlan& plan);
DatasetPlan manifest_from_json(const nlohmann::json& doc);

/// Deterministic text: identical plans produce byte-identical files.
std::string render_manifest(const DatasetPlan& plan);
void write_manifest(const std::filesystem::path& path, const DatasetPlan& plan);
DatasetPlan read_manifest(const std::filesystem::path& path);

/// Patient inventory file: {"patients":[{"patient_id","slices","phases"[,"uri_root"]}]}.
std::vector<PatientRecord> read_inventory(const std::filesystem::path& path);

}  // namespace capax::plan
