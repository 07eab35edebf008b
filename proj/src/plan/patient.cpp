#include "capax/plan/patient.hpp"

#include <cstdio>

#include "capax/util/error.hpp"
#include "capax/util/rng.hpp"

namespace capax::plan {

namespace {

std::string image_uri(std::string_view root, const std::string& id, int slice, int phase) {
  char tail[48];
  std::snprintf(tail, sizeof tail, "/s%02d_p%02d.f32", slice, phase);
  std::string uri(root);
  uri += id;
  uri += tail;
  return uri;
}

}  // namespace

PatientRecord make_patient(std::string patient_id, int slices, int phases,
                           std::string_view uri_root) {
  if (slices <= 0 || phases <= 0)
    throw Error(ErrorCode::InvalidArgument, "patient " + patient_id + " needs positive slices and phases");
  PatientRecord p{std::move(patient_id), slices, phases, {}};
  p.image_refs.reserve(p.total_images());
  for (int s = 0; s < slices; ++s)
    for (int ph = 0; ph < phases; ++ph)
      p.image_refs.push_back({p.patient_id, s, ph, image_uri(uri_root, p.patient_id, s, ph)});
  return p;
}

void validate(const PatientRecord& patient) {
  if (patient.slices <= 0 || patient.phases <= 0)
    throw Error(ErrorCode::InvalidArgument, "patient " + patient.patient_id + ": non-positive dimensions");
  if (patient.image_refs.size() != patient.total_images())
    throw Error(ErrorCode::InvalidArgument, "patient " + patient.patient_id + ": image_refs length != slices*phases");
  for (std::size_t n = 0; n < patient.image_refs.size(); ++n) {
    const auto& ref = patient.image_refs[n];
    const auto s = static_cast<int>(n / static_cast<std::size_t>(patient.phases));
    const auto ph = static_cast<int>(n % static_cast<std::size_t>(patient.phases));
    if (ref.patient_id != patient.patient_id || ref.slice_index != s || ref.phase_index != ph)
      throw Error(ErrorCode::InvalidArgument,
                  "patient " + patient.patient_id + ": image_refs not slice-major at position " + std::to_string(n));
  }
}

std::vector<std::size_t> stratified_positions(std::size_t total, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "stratified_positions: k must be positive");
  if (total < k)
    throw Error(ErrorCode::InsufficientImages,
                std::to_string(total) + " images available, " + std::to_string(k) + " requested");
  std::vector<std::size_t> out;
  out.reserve(k);
  // i * total / k is at least 1 for i >= 1 because total >= k.
  for (std::size_t i = 1; i <= k; ++i) out.push_back(i * total / k - 1);
  return out;
}

std::vector<ImageRef> stratified_select(const PatientRecord& patient, std::size_t k) {
  const auto positions = stratified_positions(patient.total_images(), k);
  std::vector<ImageRef> out;
  out.reserve(k);
  for (auto pos : positions) out.push_back(patient.image_refs.at(pos));
  return out;
}

std::vector<PatientRecord> synthetic_inventory(std::size_t count, std::uint64_t seed, int min_slices,
                                               int max_slices, int min_phases, int max_phases) {
  if (min_slices <= 0 || min_phases <= 0 || max_slices < min_slices || max_phases < min_phases)
    throw Error(ErrorCode::InvalidArgument, "synthetic_inventory: bad slice/phase ranges");
  Rng rng(mix_seed(seed, 0x1a7e));
  std::vector<PatientRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int slices = min_slices + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_slices - min_slices + 1)));
    const int phases = min_phases + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_phases - min_phases + 1)));
    char id[24];
    std::snprintf(id, sizeof id, "P%03zu", i + 1);
    out.push_back(make_patient(id, slices, phases));
  }
  return out;
}

}  // namespace capax::plan
