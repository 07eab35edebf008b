#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace capax::plan {

struct ImageRef {
  std::string patient_id;
  int slice_index = 0;
  int phase_index = 0;
  std::string source_uri;

  auto operator<=>(const ImageRef&) const = default;
  bool operator==(const ImageRef&) const = default;
};

/// A patient's cine stack. image_refs is slice-major, phase-minor.
struct PatientRecord {
  std::string patient_id;
  int slices = 0;
  int phases = 0;
  std::vector<ImageRef> image_refs;

  std::size_t total_images() const {
    return static_cast<std::size_t>(slices) * static_cast<std::size_t>(phases);
  }
};

/// Builds a record with refs `<uri_root><id>/s<slice>_p<phase>.f32`.
PatientRecord make_patient(std::string patient_id, int slices, int phases,
                           std::string_view uri_root = {});

/// Checks the slice-major ordering and count invariants; throws InvalidArgument.
void validate(const PatientRecord& patient);

/// 0-based linear positions floor(i * total / k) - 1 for i = 1..k.
std::vector<std::size_t> stratified_positions(std::size_t total, std::size_t k = 100);

/// Selects k images spread evenly over the slice-major stack.
/// Throws InsufficientImages when the stack holds fewer than k images.
std::vector<ImageRef> stratified_select(const PatientRecord& patient, std::size_t k = 100);

/// Seeded inventory of `count` patients with slice/phase counts drawn from
/// the given inclusive ranges.
std::vector<PatientRecord> synthetic_inventory(std::size_t count, std::uint64_t seed,
                                               int min_slices = 8, int max_slices = 24,
                                               int min_phases = 18, int max_phases = 35);

}  // namespace capax::plan
