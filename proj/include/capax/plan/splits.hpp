#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capax/plan/patient.hpp"

namespace capax::plan {

struct HoldoutSplit {
  std::vector<PatientRecord> dev;
  std::vector<PatientRecord> test;
};

/// Seeded patient-level split. Throws NonIntegralSplit unless
/// patients.size() * dev_fraction is a whole number.
HoldoutSplit holdout_split(std::span<const PatientRecord> patients, double dev_fraction,
                           std::uint64_t seed);

enum class FoldMode {
  grouped,    // every patient's dev images share one fold
  imagewise,  // images are dealt to folds independently of patient
  automatic,  // grouped when there are at least k patients, imagewise otherwise
};

std::string_view to_string(FoldMode mode);
FoldMode fold_mode_from_string(std::string_view text);

/// Fold labels (0..k-1) parallel to `dev`. Grouped mode throws
/// InsufficientGroups when fewer than k patients are present.
std::vector<int> kfold_assign(std::span<const ImageRef> dev, int k, std::uint64_t seed,
                              FoldMode mode = FoldMode::grouped);

/// One patient's contribution to the root pool, in stratified order.
struct PoolEntry {
  std::string patient_id;
  int slices = 0;
  int phases = 0;
  std::vector<ImageRef> selected;
};

struct SizeAssignment {
  std::size_t dataset_size = 0;
  FoldMode fold_mode = FoldMode::grouped;  // mode actually used (never automatic)
  std::vector<ImageRef> dev;
  std::vector<ImageRef> test;
  std::vector<int> dev_folds;  // parallel to dev

  std::vector<ImageRef> fold(int index) const;
  std::size_t dev_patient_count() const;
  std::size_t test_patient_count() const;
};

/// Patient inventory with holdout, nested-subsample and fold assignments.
/// Immutable once built.
struct DatasetPlan {
  std::uint64_t seed = 0;
  double dev_fraction = 0.8;
  std::size_t images_per_patient = 100;
  int k_folds = 5;
  std::vector<PoolEntry> dev_pool;   // in draw order
  std::vector<PoolEntry> test_pool;  // in draw order
  std::vector<SizeAssignment> sizes; // ascending dataset_size

  std::size_t root_size() const;
  std::vector<std::size_t> dataset_sizes() const;
  const SizeAssignment& at_size(std::size_t dataset_size) const;

  bool operator==(const DatasetPlan&) const = default;
};

bool operator==(const PoolEntry& a, const PoolEntry& b);
bool operator==(const SizeAssignment& a, const SizeAssignment& b);

struct PlanOptions {
  std::vector<std::size_t> sizes{200, 500, 1000, 2500, 5000, 10000};
  double dev_fraction = 0.8;
  std::size_t images_per_patient = 100;
  int k_folds = 5;
  FoldMode fold_mode = FoldMode::automatic;
  std::uint64_t seed = 0;
};

/// Stratified selection plus holdout over the whole inventory: a plan whose
/// single size is the full pool, with no folds assigned yet.
DatasetPlan root_plan(std::span<const PatientRecord> patients, const PlanOptions& options);

/// Draws nested datasets from the root pools. For each size the dev and test
/// sides take whole patients in the seeded draw order and then a stratified
/// prefix of one more patient. Throws SizeExceedsRoot for sizes above the
/// root and NonIntegralSplit when size * dev_fraction is fractional.
DatasetPlan nested_subsample(const DatasetPlan& root, std::span<const std::size_t> sizes,
                             std::uint64_t seed, int k_folds = 5,
                             FoldMode fold_mode = FoldMode::automatic);

/// root_plan followed by nested_subsample.
DatasetPlan make_plan(std::span<const PatientRecord> patients, const PlanOptions& options);

/// Verifies exclusivity, nesting, and fold partition; returns a description of
/// the first violation, or nullopt.
std::optional<std::string> check_invariants(const DatasetPlan& plan);

}  // namespace capax::plan
