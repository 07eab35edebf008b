#include "capax/plan/splits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "capax/util/error.hpp"
#include "capax/util/rng.hpp"

namespace capax::plan {

namespace {

constexpr std::uint64_t kHoldoutStream = 1;
constexpr std::uint64_t kDevDrawStream = 2;
constexpr std::uint64_t kTestDrawStream = 3;
constexpr std::uint64_t kFoldStreamBase = 1000;

std::size_t integral_share(std::size_t count, double fraction, std::string_view what) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "dev_fraction must lie in (0, 1)");
  const double exact = static_cast<double>(count) * fraction;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact))
    throw Error(ErrorCode::NonIntegralSplit,
                std::string(what) + ": " + std::to_string(count) + " x " + std::to_string(fraction) +
                    " is not a whole number");
  return static_cast<std::size_t>(rounded);
}

std::vector<ImageRef> take_prefix(const std::vector<PoolEntry>& pool, std::size_t target) {
  std::vector<ImageRef> out;
  out.reserve(target);
  for (const auto& entry : pool) {
    if (out.size() == target) break;
    const std::size_t need = target - out.size();
    const std::size_t n = std::min(need, entry.selected.size());
    out.insert(out.end(), entry.selected.begin(), entry.selected.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return out;
}

std::size_t pool_images(const std::vector<PoolEntry>& pool) {
  std::size_t n = 0;
  for (const auto& e : pool) n += e.selected.size();
  return n;
}

std::size_t distinct_patients(std::span<const ImageRef> refs) {
  std::set<std::string_view> ids;
  for (const auto& r : refs) ids.insert(r.patient_id);
  return ids.size();
}

}  // namespace

HoldoutSplit holdout_split(std::span<const PatientRecord> patients, double dev_fraction,
                           std::uint64_t seed) {
  const std::size_t n_dev = integral_share(patients.size(), dev_fraction, "holdout_split");
  std::vector<std::size_t> order(patients.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, kHoldoutStream));
  rng.shuffle(std::span(order));

  std::vector<bool> is_dev(patients.size(), false);
  for (std::size_t i = 0; i < n_dev; ++i) is_dev[order[i]] = true;

  HoldoutSplit split;
  for (std::size_t i = 0; i < patients.size(); ++i)
    (is_dev[i] ? split.dev : split.test).push_back(patients[i]);
  return split;
}

std::string_view to_string(FoldMode mode) {
  switch (mode) {
    case FoldMode::grouped: return "grouped";
    case FoldMode::imagewise: return "imagewise";
    case FoldMode::automatic: return "auto";
  }
  return "grouped";
}

FoldMode fold_mode_from_string(std::string_view text) {
  if (text == "grouped") return FoldMode::grouped;
  if (text == "imagewise") return FoldMode::imagewise;
  if (text == "auto") return FoldMode::automatic;
  throw Error(ErrorCode::InvalidArgument, "unknown fold mode '" + std::string(text) + "'");
}

std::vector<int> kfold_assign(std::span<const ImageRef> dev, int k, std::uint64_t seed, FoldMode mode) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "kfold_assign: k must be at least 2");

  // groups in order of first appearance
  std::vector<std::string_view> group_ids;
  std::map<std::string_view, std::size_t> group_of;
  std::vector<std::size_t> image_group(dev.size());
  for (std::size_t i = 0; i < dev.size(); ++i) {
    auto [it, inserted] = group_of.try_emplace(dev[i].patient_id, group_ids.size());
    if (inserted) group_ids.push_back(dev[i].patient_id);
    image_group[i] = it->second;
  }

  if (mode == FoldMode::automatic)
    mode = group_ids.size() >= static_cast<std::size_t>(k) ? FoldMode::grouped : FoldMode::imagewise;

  Rng rng(seed);
  std::vector<int> labels(dev.size(), 0);

  if (mode == FoldMode::imagewise) {
    if (dev.size() < static_cast<std::size_t>(k))
      throw Error(ErrorCode::InsufficientGroups,
                  std::to_string(dev.size()) + " images cannot fill " + std::to_string(k) + " folds");
    std::vector<std::size_t> order(dev.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span(order));
    for (std::size_t j = 0; j < order.size(); ++j) labels[order[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
    return labels;
  }

  if (group_ids.size() < static_cast<std::size_t>(k))
    throw Error(ErrorCode::InsufficientGroups, std::to_string(group_ids.size()) + " patient groups for " +
                                                   std::to_string(k) + " folds");

  std::vector<std::size_t> group_size(group_ids.size(), 0);
  for (auto g : image_group) ++group_size[g];

  std::vector<std::size_t> order(group_ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span(order));
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return group_size[a] > group_size[b]; });

  // largest group first into the currently lightest fold
  std::vector<std::size_t> fold_load(static_cast<std::size_t>(k), 0);
  std::vector<int> group_fold(group_ids.size(), 0);
  for (auto g : order) {
    const auto lightest = static_cast<std::size_t>(
        std::min_element(fold_load.begin(), fold_load.end()) - fold_load.begin());
    group_fold[g] = static_cast<int>(lightest);
    fold_load[lightest] += group_size[g];
  }
  for (std::size_t i = 0; i < dev.size(); ++i) labels[i] = group_fold[image_group[i]];
  return labels;
}

std::vector<ImageRef> SizeAssignment::fold(int index) const {
  std::vector<ImageRef> out;
  for (std::size_t i = 0; i < dev.size(); ++i)
    if (dev_folds[i] == index) out.push_back(dev[i]);
  return out;
}

std::size_t SizeAssignment::dev_patient_count() const { return distinct_patients(dev); }
std::size_t SizeAssignment::test_patient_count() const { return distinct_patients(test); }

bool operator==(const PoolEntry& a, const PoolEntry& b) {
  return a.patient_id == b.patient_id && a.slices == b.slices && a.phases == b.phases && a.selected == b.selected;
}

bool operator==(const SizeAssignment& a, const SizeAssignment& b) {
  return a.dataset_size == b.dataset_size && a.fold_mode == b.fold_mode && a.dev == b.dev && a.test == b.test &&
         a.dev_folds == b.dev_folds;
}

std::size_t DatasetPlan::root_size() const { return pool_images(dev_pool) + pool_images(test_pool); }

std::vector<std::size_t> DatasetPlan::dataset_sizes() const {
  std::vector<std::size_t> out;
  for (const auto& s : sizes) out.push_back(s.dataset_size);
  return out;
}

const SizeAssignment& DatasetPlan::at_size(std::size_t dataset_size) const {
  for (const auto& s : sizes)
    if (s.dataset_size == dataset_size) return s;
  throw Error(ErrorCode::UnknownLevel, "dataset size " + std::to_string(dataset_size) + " is not in the plan");
}

DatasetPlan root_plan(std::span<const PatientRecord> patients, const PlanOptions& options) {
  for (const auto& p : patients) validate(p);
  {
    std::set<std::string_view> ids;
    for (const auto& p : patients)
      if (!ids.insert(p.patient_id).second)
        throw Error(ErrorCode::InvalidArgument, "duplicate patient id " + p.patient_id);
  }

  auto split = holdout_split(patients, options.dev_fraction, options.seed);
  auto to_pool = [&](const std::vector<PatientRecord>& side) {
    std::vector<PoolEntry> pool;
    pool.reserve(side.size());
    for (const auto& p : side)
      pool.push_back({p.patient_id, p.slices, p.phases, stratified_select(p, options.images_per_patient)});
    return pool;
  };

  DatasetPlan plan;
  plan.seed = options.seed;
  plan.dev_fraction = options.dev_fraction;
  plan.images_per_patient = options.images_per_patient;
  plan.k_folds = options.k_folds;
  plan.dev_pool = to_pool(split.dev);
  plan.test_pool = to_pool(split.test);

  SizeAssignment root;
  root.dataset_size = plan.root_size();
  root.dev = take_prefix(plan.dev_pool, pool_images(plan.dev_pool));
  root.test = take_prefix(plan.test_pool, pool_images(plan.test_pool));
  plan.sizes.push_back(std::move(root));
  return plan;
}

DatasetPlan nested_subsample(const DatasetPlan& root, std::span<const std::size_t> sizes, std::uint64_t seed,
                             int k_folds, FoldMode fold_mode) {
  if (sizes.empty()) throw Error(ErrorCode::InvalidArgument, "nested_subsample: no sizes requested");
  const std::size_t root_size = root.root_size();
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) throw Error(ErrorCode::InvalidArgument, "dataset size must be positive");
    if (i > 0 && sizes[i] <= sizes[i - 1])
      throw Error(ErrorCode::InvalidArgument, "dataset sizes must be strictly ascending");
    if (sizes[i] > root_size)
      throw Error(ErrorCode::SizeExceedsRoot,
                  "size " + std::to_string(sizes[i]) + " exceeds root size " + std::to_string(root_size));
  }

  DatasetPlan plan;
  plan.seed = seed;
  plan.dev_fraction = root.dev_fraction;
  plan.images_per_patient = root.images_per_patient;
  plan.k_folds = k_folds;
  plan.dev_pool = root.dev_pool;
  plan.test_pool = root.test_pool;
  Rng dev_rng(mix_seed(seed, kDevDrawStream));
  dev_rng.shuffle(std::span(plan.dev_pool));
  Rng test_rng(mix_seed(seed, kTestDrawStream));
  test_rng.shuffle(std::span(plan.test_pool));

  const std::size_t dev_capacity = pool_images(plan.dev_pool);
  const std::size_t test_capacity = pool_images(plan.test_pool);

  for (auto size : sizes) {
    const std::size_t dev_target = integral_share(size, root.dev_fraction, "dataset size");
    const std::size_t test_target = size - dev_target;
    if (dev_target > dev_capacity || test_target > test_capacity)
      throw Error(ErrorCode::SizeExceedsRoot,
                  "size " + std::to_string(size) + " needs more images than one holdout side provides");
    SizeAssignment a;
    a.dataset_size = size;
    a.dev = take_prefix(plan.dev_pool, dev_target);
    a.test = take_prefix(plan.test_pool, test_target);
    FoldMode mode = fold_mode;
    if (mode == FoldMode::automatic)
      mode = a.dev_patient_count() >= static_cast<std::size_t>(k_folds) ? FoldMode::grouped : FoldMode::imagewise;
    a.fold_mode = mode;
    a.dev_folds = kfold_assign(a.dev, k_folds, mix_seed(seed, kFoldStreamBase + size), mode);
    plan.sizes.push_back(std::move(a));
  }
  return plan;
}

DatasetPlan make_plan(std::span<const PatientRecord> patients, const PlanOptions& options) {
  auto root = root_plan(patients, options);
  return nested_subsample(root, options.sizes, options.seed, options.k_folds, options.fold_mode);
}

std::optional<std::string> check_invariants(const DatasetPlan& plan) {
  std::set<std::string_view> dev_ids, test_ids;
  for (const auto& e : plan.dev_pool) dev_ids.insert(e.patient_id);
  for (const auto& e : plan.test_pool) {
    if (dev_ids.count(e.patient_id)) return "patient " + e.patient_id + " is in both holdout pools";
    test_ids.insert(e.patient_id);
  }

  const std::set<ImageRef>* prev_dev = nullptr;
  const std::set<ImageRef>* prev_test = nullptr;
  std::vector<std::set<ImageRef>> dev_sets, test_sets;
  dev_sets.reserve(plan.sizes.size());
  test_sets.reserve(plan.sizes.size());

  for (std::size_t i = 0; i < plan.sizes.size(); ++i) {
    const auto& a = plan.sizes[i];
    const std::string tag = "size " + std::to_string(a.dataset_size) + ": ";
    if (i > 0 && a.dataset_size <= plan.sizes[i - 1].dataset_size) return tag + "sizes not ascending";

    const double dev_expect = static_cast<double>(a.dataset_size) * plan.dev_fraction;
    if (std::abs(static_cast<double>(a.dev.size()) - dev_expect) > 1e-6) return tag + "dev count mismatch";
    if (a.dev.size() + a.test.size() != a.dataset_size) return tag + "dev + test != size";

    for (const auto& r : a.dev)
      if (!dev_ids.count(r.patient_id)) return tag + "dev image from non-dev patient " + r.patient_id;
    for (const auto& r : a.test)
      if (!test_ids.count(r.patient_id)) return tag + "test image from non-test patient " + r.patient_id;

    dev_sets.emplace_back(a.dev.begin(), a.dev.end());
    test_sets.emplace_back(a.test.begin(), a.test.end());
    if (dev_sets.back().size() != a.dev.size()) return tag + "duplicate dev image";
    if (test_sets.back().size() != a.test.size()) return tag + "duplicate test image";
    if (prev_dev && !std::includes(dev_sets.back().begin(), dev_sets.back().end(), prev_dev->begin(), prev_dev->end()))
      return tag + "dev set does not contain the next smaller dev set";
    if (prev_test &&
        !std::includes(test_sets.back().begin(), test_sets.back().end(), prev_test->begin(), prev_test->end()))
      return tag + "test set does not contain the next smaller test set";
    prev_dev = &dev_sets.back();
    prev_test = &test_sets.back();

    // folds
    if (a.dev_folds.size() != a.dev.size()) return tag + "fold labels not parallel to dev";
    std::vector<std::size_t> load(static_cast<std::size_t>(plan.k_folds), 0);
    std::map<std::string_view, int> patient_fold;
    std::map<std::string_view, std::size_t> patient_images;
    for (std::size_t j = 0; j < a.dev.size(); ++j) {
      const int f = a.dev_folds[j];
      if (f < 0 || f >= plan.k_folds) return tag + "fold label out of range";
      ++load[static_cast<std::size_t>(f)];
      ++patient_images[a.dev[j].patient_id];
      if (a.fold_mode == FoldMode::grouped) {
        auto [it, inserted] = patient_fold.try_emplace(a.dev[j].patient_id, f);
        if (!inserted && it->second != f) return tag + "patient " + a.dev[j].patient_id + " spans folds";
      }
    }
    const auto [lo, hi] = std::minmax_element(load.begin(), load.end());
    if (*lo == 0) return tag + "empty fold";
    std::size_t slack = 1;
    if (a.fold_mode == FoldMode::grouped)
      for (const auto& [id, n] : patient_images) slack = std::max(slack, n);
    if (*hi - *lo > slack) return tag + "fold sizes unbalanced";
  }
  return std::nullopt;
}

}  // namespace capax::plan
