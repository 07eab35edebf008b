#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "capax/plan/manifest.hpp"
#include "capax/plan/patient.hpp"
#include "capax/plan/splits.hpp"
#include "capax/util/error.hpp"

using namespace capax;
using namespace capax::plan;

namespace {

std::vector<PatientRecord> square_inventory(std::size_t count, int slices = 10, int phases = 10) {
  std::vector<PatientRecord> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(make_patient("P" + std::to_string(1000 + i), slices, phases));
  return out;
}

std::set<std::string> patients_of(const std::vector<ImageRef>& refs) {
  std::set<std::string> ids;
  for (const auto& r : refs) ids.insert(r.patient_id);
  return ids;
}

}  // namespace

TEST_CASE("stratified positions") {
  std::vector<std::size_t> identity(100);
  for (std::size_t i = 0; i < 100; ++i) identity[i] = i;
  CHECK(stratified_positions(100) == identity);

  const auto doubled = stratified_positions(200);
  REQUIRE(doubled.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) CHECK(doubled[i] == 2 * i + 1);

  const auto p150 = stratified_positions(150);
  CHECK(std::vector<std::size_t>(p150.begin(), p150.begin() + 5) == std::vector<std::size_t>{0, 2, 3, 5, 6});
  CHECK(p150.back() == 149);

  CHECK_THROWS_AS(stratified_positions(99), Error);
}

TEST_CASE("stratified selection is increasing over the cine-stack ranges") {
  for (int slices = 8; slices <= 24; ++slices)
    for (int phases = 18; phases <= 35; ++phases) {
      const auto p = make_patient("X", slices, phases);
      const auto refs = stratified_select(p);
      REQUIRE(refs.size() == 100);
      for (std::size_t i = 1; i < refs.size(); ++i) {
        const auto lin = [&](const ImageRef& r) { return r.slice_index * phases + r.phase_index; };
        REQUIRE(lin(refs[i]) > lin(refs[i - 1]));
      }
    }
  try {
    stratified_select(make_patient("tiny", 3, 3));
    FAIL("expected InsufficientImages");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientImages);
  }
}

TEST_CASE("patient records are slice-major") {
  const auto p = make_patient("P7", 2, 3, "raw/");
  REQUIRE(p.image_refs.size() == 6);
  CHECK(p.image_refs[1].slice_index == 0);
  CHECK(p.image_refs[1].phase_index == 1);
  CHECK(p.image_refs[3].slice_index == 1);
  CHECK(p.image_refs[3].phase_index == 0);
  CHECK(p.image_refs[3].source_uri.rfind("raw/P7/", 0) == 0);
  CHECK_NOTHROW(validate(p));
  auto broken = p;
  std::swap(broken.image_refs[0], broken.image_refs[1]);
  CHECK_THROWS_AS(validate(broken), Error);
}

TEST_CASE("holdout split") {
  const auto patients = square_inventory(100);
  const auto split = holdout_split(patients, 0.8, 3);
  CHECK(split.dev.size() == 80);
  CHECK(split.test.size() == 20);
  std::set<std::string> seen;
  for (const auto& p : split.dev) seen.insert(p.patient_id);
  for (const auto& p : split.test) CHECK(seen.insert(p.patient_id).second);
  CHECK(seen.size() == 100);

  const auto ten = square_inventory(10);
  const auto a = holdout_split(ten, 0.8, 1);
  const auto b = holdout_split(ten, 0.8, 2);
  CHECK(a.dev.size() == 8);
  CHECK(b.dev.size() == 8);
  const auto again = holdout_split(ten, 0.8, 1);
  CHECK(std::equal(a.dev.begin(), a.dev.end(), again.dev.begin(),
                   [](const auto& x, const auto& y) { return x.patient_id == y.patient_id; }));

  try {
    holdout_split(square_inventory(5), 0.9, 0);
    FAIL("expected NonIntegralSplit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonIntegralSplit);
  }
}

TEST_CASE("nested subsample sizes") {
  PlanOptions o;
  o.seed = 11;
  const auto plan = make_plan(square_inventory(100), o);
  const std::vector<std::size_t> dev_sizes{160, 400, 800, 2000, 4000, 8000};
  REQUIRE(plan.sizes.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(plan.sizes[i].dev.size() == dev_sizes[i]);
    CHECK(plan.sizes[i].test.size() == dev_sizes[i] / 4);
  }
  std::size_t pool = 0;
  for (const auto& e : plan.dev_pool) pool += e.selected.size();
  CHECK(plan.at_size(10000).dev.size() == pool);
  CHECK(check_invariants(plan) == std::nullopt);

  const std::vector<std::size_t> too_big{20000};
  try {
    nested_subsample(root_plan(square_inventory(100), o), too_big, 1);
    FAIL("expected SizeExceedsRoot");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SizeExceedsRoot);
  }
}

TEST_CASE("partial patients fill the small sizes") {
  PlanOptions o;
  o.sizes = {200};
  const auto plan = make_plan(square_inventory(100), o);
  const auto& s = plan.at_size(200);
  CHECK(s.dev.size() == 160);
  CHECK(s.dev_patient_count() == 2);
  CHECK(s.test_patient_count() == 1);
  CHECK(s.fold_mode == FoldMode::imagewise);
}

TEST_CASE("single-size plan") {
  PlanOptions o;
  o.sizes = {10000};
  const auto plan = make_plan(square_inventory(100), o);
  REQUIRE(plan.sizes.size() == 1);
  CHECK(plan.sizes[0].dev.size() == 8000);
  CHECK(plan.sizes[0].test.size() == 2000);
}

TEST_CASE("grouped folds") {
  PlanOptions o;
  o.sizes = {10000};
  const auto plan = make_plan(square_inventory(100), o);
  const auto& s = plan.at_size(10000);
  CHECK(s.fold_mode == FoldMode::grouped);
  for (int f = 0; f < 5; ++f) {
    const auto fold = s.fold(f);
    CHECK(fold.size() == 1600);
    CHECK(patients_of(fold).size() == 16);
  }

  std::vector<ImageRef> four;
  for (const auto& p : square_inventory(4))
    four.insert(four.end(), p.image_refs.begin(), p.image_refs.end());
  try {
    kfold_assign(four, 5, 0, FoldMode::grouped);
    FAIL("expected InsufficientGroups");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientGroups);
  }
  const auto labels = kfold_assign(four, 5, 0, FoldMode::imagewise);
  std::vector<int> counts(5, 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  CHECK(counts == std::vector<int>{80, 80, 80, 80, 80});
}

TEST_CASE("fold partition and balance on uneven groups") {
  std::vector<ImageRef> dev;
  int sizes[] = {100, 60, 100, 35, 100, 100, 100};
  int n = 0;
  for (int s : sizes) {
    auto p = make_patient("G" + std::to_string(n++), 10, 10);
    dev.insert(dev.end(), p.image_refs.begin(), p.image_refs.begin() + s);
  }
  const auto labels = kfold_assign(dev, 5, 4, FoldMode::grouped);
  REQUIRE(labels.size() == dev.size());
  std::map<std::string, int> fold_of;
  std::vector<int> counts(5, 0);
  for (std::size_t i = 0; i < dev.size(); ++i) {
    auto [it, fresh] = fold_of.emplace(dev[i].patient_id, labels[i]);
    CHECK(it->second == labels[i]);
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  CHECK(*hi - *lo <= 100);
  CHECK(*lo > 0);
}

TEST_CASE("fold mode names") {
  CHECK(fold_mode_from_string("auto") == FoldMode::automatic);
  CHECK(fold_mode_from_string("grouped") == FoldMode::grouped);
  CHECK(to_string(FoldMode::imagewise) == "imagewise");
  CHECK_THROWS(fold_mode_from_string("diagonal"));
}

TEST_CASE("manifest is deterministic and round-trips") {
  const auto inventory = synthetic_inventory(100, 5);
  PlanOptions o;
  o.seed = 5;
  const auto a = render_manifest(make_plan(inventory, o));
  const auto b = render_manifest(make_plan(inventory, o));
  CHECK(a == b);
  o.seed = 6;
  CHECK(render_manifest(make_plan(inventory, o)) != a);

  o.seed = 5;
  const auto plan = make_plan(inventory, o);
  const auto back = manifest_from_json(nlohmann::json::parse(a));
  CHECK(back == plan);
  CHECK(render_manifest(back) == a);
}

TEST_CASE("inventory file") {
  const auto dir = std::filesystem::temp_directory_path() / "capax_inventory_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "inventory.json";
  {
    std::ofstream out(path);
    out << R"({"patients":[{"patient_id":"A","slices":10,"phases":20},)"
        << R"({"patient_id":"B","slices":12,"phases":25,"uri_root":"/data/"}]})";
  }
  const auto patients = read_inventory(path);
  REQUIRE(patients.size() == 2);
  CHECK(patients[0].total_images() == 200);
  CHECK(patients[1].image_refs.front().source_uri.rfind("/data/B/", 0) == 0);
  std::filesystem::remove_all(dir);
}
