#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "capax/grid/channel.hpp"
#include "capax/grid/protocol.hpp"
#include "capax/grid/registry.hpp"
#include "capax/grid/study.hpp"
#include "capax/grid/supervisor.hpp"
#include "capax/synth/trainer.hpp"

using namespace capax;
using namespace capax::grid;

namespace {

// Replays a fixed val_loss sequence and answers stop with the metrics of
// its own best epoch.
std::unique_ptr<TrainerChannel> scripted(std::vector<double> losses) {
  auto state = std::make_shared<std::pair<std::vector<double>, std::size_t>>(std::move(losses), 0);
  return std::make_unique<LoopbackChannel>([state](std::string_view line) -> std::vector<std::string> {
    auto& [seq, sent] = *state;
    const auto msg = protocol::decode_harness(line);
    if (std::holds_alternative<protocol::Control>(msg) && std::get<protocol::Control>(msg) == protocol::Control::Stop) {
      const auto best = std::min_element(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(sent)) - seq.begin();
      return {protocol::encode(FinalMetrics{static_cast<int>(best) + 1, seq[best], 0.5, 0.4, 0.6})};
    }
    const double l = seq[sent++];
    return {protocol::encode(EpochReport{static_cast<int>(sent), l, l, 0.5})};
  });
}

RunSpec spec() { return make_run_spec({Family::ResNet, ModelSize::Short, 1000, 1e-3, 1e-4}, 2, 0); }

std::filesystem::path script(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("capax_" + name + ".sh");
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("supervisor runs improving trajectories to the cap") {
  std::vector<double> losses;
  for (int i = 0; i < 50; ++i) losses.push_back(1.0 - 0.01 * i);
  auto ch = scripted(losses);
  const auto r = supervise_run(spec(), *ch);
  CHECK(r.status == RunStatus::completed);
  CHECK(r.epochs.size() == 50);
  REQUIRE(r.final_metrics);
  CHECK(r.final_metrics->best_epoch == 50);
}

TEST_CASE("supervisor stops after the patience window") {
  auto ch = scripted({0.5, 0.6, 0.5, 0.7, 0.9, 0.5, 0.1, 0.1});
  const auto r = supervise_run(spec(), *ch);
  CHECK(r.status == RunStatus::stopped_early);
  CHECK(r.epochs.size() == 6);
  CHECK(r.final_metrics->best_epoch == 1);
}

TEST_CASE("supervisor rejects malformed trainer output") {
  auto garbage = std::make_unique<LoopbackChannel>([](std::string_view) {
    return std::vector<std::string>{"{\"type\":\"epoch\",\"epoch\":1"};
  });
  const auto r = supervise_run(spec(), *garbage);
  CHECK(r.status == RunStatus::failed);
  CHECK_FALSE(r.final_metrics);
  CHECK(r.diagnostic.find("ProtocolViolation") != std::string::npos);

  auto skipping = std::make_unique<LoopbackChannel>([](std::string_view) {
    return std::vector<std::string>{protocol::encode(EpochReport{2, 0.1, 0.1, 0.5})};
  });
  CHECK(supervise_run(spec(), *skipping).diagnostic.find("expected epoch 1") != std::string::npos);

  auto lying = std::make_unique<LoopbackChannel>([n = 0](std::string_view line) mutable -> std::vector<std::string> {
    if (line.find("stop") != std::string::npos) return {protocol::encode(FinalMetrics{3, 0.1, 0.5, 0.1, 0.5})};
    ++n;
    return {protocol::encode(EpochReport{n, 0.1, 0.1, 0.5})};
  });
  CHECK(supervise_run(spec(), *lying).diagnostic.find("best_epoch") != std::string::npos);
}

TEST_CASE("supervisor records trainer errors") {
  auto erring = std::make_unique<LoopbackChannel>([](std::string_view) {
    return std::vector<std::string>{protocol::encode(protocol::TrainerError{"out of memory"})};
  });
  const auto r = supervise_run(spec(), *erring);
  CHECK(r.status == RunStatus::failed);
  CHECK(r.diagnostic == "trainer error: out of memory");
}

TEST_CASE("subprocess trainer: malformed line, crash, timeout") {
  const auto malformed = script("malformed", "read line\necho 'this is not json'\nsleep 1\n");
  SubprocessChannel a("sh " + malformed.string());
  const auto ra = supervise_run(spec(), a);
  CHECK(ra.status == RunStatus::failed);
  CHECK(ra.diagnostic.find("ProtocolViolation") != std::string::npos);

  const auto crash = script("crash", "read line\nexit 3\n");
  SubprocessChannel b("sh " + crash.string());
  const auto rb = supervise_run(spec(), b);
  CHECK(rb.status == RunStatus::failed);
  CHECK(rb.diagnostic.find("exit") != std::string::npos);
  CHECK(rb.diagnostic.find('3') != std::string::npos);

  const auto slow = script("slow", "read line\nsleep 10\n");
  SubprocessChannel c("sh " + slow.string());
  SupervisorOptions o;
  o.epoch_timeout = std::chrono::milliseconds(200);
  const auto rc = supervise_run(spec(), c, o);
  CHECK(rc.diagnostic.find("timed out") != std::string::npos);

  SubprocessChannel d("/nonexistent/trainer --flag");
  CHECK(supervise_run(spec(), d).status == RunStatus::failed);
}

TEST_CASE("subprocess trainer: the synthetic trainer binary") {
  SubprocessChannel ch(std::string(CAPAX_TRAINER_BIN) + " --sigma 0");
  const auto over_pipe = supervise_run(spec(), ch);
  auto loop = synth::loopback_factory(synth::ResponseSurface::reference(0.0))();
  const auto in_process = supervise_run(spec(), *loop);
  CHECK(over_pipe.finished());
  CHECK(over_pipe == in_process);
}

TEST_CASE("supervisor honours cancellation") {
  const auto slow = script("slow_cancel", "read line\nsleep 10\n");
  SubprocessChannel ch("sh " + slow.string());
  std::atomic<bool> cancel{true};
  SupervisorOptions o;
  o.cancel = &cancel;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = supervise_run(spec(), ch, o);
  CHECK(r.diagnostic == kCancelledDiagnostic);
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(5));
}

namespace {

std::vector<std::string> sorted_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  std::sort(lines.begin(), lines.end());
  return lines;
}

StudyOptions study_options(const std::filesystem::path& registry, std::size_t parallelism) {
  StudyOptions o;
  o.registry_path = registry;
  o.manifest_path = "unused.json";
  o.trainer = synth::loopback_factory(synth::ResponseSurface::reference());
  o.parallelism = parallelism;
  return o;
}

}  // namespace

TEST_CASE("study: parallelism does not change the registry") {
  const auto dir = std::filesystem::temp_directory_path() / "capax_study_par";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto one = run_study(nullptr, study_options(dir / "p1.ndjson", 1));
  const auto eight = run_study(nullptr, study_options(dir / "p8.ndjson", 8));
  CHECK(one.executed == 1620);
  CHECK(eight.executed == 1620);
  CHECK(one.failed == 0);
  CHECK(sorted_lines(dir / "p1.ndjson") == sorted_lines(dir / "p8.ndjson"));

  const auto again = run_study(nullptr, study_options(dir / "p1.ndjson", 4));
  CHECK(again.scheduled == 0);
  CHECK(again.executed == 0);
  CHECK(again.previously_finished == 1620);
  std::filesystem::remove_all(dir);
}

TEST_CASE("study: resume after 700 runs") {
  const auto path = std::filesystem::temp_directory_path() / "capax_study_resume.ndjson";
  std::filesystem::remove(path);
  auto o = study_options(path, 3);
  o.max_runs = 700;
  const auto first = run_study(nullptr, o);
  CHECK(first.executed == 700);
  o.max_runs.reset();
  const auto second = run_study(nullptr, o);
  CHECK(second.previously_finished == 700);
  CHECK(second.executed == 920);
  const auto reg = RunRegistry::load(path);
  CHECK(reg.log().size() == 1620);
  CHECK(reg.finished_records().size() == 1620);
  std::filesystem::remove(path);
}

TEST_CASE("study: failed runs are recorded and rescheduled") {
  const auto path = std::filesystem::temp_directory_path() / "capax_study_fail.ndjson";
  std::filesystem::remove(path);
  auto o = study_options(path, 2);
  o.grid = GridConfig{{"B0"}, {200}, {1e-3}, {1e-4}};
  o.trainer = subprocess_factory("false");
  const auto bad = run_study(nullptr, o);
  CHECK(bad.executed == 5);
  CHECK(bad.failed == 5);
  o.trainer = synth::loopback_factory(synth::ResponseSurface::reference());
  const auto good = run_study(nullptr, o);
  CHECK(good.scheduled == 5);
  CHECK(good.failed == 0);
  const auto reg = RunRegistry::load(path);
  CHECK(reg.failed_count() == 5);
  CHECK(reg.finished_records().size() == 5);
  std::filesystem::remove(path);
}

TEST_CASE("study: cancellation leaves no partial records") {
  const auto path = std::filesystem::temp_directory_path() / "capax_study_cancel.ndjson";
  std::filesystem::remove(path);
  auto o = study_options(path, 2);
  std::atomic<bool> cancel{false};
  std::size_t seen = 0;
  o.on_record = [&](const RunRecord&, const StudyProgress&) {
    if (++seen == 100) cancel.store(true);
  };
  const auto s = run_study(nullptr, o, &cancel);
  CHECK(s.interrupted);
  const auto reg = RunRegistry::load(path);
  CHECK(reg.failed_count() == 0);
  CHECK(reg.log().size() == s.executed);
  o.on_record = nullptr;
  const auto rest = run_study(nullptr, o);
  CHECK(rest.executed == 1620 - s.executed);
  std::filesystem::remove(path);
}
