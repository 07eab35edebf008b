// One PASS/FAIL line per acceptance criterion; exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "capax/cli/analysis.hpp"
#include "capax/cli/commands.hpp"
#include "capax/cli/config.hpp"
#include "capax/grid/channel.hpp"
#include "capax/grid/condition.hpp"
#include "capax/grid/protocol.hpp"
#include "capax/grid/registry.hpp"
#include "capax/grid/study.hpp"
#include "capax/grid/supervisor.hpp"
#include "capax/metrics/metrics.hpp"
#include "capax/plan/patient.hpp"
#include "capax/plan/splits.hpp"
#include "capax/stats/anova.hpp"
#include "capax/stats/design.hpp"
#include "capax/stats/ols.hpp"
#include "capax/stats/studentized_range.hpp"
#include "capax/synth/surface.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace capax;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail, std::chrono::steady_clock::time_point t0) {
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s  %-28s %s (%.2f s)\n", ok ? "PASS" : "FAIL", name, detail.c_str(), secs);
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

cli::StudyConfig study_config(const fs::path& dir, std::uint64_t seed, double sigma) {
  cli::StudyConfig c;
  c.manifest = dir / "manifest.json";
  c.registry = dir / "registry.ndjson";
  c.out = dir / "analysis";
  c.plan_seed = c.run_seed = seed;
  c.synthetic_sigma = sigma;
  return c;
}

// plan -> run -> analyze through the command layer with the in-process trainer.
cli::AnalysisBundle full_study(const std::string& tag, std::uint64_t seed, double sigma) {
  const auto dir = fs::temp_directory_path() / ("capax_acceptance_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto c = study_config(dir, seed, sigma);
  std::ostringstream out, err;
  if (cli::cmd_plan(c, out, err) != 0 || cli::cmd_run(c, out, err) != 0 || cli::cmd_analyze(c, out, err) != 0)
    throw std::runtime_error("study " + tag + " failed: " + err.str());
  auto bundle = cli::read_bundle(c.out);
  fs::remove_all(dir);
  return bundle;
}

void grid_arithmetic() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto conditions = grid::expand_grid(grid::GridConfig{});
  const auto runs = grid::schedule(conditions, grid::RunRegistry{});
  std::set<std::string> ids;
  for (const auto& r : runs) ids.insert(r.run_id);
  const bool ok = conditions.size() == 324 && runs.size() == 1620 && ids.size() == 1620;
  report("grid arithmetic", ok,
         std::to_string(conditions.size()) + " conditions, " + std::to_string(runs.size()) + " runs", t0);
}

void aic_reconstruction() {
  const auto t0 = std::chrono::steady_clock::now();
  const double aic = stats::gaussian_aic(1620, 14, 23.7779);
  const double ref = oracle::aic(1620, 14, 23.7779);
  report("AIC reconstruction", std::abs(aic - (-2213.4)) <= 0.5 && std::abs(aic - ref) < 1e-9,
         fmt("AIC %.3f (target -2213.4 +/- 0.5)", aic), t0);
}

void anova_consistency() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<stats::TermSumOfSquares> sums{{"ls", 0.0145, 1},
                                                  {"ls:Family", 1.7284, 4},
                                                  {"log(Dataset)", 91.7177, 1},
                                                  {"log(lr):ls:Family", 1.9866, 6},
                                                  {"log(reg)", 0.0022, 1}};
  const auto t = stats::anova_from_sums(sums, 23.7779, 1606);
  const double f_target[] = {0.98, 29.1844, 6194.7601, 22.3631, 0.146};
  std::string detail;
  bool ok = true;
  for (std::size_t i = 0; i < 5; ++i) {
    const double err = rel(t.terms[i].f, f_target[i]);
    ok = ok && err <= 0.005;
    detail += t.terms[i].term + " F " + fmt("%.4f (%.2f%%)", t.terms[i].f, 100 * err) + "; ";
  }
  const double eta_actual[] = {t.terms[1].eta2, t.terms[2].eta2, t.terms[3].eta2, t.residual_eta2};
  const double eta_target[] = {0.0145, 0.7693, 0.0167, 0.1994};
  for (int i = 0; i < 4; ++i) {
    ok = ok && std::abs(eta_actual[i] - eta_target[i]) <= 0.0005;
    detail += fmt("eta2 %.4f", eta_actual[i]) + (i < 3 ? ", " : "");
  }
  // the log(reg) SS is printed to two significant figures; its F carries that rounding
  report("ANOVA consistency", ok, detail, t0);
}

void coefficient_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto truth = synth::ResponseSurface::reference().coefficients;
  const double sigma = synth::ResponseSurface::reference().sigma;
  int seeds_ok = 0;
  double worst_z = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto b = full_study("recovery", seed, sigma);
    bool all = b.primary.coefficients.size() == truth.size();
    for (std::size_t j = 0; all && j < truth.size(); ++j) {
      const double z = std::abs(b.primary.coefficients[j].coef - truth[j]) / b.primary.coefficients[j].se;
      worst_z = std::max(worst_z, z);
      all = z <= 4.0;
    }
    seeds_ok += all;
  }
  const auto exact = full_study("noiseless", 0, 0.0);
  double worst_exact = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j)
    worst_exact = std::max(worst_exact, std::abs(exact.primary.coefficients[j].coef - truth[j]));
  report("coefficient recovery", seeds_ok >= 19 && worst_exact <= 1e-8,
         fmt("%.0f/20 seeds within 4 se (max |z| %.2f); noiseless max error %.1e", seeds_ok, worst_z, worst_exact),
         t0);
}

void ols_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> z;
  std::uniform_int_distribution<int> pick_p(1, 10);
  double worst = 0.0;
  int checked = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const int p = pick_p(gen);
    const int n = std::uniform_int_distribution<int>(p + 2, 200)(gen);
    stats::DesignMatrix dm;
    dm.X.resize(n, p);
    dm.y.resize(n);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) {
        dm.X(i, j) = j == 0 ? 1.0 : z(gen) * std::pow(2.0, j % 4);
        rows[static_cast<std::size_t>(i)].push_back(dm.X(i, j));
      }
      dm.y[i] = 0.3 * dm.X(i, p - 1) + z(gen);
    }
    for (int j = 0; j < p; ++j) {
      dm.labels.push_back("x" + std::to_string(j));
      dm.term_names.push_back(dm.labels.back());
      dm.term_of_column.push_back(j);
    }
    const auto fit = stats::ols_fit(dm);
    const auto ref = oracle::normal_equations(rows, std::vector<double>(dm.y.data(), dm.y.data() + n));
    if (!ref) continue;
    ++checked;
    for (int j = 0; j < p; ++j) {
      // relative to the coefficient's own scale, so near-zero estimates do not blow up the ratio
      worst = std::max(worst, std::abs(fit.beta[j] - ref->beta[j]) / std::max(std::abs(ref->beta[j]), ref->se[j]));
      worst = std::max(worst, rel(fit.se[j], ref->se[j]));
    }
    worst = std::max(worst, rel(fit.ssr, ref->ssr));
  }
  report("OLS oracle", checked == 1000 && worst <= 1e-8,
         fmt("%.0f instances, max relative difference %.2e", checked, worst), t0);
}

void studentized_range() {
  const auto t0 = std::chrono::steady_clock::now();
  const double q2 = stats::q_studentized(0.95, 2, 1e6);
  const double ref2 = std::sqrt(2.0) * 1.95996;
  bool ok = rel(q2, ref2) <= 0.005;
  std::string detail = fmt("k=2 %.5f vs %.5f", q2, ref2);
  std::uint64_t seed = 1;
  for (int k : {3, 6, 36}) {
    const double q = stats::q_studentized(0.95, k, 1e6);
    const double mc = oracle::range_quantile_mc(k, 0.95, 1000000, seed++);
    ok = ok && rel(q, mc) <= 0.01;
    detail += fmt("; k=%.0f %.4f vs MC %.4f", k, q, mc);
  }
  report("studentized range", ok, detail, t0);
}

void metrics_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t dice_mismatch = 0;
  double bce_worst = 0.0;
  std::vector<std::uint8_t> y(64);
  std::vector<double> p(64);
  for (int b = 0; b < 10000; ++b) {
    const double density = u(gen);
    for (std::size_t i = 0; i < 64; ++i) {
      y[i] = u(gen) < density;
      // a share of exact 0, 0.5 and 1 probabilities exercises the threshold and the clamp
      const double r = u(gen);
      p[i] = r < 0.05 ? 0.0 : r < 0.1 ? 1.0 : r < 0.12 ? 0.5 : u(gen);
    }
    const metrics::PixelBatch batch{y, p};
    dice_mismatch += metrics::dice(batch) != oracle::dice(y, p);
    bce_worst = std::max(bce_worst, std::abs(metrics::bce(batch) - oracle::bce(y, p)));
  }
  const std::vector<std::uint8_t> wy{1, 1, 0, 0};
  const std::vector<double> wp{0.9, 0.2, 0.1, 0.8};
  const double worked = metrics::dice({wy, wp});
  report("metrics oracle", dice_mismatch == 0 && bce_worst <= 1e-12 && worked == 0.5,
         fmt("DICE mismatches %.0f, BCE max diff %.1e, worked case %.4f", static_cast<double>(dice_mismatch),
             bce_worst, worked),
         t0);
}

// Independent of the library's invariant checker.
std::string plan_problem(const plan::DatasetPlan& pl) {
  std::set<std::string> dev_patients, test_patients;
  for (const auto& e : pl.dev_pool) dev_patients.insert(e.patient_id);
  for (const auto& e : pl.test_pool) test_patients.insert(e.patient_id);
  for (const auto& id : dev_patients)
    if (test_patients.count(id)) return "patient " + id + " in dev and test";
  std::vector<plan::ImageRef> prev_dev, prev_test;
  for (const auto& s : pl.sizes) {
    for (const auto& r : s.dev)
      if (!dev_patients.count(r.patient_id)) return "dev image outside dev pool";
    for (const auto& r : s.test)
      if (!test_patients.count(r.patient_id)) return "test image outside test pool";
    auto dev = s.dev, test = s.test;
    std::sort(dev.begin(), dev.end());
    std::sort(test.begin(), test.end());
    if (std::adjacent_find(dev.begin(), dev.end()) != dev.end()) return "duplicate dev image";
    if (!std::includes(dev.begin(), dev.end(), prev_dev.begin(), prev_dev.end())) return "dev not nested";
    if (!std::includes(test.begin(), test.end(), prev_test.begin(), prev_test.end())) return "test not nested";
    prev_dev = dev;
    prev_test = test;
    // folds partition dev: every image labelled once, all folds used
    if (s.dev_folds.size() != s.dev.size()) return "fold labels missing";
    std::vector<std::size_t> count(static_cast<std::size_t>(pl.k_folds), 0);
    std::map<std::string, std::set<int>> folds_of;
    for (std::size_t i = 0; i < s.dev.size(); ++i) {
      const int f = s.dev_folds[i];
      if (f < 0 || f >= pl.k_folds) return "fold label out of range";
      ++count[static_cast<std::size_t>(f)];
      folds_of[s.dev[i].patient_id].insert(f);
    }
    std::size_t total = 0;
    for (int f = 0; f < pl.k_folds; ++f) {
      if (count[static_cast<std::size_t>(f)] == 0) return "empty fold";
      total += s.fold(f).size();
    }
    if (total != s.dev.size()) return "folds do not cover dev";
    if (s.fold_mode == plan::FoldMode::grouped)
      for (const auto& [id, fs_] : folds_of)
        if (fs_.size() != 1) return "patient " + id + " spans folds";
  }
  return {};
}

void split_properties() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t violations = 0;
  std::string first;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto patients = plan::synthetic_inventory(20 + 5 * (seed % 17), seed * 7919 + 1);
    plan::PlanOptions o;
    o.seed = seed;
    std::size_t capacity = 0;
    for (const auto& pt : patients) capacity += std::min<std::size_t>(pt.total_images(), 100);
    o.sizes = {200, 500, 1000};
    for (std::size_t s : {2500, 5000, 10000})
      if (s * 2 <= capacity) o.sizes.push_back(s);
    const auto a = plan::make_plan(patients, o);
    const auto b = plan::make_plan(patients, o);
    std::string problem = plan_problem(a);
    if (problem.empty() && !(a == b)) problem = "not deterministic";
    if (!problem.empty()) {
      ++violations;
      if (first.empty()) first = "seed " + std::to_string(seed) + ": " + problem;
    }
  }
  report("split properties", violations == 0,
         "1000 plans, " + std::to_string(violations) + " violations" + (first.empty() ? "" : " (" + first + ")"), t0);
}

std::unique_ptr<grid::TrainerChannel> replay(std::vector<double> losses) {
  auto state = std::make_shared<std::pair<std::vector<double>, std::size_t>>(std::move(losses), 0);
  return std::make_unique<grid::LoopbackChannel>([state](std::string_view line) -> std::vector<std::string> {
    auto& [seq, sent] = *state;
    const auto msg = grid::protocol::decode_harness(line);
    if (std::holds_alternative<grid::protocol::Control>(msg) &&
        std::get<grid::protocol::Control>(msg) == grid::protocol::Control::Stop) {
      const auto best = std::min_element(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(sent)) - seq.begin();
      return {grid::protocol::encode(grid::FinalMetrics{static_cast<int>(best) + 1, seq[best], 0.5, 0.4, 0.6})};
    }
    const double l = seq[sent++];
    return {grid::protocol::encode(grid::EpochReport{static_cast<int>(sent), l, l, 0.5})};
  });
}

void early_stopping() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(99);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto spec = grid::make_run_spec({grid::Family::VGG, grid::ModelSize::Long, 500, 1e-3, 1e-4}, 0, 0);
  std::size_t mismatches = 0, stopped_early = 0;
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> losses(50);
    // log-space random walk; half the trajectories are coarsened so ties occur
    double level = 0.0;
    const double drift = u(gen) * 0.08;
    const bool quantize = u(gen) < 0.5;
    for (auto& l : losses) {
      level = level - drift * u(gen) + 0.04 * z(gen);
      l = quantize ? std::round(std::exp(level) * 20.0) / 20.0 : std::exp(level);
    }
    auto ch = replay(losses);
    const auto r = grid::supervise_run(spec, *ch);
    const int expect = oracle::stop_epoch(losses, 50, 5);
    const auto best = std::min_element(losses.begin(), losses.begin() + expect) - losses.begin() + 1;
    const bool ok = r.final_metrics && static_cast<int>(r.epochs.size()) == expect &&
                    r.final_metrics->best_epoch == best;
    mismatches += !ok;
    stopped_early += r.status == grid::RunStatus::stopped_early;
  }
  report("early stopping", mismatches == 0,
         "10000 trajectories, " + std::to_string(mismatches) + " mismatches, " + std::to_string(stopped_early) +
             " stopped early",
         t0);
}

void hsd_coherence() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto b = full_study("hsd", 0, synth::ResponseSurface::reference().sigma);
  const auto& h = b.hsd;
  const std::set<std::pair<std::size_t, std::size_t>> sig(h.significant_pairs.begin(), h.significant_pairs.end());
  std::size_t pairs = 0, disagreements = 0, rule_mismatch = 0;
  for (std::size_t i = 0; i < h.groups.size(); ++i)
    for (std::size_t j = i + 1; j < h.groups.size(); ++j) {
      ++pairs;
      const double diff = std::abs(h.groups[i].mean - h.groups[j].mean);
      const bool overlap = diff <= h.groups[i].halfwidth + h.groups[j].halfwidth;
      const bool significant = sig.count({i, j}) > 0;
      disagreements += overlap == significant;
      const double threshold = h.q_crit * std::sqrt(h.mse / static_cast<double>(h.groups[i].n));
      rule_mismatch += (diff > threshold) != significant;
    }
  report("HSD coherence", pairs == 630 && disagreements == 0 && rule_mismatch == 0 && !h.approximate,
         std::to_string(pairs) + " pairs, " + std::to_string(sig.size()) + " significant, " +
             std::to_string(disagreements) + " overlap disagreements",
         t0);
}

}  // namespace

int main() {
  grid_arithmetic();
  aic_reconstruction();
  anova_consistency();
  coefficient_recovery();
  ols_oracle();
  studentized_range();
  metrics_oracle();
  split_properties();
  early_stopping();
  hsd_coherence();
  std::printf("%d criteria failed\n", failures);
  return failures;
}
