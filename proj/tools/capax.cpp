#include <atomic>
#include <csignal>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "capax/cli/commands.hpp"

namespace {

std::atomic<bool> g_cancel{false};

extern "C" void on_interrupt(int) { g_cancel.store(true); }

void install_interrupt_handler() {
  struct sigaction sa {};
  sa.sa_handler = on_interrupt;
  sigemptyset(&sa.sa_mask);
  sigaction(SIGINT, &sa, nullptr);
  sigaction(SIGTERM, &sa, nullptr);
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> sizes;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    unsigned long long value = 0;
    try {
      value = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || value == 0)
      throw CLI::ValidationError("--sizes", "expected a comma-separated list of positive integers");
    sizes.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return sizes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capax: capacity versus sample size studies for segmentation models"};
  app.require_subcommand(1);

  capax::cli::Overrides o;
  std::string config, sizes, response, trainer, registry, out, manifest;
  std::uint64_t seed = 0;
  std::size_t parallelism = 0, max_runs = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "study config (JSON)");
    sub->add_option("--out", out, "output directory");
  };

  auto* plan = app.add_subcommand("plan", "draw the nested dataset plan and write the manifest");
  add_common(plan);
  plan->add_option("--sizes", sizes, "comma-separated dataset sizes");
  plan->add_option("--seed", seed, "plan and run seed");
  plan->add_option("--manifest", manifest, "manifest path");

  auto* run = app.add_subcommand("run", "run every pending grid cell and fold");
  add_common(run);
  run->add_option("--sizes", sizes, "comma-separated dataset sizes");
  run->add_option("--seed", seed, "plan and run seed");
  run->add_option("--parallelism", parallelism, "concurrent trainers")->check(CLI::PositiveNumber);
  run->add_option("--trainer", trainer, "trainer command (or builtin:synthetic)");
  run->add_option("--registry", registry, "run registry (NDJSON)");
  run->add_option("--manifest", manifest, "manifest path");
  run->add_option("--max-runs", max_runs, "stop after this many runs")->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "fit the linear model, ANOVA, HSD and summaries");
  add_common(analyze);
  analyze->add_option("--sizes", sizes, "comma-separated dataset sizes");
  analyze->add_option("--registry", registry, "run registry (NDJSON)");
  analyze->add_option("--response", response, "response metric")
      ->check(CLI::IsMember({"dice", "bce", "test_dice", "test_loss", "val_dice", "val_loss"}));

  auto* report = app.add_subcommand("report", "write plot data from an analysis bundle");
  add_common(report);

  try {
    app.parse(argc, argv);
    if (!config.empty()) o.config = config;
    if (!sizes.empty()) o.sizes = parse_sizes(sizes);
    if (!response.empty()) o.response = response;
    if (!trainer.empty()) o.trainer = trainer;
    if (!registry.empty()) o.registry = registry;
    if (!out.empty()) o.out = out;
    if (!manifest.empty()) o.manifest = manifest;
    if (app.got_subcommand(plan) ? plan->count("--seed") : run->count("--seed")) o.seed = seed;
    if (parallelism > 0) o.parallelism = parallelism;
    if (max_runs > 0) o.max_runs = max_runs;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return capax::cli::kExitBadInput;
  }

  capax::cli::StudyConfig cfg;
  try {
    cfg = capax::cli::resolve_config(o, std::getenv("CAPAX_TRAINER"));
  } catch (const capax::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return capax::cli::exit_code_for(e.code());
  }

  if (*plan) return capax::cli::cmd_plan(cfg, std::cout, std::cerr);
  if (*run) {
    install_interrupt_handler();
    return capax::cli::cmd_run(cfg, std::cout, std::cerr, &g_cancel);
  }
  if (*analyze) return capax::cli::cmd_analyze(cfg, std::cout, std::cerr);
  return capax::cli::cmd_report(cfg, std::cout, std::cerr);
}
