#include "capax/cli/commands.hpp"

#include <fstream>

#include "capax/cli/analysis.hpp"
#include "capax/grid/registry.hpp"
#include "capax/grid/study.hpp"
#include "capax/plan/manifest.hpp"
#include "capax/synth/trainer.hpp"
#include "capax/util/hash.hpp"

namespace capax::cli {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient:
    case ErrorCode::IrlsDiverged:
    case ErrorCode::QuantileNoConverge:
      return kExitInfeasible;
    case ErrorCode::ProtocolViolation:
      return kExitRunFailures;
    default:
      return kExitBadInput;
  }
}

namespace {

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
}

stats::FormulaSpec formula_for(const StudyConfig& c) {
  stats::FormulaSpec f = stats::FormulaSpec::standard();
  f.dataset_levels = c.grid.dataset_sizes;
  f.lr_levels = c.grid.lrs;
  f.reg_levels = c.grid.regs;
  return f;
}

}  // namespace

int cmd_plan(const StudyConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto patients = config.inventory.empty()
                              ? plan::synthetic_inventory(config.synthetic_patients, config.plan_seed)
                              : plan::read_inventory(config.inventory);
    const auto p = plan::make_plan(patients, config.plan_options());
    if (auto problem = plan::check_invariants(p)) {
      err << "error: plan invariant violated: " << *problem << '\n';
      return int{kExitBadInput};
    }
    if (!config.manifest.parent_path().empty()) std::filesystem::create_directories(config.manifest.parent_path());
    plan::write_manifest(config.manifest, p);

    out << "manifest " << config.manifest.string() << ": " << patients.size() << " patients, root "
        << p.root_size() << " images\n";
    for (const auto& s : p.sizes) {
      out << "size " << s.dataset_size << ": dev " << s.dev.size() << " (" << s.dev_patient_count()
          << " patients), test " << s.test.size() << " (" << s.test_patient_count() << " patients), folds";
      for (int f = 0; f < p.k_folds; ++f) out << (f == 0 ? " " : "/") << s.fold(f).size();
      out << " [" << plan::to_string(s.fold_mode) << "]\n";
    }
    return int{kExitOk};
  });
}

int cmd_run(const StudyConfig& config, std::ostream& out, std::ostream& err, const std::atomic<bool>* cancel) {
  return guarded(err, [&]() -> int {
    if (!std::filesystem::exists(config.manifest)) {
      err << "error: manifest " << config.manifest.string() << " not found (run `capax plan` first)\n";
      return kExitBadInput;
    }
    const auto p = plan::read_manifest(config.manifest);
    if (p.k_folds != config.k_folds) {
      err << "error: manifest has " << p.k_folds << " folds, config asks for " << config.k_folds << '\n';
      return kExitBadInput;
    }

    grid::StudyOptions o;
    o.grid = config.grid;
    o.schedule = {config.k_folds, config.max_epochs, config.patience, config.run_seed};
    o.registry_path = config.registry;
    o.manifest_path = std::filesystem::absolute(config.manifest).string();
    o.trainer = config.trainer == kBuiltinSynthetic ? synth::loopback_factory(config.surface())
                                                    : grid::subprocess_factory(config.trainer);
    o.parallelism = config.parallelism;
    o.epoch_timeout = config.epoch_timeout;
    o.max_runs = config.max_runs;
    o.on_record = [&](const grid::RunRecord& r, const grid::StudyProgress& progress) {
      const auto& c = r.spec.condition;
      out << '[' << progress.done << '/' << progress.done + progress.pending << "] " << r.spec.run_id << ' '
          << grid::model_name(c) << " n=" << c.dataset_size << " lr=" << format_double(c.lr)
          << " reg=" << format_double(c.reg) << " fold=" << r.spec.fold << ' ' << grid::to_string(r.result.status);
      if (r.result.final_metrics) out << " dice=" << format_double(r.result.final_metrics->test_dice);
      if (!r.result.diagnostic.empty()) out << " (" << r.result.diagnostic << ')';
      out << '\n' << std::flush;
    };

    if (!config.registry.parent_path().empty()) std::filesystem::create_directories(config.registry.parent_path());
    const auto before = grid::RunRegistry::load(config.registry);
    const auto conditions = grid::expand_grid(config.grid);
    const auto pending = grid::schedule(conditions, before, o.schedule);
    out << "registry " << config.registry.string() << ": " << conditions.size() * config.k_folds - pending.size()
        << " finished, " << pending.size() << " pending\n";

    const auto summary = grid::run_study(&p, o, cancel);
    const std::size_t remaining = summary.scheduled - (summary.executed - summary.failed);
    out << "completed " << summary.executed - summary.failed << ", pending " << remaining << ", failed "
        << summary.failed << (summary.interrupted ? " (interrupted)" : "") << '\n';
    return summary.failed > 0 || summary.interrupted ? kExitRunFailures : kExitOk;
  });
}

int cmd_analyze(const StudyConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    if (!std::filesystem::exists(config.registry)) {
      err << "error: registry " << config.registry.string() << " not found\n";
      return kExitBadInput;
    }
    const auto registry = grid::RunRegistry::load(config.registry);
    const auto records = registry.finished_records();

    AnalysisOptions options;
    options.response = config.response;
    options.confidence = config.confidence;
    options.formula = formula_for(config);
    AnalysisBundle bundle;
    try {
      bundle = analyze(records, registry.failed_count(), options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidArgument) throw;
      err << "error: " << e.what() << '\n';
      return kExitInfeasible;
    }
    write_bundle(config.out, bundle);

    if (bundle.runs_failed > 0)
      out << "note: " << bundle.runs_failed << " failed run record(s) excluded from the analysis\n";
    for (const auto& d : bundle.primary.dropped) out << "warning: column " << d << " dropped (no variation)\n";
    out << coefficients_tsv(bundle) << '\n' << anova_tsv(bundle);
    if (!bundle.alternative) out << "log-link alternative not fitted: " << bundle.alternative_note << '\n';
    out << "bundle written to " << config.out.string() << '\n';
    return kExitOk;
  });
}

int cmd_report(const StudyConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const auto bundle = read_bundle(config.out);
    write_text(config.out / "panel_summary.tsv", panel_summary_tsv(bundle));
    write_text(config.out / "panel_hsd.tsv", panel_hsd_tsv(bundle));
    write_text(config.out / "hsd_pairs.tsv", hsd_pairs_tsv(bundle));
    std::size_t series = 0;
    std::string last;
    for (const auto& c : bundle.cells)
      if (c.model != last) ++series, last = c.model;
    out << "wrote panel_summary.tsv, panel_hsd.tsv, hsd_pairs.tsv to " << config.out.string() << " (" << series
        << " series, " << bundle.cells.size() << " cells)\n";
    return kExitOk;
  });
}

}  // namespace capax::cli
