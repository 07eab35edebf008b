#include "capax/cli/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "capax/stats/glm.hpp"
#include "capax/util/error.hpp"

namespace capax::cli {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<stats::Observation> observations(std::span<const grid::RunRecord> records, metrics::Metric response) {
  std::vector<stats::Observation> out;
  for (const auto& r : records)
    if (auto v = metrics::metric_value(r, response)) out.push_back({r.spec.condition, *v});
  return out;
}

ModelFit to_model_fit(const stats::LinearFit& fit, const std::vector<std::string>& dropped) {
  ModelFit m;
  for (Eigen::Index i = 0; i < fit.beta.size(); ++i)
    m.coefficients.push_back({fit.labels[i], fit.beta[i], fit.se[i], fit.z[i], fit.p_values[i]});
  m.dropped = dropped;
  m.ssr = fit.ssr;
  m.loglik = fit.loglik;
  m.aic = fit.aic;
  m.n = static_cast<std::size_t>(fit.n);
  m.p = static_cast<std::size_t>(fit.p);
  return m;
}

namespace {

using CellKey = std::pair<std::string, std::size_t>;  // model, dev images

CellKey cell_of(const grid::RunRecord& r) {
  return {std::string(grid::model_name(r.spec.condition)), grid::dev_images(r.spec.condition)};
}

}  // namespace

AnalysisBundle analyze(std::span<const grid::RunRecord> records, std::size_t failed_runs,
                       const AnalysisOptions& options) {
  AnalysisBundle b;
  b.response = std::string(metrics::to_string(options.response));
  b.runs_failed = failed_runs;

  const auto obs = observations(records, options.response);
  b.runs_used = obs.size();
  const auto dm = stats::build_design_matrix(obs, options.formula);
  if (dm.n() <= dm.p())
    throw Error(ErrorCode::InvalidArgument, "analysis needs more than " + std::to_string(dm.p()) +
                                                " finished runs, registry has " + std::to_string(dm.n()));
  b.primary = to_model_fit(stats::ols_fit(dm), dm.dropped);
  b.anova = stats::anova(dm);

  stats::FormulaSpec alt = stats::FormulaSpec::log_link_alternative();
  alt.dataset_levels = options.formula.dataset_levels;
  alt.lr_levels = options.formula.lr_levels;
  alt.reg_levels = options.formula.reg_levels;
  try {
    const auto alt_dm = stats::build_design_matrix(obs, alt);
    b.alternative = to_model_fit(stats::glm_log_link_fit(alt_dm), alt_dm.dropped);
  } catch (const Error& e) {
    b.alternative_note = e.what();
  }

  std::map<CellKey, std::vector<double>> response_by_cell, dice_by_cell, loss_by_cell;
  for (const auto& r : records) {
    if (!r.result.final_metrics) continue;
    const auto key = cell_of(r);
    response_by_cell[key].push_back(*metrics::metric_value(r, options.response));
    dice_by_cell[key].push_back(r.result.final_metrics->test_dice);
    loss_by_cell[key].push_back(r.result.final_metrics->test_loss);
  }
  for (const auto& [key, dice] : dice_by_cell)
    b.cells.push_back({key.first, key.second, metrics::summarize(dice), metrics::summarize(loss_by_cell[key])});

  std::vector<stats::HsdGroupData> groups;
  for (const auto& [key, values] : response_by_cell)
    groups.push_back({key.first + "/" + std::to_string(key.second), values});
  if (groups.size() >= 2) {
    const auto h = stats::tukey_hsd(groups, options.confidence);
    b.hsd.confidence = h.confidence;
    b.hsd.q_crit = h.q_crit;
    b.hsd.mse = h.mse;
    b.hsd.df = h.df;
    b.hsd.approximate = h.approximate;
    std::size_t i = 0;
    for (const auto& [key, values] : response_by_cell) {
      b.hsd.groups.push_back({key.first, key.second, h.n_per_group[i], h.means[i], h.ci_halfwidth[i]});
      ++i;
    }
    for (std::size_t a = 0; a < h.k(); ++a)
      for (std::size_t c = a + 1; c < h.k(); ++c)
        if (h.significant[a][c]) b.hsd.significant_pairs.emplace_back(a, c);
  }
  return b;
}

// ---- JSON -----------------------------------------------------------------

namespace {

// JSON has no inf/nan; those travel as strings.
ordered_json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double get_num(const json& v) {
  if (v.is_number()) return v.get<double>();
  const auto s = v.get<std::string>();
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  throw Error(ErrorCode::InvalidArgument, "bad number '" + s + "' in analysis bundle");
}

ordered_json fit_json(const ModelFit& m) {
  ordered_json rows = ordered_json::array();
  for (const auto& c : m.coefficients)
    rows.push_back({{"term", c.label}, {"coef", num(c.coef)}, {"se", num(c.se)}, {"z", num(c.z)},
                    {"p_value", num(c.p_value)}});
  return {{"n", m.n},       {"p", m.p},         {"ssr", num(m.ssr)}, {"loglik", num(m.loglik)},
          {"aic", num(m.aic)}, {"dropped", m.dropped}, {"coefficients", rows}};
}

ModelFit fit_from(const json& j) {
  ModelFit m;
  m.n = j.at("n");
  m.p = j.at("p");
  m.ssr = get_num(j.at("ssr"));
  m.loglik = get_num(j.at("loglik"));
  m.aic = get_num(j.at("aic"));
  m.dropped = j.at("dropped").get<std::vector<std::string>>();
  for (const auto& r : j.at("coefficients"))
    m.coefficients.push_back({r.at("term"), get_num(r.at("coef")), get_num(r.at("se")), get_num(r.at("z")),
                              get_num(r.at("p_value"))});
  return m;
}

ordered_json summary_json(const metrics::MetricSummary& s) {
  return {{"mean", num(s.mean)},
          {"median", num(s.median)},
          {"iqr_low", num(s.iqr_low)},
          {"iqr_high", num(s.iqr_high)},
          {"n_runs", s.n_runs}};
}

metrics::MetricSummary summary_from(const json& j) {
  return {get_num(j.at("mean")), get_num(j.at("median")), get_num(j.at("iqr_low")), get_num(j.at("iqr_high")),
          j.at("n_runs").get<std::size_t>()};
}

}  // namespace

ordered_json bundle_to_json(const AnalysisBundle& b) {
  ordered_json doc;
  doc["format"] = "capax-analysis/1";
  doc["response"] = b.response;
  doc["runs_used"] = b.runs_used;
  doc["runs_failed"] = b.runs_failed;
  doc["primary"] = fit_json(b.primary);

  ordered_json anova = ordered_json::array();
  for (const auto& r : b.anova.terms)
    anova.push_back({{"term", r.term},
                     {"ss", num(r.ss)},
                     {"df", r.df},
                     {"f", num(r.f)},
                     {"p_value", num(r.p_value)},
                     {"eta2", num(r.eta2)},
                     {"partial_eta2", num(r.partial_eta2)}});
  doc["anova"] = {{"terms", anova},
                  {"residual_ss", num(b.anova.residual_ss)},
                  {"residual_df", b.anova.residual_df},
                  {"residual_eta2", num(b.anova.residual_eta2)},
                  {"ss_total", num(b.anova.ss_total)}};

  doc["alternative"] = b.alternative ? fit_json(*b.alternative) : ordered_json(nullptr);
  doc["alternative_note"] = b.alternative_note;

  ordered_json groups = ordered_json::array();
  for (const auto& g : b.hsd.groups)
    groups.push_back({{"model", g.model},
                      {"dev_images", g.dev_images},
                      {"n", g.n},
                      {"mean", num(g.mean)},
                      {"halfwidth", num(g.halfwidth)}});
  ordered_json pairs = ordered_json::array();
  for (const auto& [i, j] : b.hsd.significant_pairs) pairs.push_back({i, j});
  doc["hsd"] = {{"confidence", num(b.hsd.confidence)},
                {"q_crit", num(b.hsd.q_crit)},
                {"mse", num(b.hsd.mse)},
                {"df", b.hsd.df},
                {"approximate", b.hsd.approximate},
                {"groups", groups},
                {"significant_pairs", pairs}};

  ordered_json cells = ordered_json::array();
  for (const auto& c : b.cells)
    cells.push_back({{"model", c.model},
                     {"dev_images", c.dev_images},
                     {"dice", summary_json(c.dice)},
                     {"loss", summary_json(c.loss)}});
  doc["cells"] = cells;
  return doc;
}

AnalysisBundle bundle_from_json(const json& doc) {
  try {
    if (doc.at("format") != "capax-analysis/1") throw Error(ErrorCode::InvalidArgument, "unknown bundle format");
    AnalysisBundle b;
    b.response = doc.at("response");
    b.runs_used = doc.at("runs_used");
    b.runs_failed = doc.at("runs_failed");
    b.primary = fit_from(doc.at("primary"));

    const auto& a = doc.at("anova");
    for (const auto& r : a.at("terms"))
      b.anova.terms.push_back({r.at("term"), get_num(r.at("ss")), r.at("df").get<int>(), get_num(r.at("f")),
                               get_num(r.at("p_value")), get_num(r.at("eta2")), get_num(r.at("partial_eta2"))});
    b.anova.residual_ss = get_num(a.at("residual_ss"));
    b.anova.residual_df = a.at("residual_df");
    b.anova.residual_eta2 = get_num(a.at("residual_eta2"));
    b.anova.ss_total = get_num(a.at("ss_total"));

    if (!doc.at("alternative").is_null()) b.alternative = fit_from(doc.at("alternative"));
    b.alternative_note = doc.at("alternative_note");

    const auto& h = doc.at("hsd");
    b.hsd.confidence = get_num(h.at("confidence"));
    b.hsd.q_crit = get_num(h.at("q_crit"));
    b.hsd.mse = get_num(h.at("mse"));
    b.hsd.df = h.at("df");
    b.hsd.approximate = h.at("approximate");
    for (const auto& g : h.at("groups"))
      b.hsd.groups.push_back({g.at("model"), g.at("dev_images"), g.at("n"), get_num(g.at("mean")),
                              get_num(g.at("halfwidth"))});
    for (const auto& p : h.at("significant_pairs")) b.hsd.significant_pairs.emplace_back(p.at(0), p.at(1));

    for (const auto& c : doc.at("cells"))
      b.cells.push_back({c.at("model"), c.at("dev_images"), summary_from(c.at("dice")), summary_from(c.at("loss"))});
    return b;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed analysis bundle: ") + e.what());
  }
}

// ---- tables ---------------------------------------------------------------

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string coefficients_tsv(const AnalysisBundle& b) {
  std::ostringstream out;
  out << "term\tcoef.\tse\tz\tp-value\n";
  for (const auto& c : b.primary.coefficients)
    out << c.label << '\t' << fixed(c.coef, 4) << '\t' << fixed(c.se, 4) << '\t' << fixed(c.z, 3) << '\t'
        << fixed(c.p_value, 4) << '\n';
  out << "# response: " << b.response << ", n = " << b.primary.n << ", p = " << b.primary.p << '\n';
  out << "# AIC: " << fixed(b.primary.aic, 1) << '\n';
  if (b.alternative) out << "# log-link alternative AIC: " << fixed(b.alternative->aic, 1) << '\n';
  for (const auto& d : b.primary.dropped) out << "# dropped: " << d << '\n';
  return out.str();
}

std::string anova_tsv(const AnalysisBundle& b) {
  std::ostringstream out;
  out << "term\tSS\tdf\tF\tp-value\teta2\tpartial_eta2\n";
  for (const auto& r : b.anova.terms)
    out << r.term << '\t' << fixed(r.ss, 4) << '\t' << r.df << '\t' << fixed(r.f, 4) << '\t' << general(r.p_value)
        << '\t' << fixed(r.eta2, 4) << '\t' << fixed(r.partial_eta2, 4) << '\n';
  out << "Residuals\t" << fixed(b.anova.residual_ss, 4) << '\t' << b.anova.residual_df << "\t-\t-\t"
      << fixed(b.anova.residual_eta2, 4) << "\t-\n";
  return out.str();
}

std::string hsd_tsv(const AnalysisBundle& b) {
  std::ostringstream out;
  out << "# q_crit " << b.hsd.q_crit << ", mse " << b.hsd.mse << ", df " << b.hsd.df << ", confidence "
      << b.hsd.confidence << (b.hsd.approximate ? ", approximate (unequal group sizes)" : "") << '\n';
  out << "model\tdev_images\tn\tmean\thalfwidth\n";
  for (const auto& g : b.hsd.groups)
    out << g.model << '\t' << g.dev_images << '\t' << g.n << '\t' << fixed(g.mean, 6) << '\t'
        << fixed(g.halfwidth, 6) << '\n';
  return out.str();
}

std::string cells_tsv(const AnalysisBundle& b) {
  std::ostringstream out;
  out << "model\tdev_images\tn\tdice_median\tdice_q1\tdice_q3\tloss_median\tloss_q1\tloss_q3\n";
  for (const auto& c : b.cells)
    out << c.model << '\t' << c.dev_images << '\t' << c.dice.n_runs << '\t' << fixed(c.dice.median, 6) << '\t'
        << fixed(c.dice.iqr_low, 6) << '\t' << fixed(c.dice.iqr_high, 6) << '\t' << fixed(c.loss.median, 6)
        << '\t' << fixed(c.loss.iqr_low, 6) << '\t' << fixed(c.loss.iqr_high, 6) << '\n';
  return out.str();
}

std::string panel_summary_tsv(const AnalysisBundle& b) {
  std::ostringstream out;
  out << "series\tdev_images\tmetric\tmedian\tq1\tq3\tn\n";
  for (const char* metric : {"dice", "loss"})
    for (const auto& c : b.cells) {
      const auto& s = std::string(metric) == "dice" ? c.dice : c.loss;
      out << c.model << '\t' << c.dev_images << '\t' << metric << '\t' << fixed(s.median, 6) << '\t'
          << fixed(s.iqr_low, 6) << '\t' << fixed(s.iqr_high, 6) << '\t' << s.n_runs << '\n';
    }
  return out.str();
}

std::string panel_hsd_tsv(const AnalysisBundle& b) {
  std::ostringstream out;
  out << "series\tdev_images\tmean\thalfwidth\tlower\tupper\tn\n";
  for (const auto& g : b.hsd.groups)
    out << g.model << '\t' << g.dev_images << '\t' << fixed(g.mean, 6) << '\t' << fixed(g.halfwidth, 6) << '\t'
        << fixed(g.mean - g.halfwidth, 6) << '\t' << fixed(g.mean + g.halfwidth, 6) << '\t' << g.n << '\n';
  return out.str();
}

std::string hsd_pairs_tsv(const AnalysisBundle& b) {
  std::vector<std::vector<bool>> sig(b.hsd.groups.size(), std::vector<bool>(b.hsd.groups.size(), false));
  for (const auto& [i, j] : b.hsd.significant_pairs) sig[i][j] = true;
  std::ostringstream out;
  out << "group_a\tgroup_b\tdifference\tsignificant\tintervals_overlap\n";
  for (std::size_t i = 0; i < b.hsd.groups.size(); ++i)
    for (std::size_t j = i + 1; j < b.hsd.groups.size(); ++j) {
      const auto& a = b.hsd.groups[i];
      const auto& c = b.hsd.groups[j];
      const double diff = std::abs(a.mean - c.mean);
      const bool overlap = diff <= a.halfwidth + c.halfwidth;
      out << a.model << '/' << a.dev_images << '\t' << c.model << '/' << c.dev_images << '\t' << fixed(diff, 6)
          << '\t' << (sig[i][j] ? 1 : 0) << '\t' << (overlap ? 1 : 0) << '\n';
    }
  return out.str();
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
}

}  // namespace

void write_bundle(const std::filesystem::path& dir, const AnalysisBundle& b) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  write_text(dir / "analysis.json", bundle_to_json(b).dump(1) + "\n");
  write_text(dir / "coefficients.tsv", coefficients_tsv(b));
  write_text(dir / "anova.tsv", anova_tsv(b));
  write_text(dir / "hsd.tsv", hsd_tsv(b));
  write_text(dir / "cells.tsv", cells_tsv(b));
}

AnalysisBundle read_bundle(const std::filesystem::path& dir) {
  const auto path = dir / "analysis.json";
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "no analysis bundle at " + path.string());
  try {
    return bundle_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, "analysis bundle " + path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace capax::cli
