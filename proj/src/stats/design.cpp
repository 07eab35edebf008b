#include "capax/stats/design.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <type_traits>

#include "capax/util/error.hpp"
#include "capax/util/hash.hpp"

namespace capax::stats {

namespace {

using grid::Family;
using grid::ModelSize;

constexpr int kTermIntercept = 0;
constexpr int kTermLs = 1;
constexpr int kTermNested = 2;
constexpr int kTermDataset = 3;
constexpr int kTermLrSlopes = 4;
constexpr int kTermReg = 5;

constexpr std::array<Family, 3> kFamilies{Family::EfficientNet, Family::ResNet, Family::VGG};
constexpr std::array<ModelSize, 2> kSizes{ModelSize::Long, ModelSize::Short};

int cell_index(Family f, ModelSize s) {
  const int fam = f == Family::EfficientNet ? 0 : f == Family::ResNet ? 1 : 2;
  return 2 * fam + (s == ModelSize::Short ? 1 : 0);
}

std::string ls_tag(ModelSize s) { return s == ModelSize::Long ? "long" : "short"; }

template <typename T>
void check_level(const std::vector<T>& levels, T value, const char* what) {
  if (levels.empty()) return;
  const bool found = std::any_of(levels.begin(), levels.end(), [&](T l) {
    if constexpr (std::is_floating_point_v<T>) return std::abs(l - value) <= 1e-12 * std::abs(l);
    else return l == value;
  });
  if (!found) {
    std::string text;
    if constexpr (std::is_floating_point_v<T>) text = format_double(value);
    else text = std::to_string(value);
    throw Error(ErrorCode::UnknownLevel, std::string(what) + " level " + text + " is not configured");
  }
}

double transform(Covariates c, double v) { return c == Covariates::log ? std::log(v) : v; }

}  // namespace

std::vector<std::string> full_labels(Covariates covariates) {
  const bool log = covariates == Covariates::log;
  const std::string dataset = log ? "log(Dataset)" : "Dataset";
  const std::string lr = log ? "log(lr)" : "lr";
  const std::string reg = log ? "log(reg)" : "reg";
  std::vector<std::string> labels{"Intercept",
                                  "ls[T.short]",
                                  "ls[long]:Family[T.ResNet]",
                                  "ls[short]:Family[T.ResNet]",
                                  "ls[long]:Family[T.VGG]",
                                  "ls[short]:Family[T.VGG]",
                                  dataset};
  for (auto f : kFamilies)
    for (auto s : kSizes) labels.push_back(lr + ":ls[" + ls_tag(s) + "]:Family[" + std::string(grid::to_string(f)) + "]");
  labels.push_back(reg);
  return labels;
}

DesignMatrix build_design_matrix(std::span<const Observation> obs, const FormulaSpec& formula) {
  if (obs.empty()) throw Error(ErrorCode::InvalidArgument, "no observations");
  const auto cov = formula.covariates;
  const bool log = cov == Covariates::log;

  // levels present in the data
  std::set<ModelSize> sizes_seen;
  std::set<std::pair<ModelSize, Family>> cells_seen;
  std::set<std::size_t> datasets_seen;
  std::set<double> regs_seen;
  std::array<std::set<double>, 6> lrs_per_cell;
  for (const auto& o : obs) {
    const auto& c = o.condition;
    check_level(formula.dataset_levels, c.dataset_size, "dataset");
    check_level(formula.lr_levels, c.lr, "lr");
    check_level(formula.reg_levels, c.reg, "reg");
    if (c.dataset_size == 0 || c.lr <= 0.0 || c.reg <= 0.0)
      throw Error(ErrorCode::InvalidArgument, "dataset, lr and reg must be positive");
    if (!std::isfinite(o.response)) throw Error(ErrorCode::InvalidArgument, "non-finite response");
    sizes_seen.insert(c.size);
    cells_seen.insert({c.size, c.family});
    datasets_seen.insert(c.dataset_size);
    regs_seen.insert(c.reg);
    lrs_per_cell[static_cast<std::size_t>(cell_index(c.family, c.size))].insert(c.lr);
  }

  const auto labels = full_labels(cov);
  const std::vector<int> terms{kTermIntercept, kTermLs,      kTermNested,   kTermNested,   kTermNested,
                               kTermNested,    kTermDataset, kTermLrSlopes, kTermLrSlopes, kTermLrSlopes,
                               kTermLrSlopes,  kTermLrSlopes, kTermLrSlopes, kTermReg};
  const std::string ds = log ? "log(Dataset)" : "Dataset";
  const std::string lrs = log ? "log(lr):ls:Family" : "lr:ls:Family";
  const std::string rg = log ? "log(reg)" : "reg";
  const std::vector<std::string> term_names{"Intercept", "ls", "ls:Family", ds, lrs, rg};

  // which of the 14 columns the data can identify
  std::vector<bool> keep(labels.size(), true);
  keep[1] = sizes_seen.size() > 1;
  {
    std::size_t col = 2;
    for (auto fam : {Family::ResNet, Family::VGG})
      for (auto s : kSizes) {
        std::size_t families_in_size = 0;
        for (auto f : kFamilies) families_in_size += cells_seen.count({s, f});
        keep[col++] = cells_seen.count({s, fam}) > 0 && families_in_size > 1;
      }
  }
  keep[6] = datasets_seen.size() > 1;
  for (std::size_t cell = 0; cell < 6; ++cell) keep[7 + cell] = lrs_per_cell[cell].size() > 1;
  keep[13] = regs_seen.size() > 1;

  DesignMatrix dm;
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (keep[j]) {
      kept.push_back(j);
      dm.labels.push_back(labels[j]);
      dm.term_of_column.push_back(terms[j]);
    } else {
      dm.dropped.push_back(labels[j]);
    }
  }
  dm.term_names = term_names;

  const auto n = static_cast<Eigen::Index>(obs.size());
  dm.X.resize(n, static_cast<Eigen::Index>(kept.size()));
  dm.y.resize(n);
  Eigen::RowVectorXd full(labels.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = obs[static_cast<std::size_t>(i)].condition;
    const bool is_short = c.size == ModelSize::Short;
    full.setZero();
    full[0] = 1.0;
    full[1] = is_short ? 1.0 : 0.0;
    if (c.family == Family::ResNet) full[is_short ? 3 : 2] = 1.0;
    if (c.family == Family::VGG) full[is_short ? 5 : 4] = 1.0;
    full[6] = transform(cov, static_cast<double>(grid::dev_images(c)));
    full[7 + cell_index(c.family, c.size)] = transform(cov, c.lr);
    full[13] = transform(cov, c.reg);
    for (std::size_t k = 0; k < kept.size(); ++k) dm.X(i, static_cast<Eigen::Index>(k)) = full[static_cast<Eigen::Index>(kept[k])];
    dm.y[i] = obs[static_cast<std::size_t>(i)].response;
  }

  if (n <= dm.p())
    throw RankDeficient(dm.labels, std::to_string(n) + " observations for " + std::to_string(dm.p()) + " columns");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dm.X);
  if (qr.rank() < dm.p()) {
    std::vector<std::string> offending;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < dm.p(); ++k) offending.push_back(dm.labels[static_cast<std::size_t>(perm[k])]);
    std::string names;
    for (const auto& s : offending) names += (names.empty() ? "" : ", ") + s;
    throw RankDeficient(offending, "design is rank deficient; dependent columns: " + names);
  }
  return dm;
}

}  // namespace capax::stats
