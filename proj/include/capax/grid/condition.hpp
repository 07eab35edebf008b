#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "capax/grid/types.hpp"

namespace capax::grid {

/// Factor levels of the study. Models are given by name (B0, B5, ...).
struct GridConfig {
  std::vector<std::string> models{"B0", "B5", "R18", "R50", "V16", "V19"};
  std::vector<std::size_t> dataset_sizes{200, 500, 1000, 2500, 5000, 10000};
  std::vector<double> lrs{1e-2, 1e-3, 1e-4};
  std::vector<double> regs{1e-2, 1e-4, 1e-6};
};

/// Cartesian product, model outermost then dataset, lr, reg, each in the
/// configured order. Throws EmptyFactor when any list is empty.
std::vector<ExperimentCondition> expand_grid(const GridConfig& config);

}  // namespace capax::grid
