#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskmap/matrix.hpp"

namespace riskmap {

struct TsneConfig {
  double perplexity = 30.0;
  double exaggeration_factor = 12.0;
  int exaggeration_iters = 250;
  double learning_rate = 200.0;
  int max_iters = 1000;
  double momentum_early = 0.5;
  double momentum_late = 0.8;
  int momentum_switch_iter = 250;
  std::uint64_t seed = 0;
  double min_gain = 0.01;

  bool operator==(const TsneConfig&) const = default;
};

struct CostPoint {
  int iter = 0;
  double kl = 0.0;

  bool operator==(const CostPoint&) const = default;
};

// 2-D map of the regions. PCA projections reuse the type with an empty cost
// trace and a default config.
struct Embedding {
  Matrix coords;  // n x 2
  std::vector<std::string> region_ids;
  std::vector<CostPoint> cost_trace;
  TsneConfig config_used;

  std::size_t n() const { return coords.rows(); }

  bool operator==(const Embedding&) const = default;
};

}  // namespace riskmap
