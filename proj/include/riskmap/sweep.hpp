#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "riskmap/index.hpp"
#include "riskmap/matrix.hpp"
#include "riskmap/tsne.hpp"

namespace riskmap {

enum class DistributionForm : int { uniform = 0, clustered = 1, discrete = 2 };

const char* to_string(DistributionForm form);

// Operational cutoffs for the qualitative distribution labels. These are
// artifact constants, not values taken from any reference analysis.
struct SweepThresholds {
  double clustered_silhouette = 0.35;  // at or above: clustered
  double discrete_nn_cv = 1.0;         // below silhouette cutoff, at or above this: discrete
};

struct SweepRun {
  std::uint64_t seed = 0;  // derived seed actually used for this run
  double final_kl = 0.0;
  double silhouette = 0.0;
  double nn_dist_cv = 0.0;
};

// One grid point after aggregating runs by the median of each metric.
struct SweepCell {
  double perplexity = 0.0;
  int max_iters = 0;
  double final_kl = 0.0;
  double silhouette_at_k = 0.0;
  double nn_dist_cv = 0.0;
  DistributionForm form = DistributionForm::uniform;
  std::uint64_t base_seed = 0;
  std::vector<SweepRun> runs;
};

// Coefficient of variation (population std / mean) of nearest-neighbor
// distances; 0 when all points coincide.
double nn_dist_cv(const Matrix& points);

// Pure threshold function of the two metrics.
DistributionForm classify_from_metrics(double silhouette_at_k, double nn_cv,
                                       const SweepThresholds& thresholds = {});

struct ClassifyResult {
  DistributionForm form = DistributionForm::uniform;
  double silhouette = 0.0;
  double nn_cv = 0.0;
};

// k-means at k on the embedding, then the threshold rule. Requires n >= 2k.
ClassifyResult classify_distribution(const Matrix& points, int k, std::uint64_t seed,
                                     const SweepThresholds& thresholds = {});

// Grid of (perplexity, iteration budget) x seeds. Each run uses derived seed
// base_seed + seed_index; a cell aggregates its runs by median. Cells come
// back in grid order (perplexities outer, budgets inner) regardless of the
// number of worker threads. max_threads 0 reads RISKMAP_THREADS, falling
// back to the hardware concurrency.
std::vector<SweepCell> run_sweep(const FeatureMatrix& fm, const std::vector<double>& perplexities,
                                 const std::vector<int>& iter_budgets, int k, int seed_count,
                                 std::uint64_t base_seed,
                                 const SweepThresholds& thresholds = {}, int max_threads = 0);

// CSV: perplexity,iters,final_kl,silhouette,nn_cv,form
void write_sweep_csv(const std::vector<SweepCell>& cells, std::ostream& out);

// Aligned text table, one column per (perplexity, iters) pair.
std::string sweep_table(const std::vector<SweepCell>& cells);

}  // namespace riskmap
