#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "riskmap/index.hpp"
#include "riskmap/matrix.hpp"

namespace riskmap {

enum class KmeansInit : int { kmeanspp = 0, random_points = 1 };

const char* to_string(KmeansInit init);

struct Clustering {
  int k = 0;
  std::vector<int> labels;  // length n, values in 0..k-1, every id used
  Matrix centers;           // k x 2
  double inertia = 0.0;
  int n_iter = 0;
  std::uint64_t seed = 0;
};

// Lloyd iterations from k-means++ (or uniform random) seeding, best of
// `restarts` by inertia with ties broken by restart index. Stops when the
// relative inertia change drops below 1e-6 or after 300 iterations. Empty
// clusters are repaired by promoting the point farthest from its center.
// Inertia is checked to be non-increasing every iteration.
Clustering kmeans_fit(const Matrix& points, int k, int restarts = 10, std::uint64_t seed = 0,
                      KmeansInit init = KmeansInit::kmeanspp);

// Mean silhouette over points: (b - a) / max(a, b) with a the mean
// intra-cluster distance and b the best neighboring cluster mean distance.
// Singleton clusters contribute 0. Requires k >= 2 and every cluster
// nonempty.
double silhouette(const Matrix& points, const std::vector<int>& labels);

// Chance-corrected agreement between two labelings. Both-degenerate identical
// labelings (single cluster or all singletons) score 1.
double adjusted_rand(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

// Clusters ranked by mean raw business coefficient, tier 0 (= "I") highest.
struct TierAssignment {
  std::vector<int> tier_of_cluster;                      // cluster id -> tier index
  std::vector<std::pair<std::string, int>> region_tiers;  // aligned with clustering rows
  bool tie_flagged = false;                               // equal cluster means hit the id tie-break
};

// `fm` must cover the same rows the clustering was fit on. Standardized
// matrices are mapped back to raw coefficients through their stored
// means/stds before averaging.
TierAssignment assign_tiers(const Clustering& clustering, const FeatureMatrix& fm);

// 0 -> "I", 1 -> "II", ...
std::string roman_tier(int tier_index);

}  // namespace riskmap
