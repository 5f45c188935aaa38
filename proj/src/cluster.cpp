#include "riskmap/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "riskmap/rng.hpp"

namespace riskmap {

namespace {

double sq_dist2(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
  const double dx = a(i, 0) - b(j, 0);
  const double dy = a(i, 1) - b(j, 1);
  return dx * dx + dy * dy;
}

Matrix seed_centers(const Matrix& points, int k, Rng& rng, KmeansInit init) {
  const std::size_t n = points.rows();
  Matrix centers(static_cast<std::size_t>(k), 2);

  if (init == KmeansInit::random_points) {
    // distinct uniform picks
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (int c = 0; c < k; ++c) {
      const std::size_t pick = static_cast<std::size_t>(c) + rng.below(n - c);
      std::swap(order[c], order[pick]);
      centers(c, 0) = points(order[c], 0);
      centers(c, 1) = points(order[c], 1);
    }
    return centers;
  }

  // k-means++: first uniform, then D^2 sampling
  const std::size_t first = rng.below(n);
  centers(0, 0) = points(first, 0);
  centers(0, 1) = points(first, 1);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist2(points, i, centers, 0);

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double cum = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (cum > r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);  // all remaining points coincide with a center
    }
    centers(c, 0) = points(pick, 0);
    centers(c, 1) = points(pick, 1);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist2(points, i, centers, static_cast<std::size_t>(c)));
    }
  }
  return centers;
}

struct LloydResult {
  std::vector<int> labels;
  Matrix centers;
  double inertia = 0.0;
  int n_iter = 0;
};

LloydResult lloyd(const Matrix& points, int k, Matrix centers) {
  const std::size_t n = points.rows();
  LloydResult res;
  res.labels.assign(n, 0);
  res.centers = std::move(centers);

  double prev_inertia = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= 300; ++iter) {
    // assignment; ties to the lowest center id
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist2(points, i, res.centers, 0);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist2(points, i, res.centers, static_cast<std::size_t>(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      res.labels[i] = best;
    }

    // repair empty clusters with the point farthest from its center
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int label : res.labels) ++counts[static_cast<std::size_t>(label)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      std::size_t farthest = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(res.labels[i])] <= 1) continue;
        const double d =
            sq_dist2(points, i, res.centers, static_cast<std::size_t>(res.labels[i]));
        if (d > far_d) {
          far_d = d;
          farthest = i;
        }
      }
      --counts[static_cast<std::size_t>(res.labels[farthest])];
      res.labels[farthest] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      res.centers(c, 0) = points(farthest, 0);
      res.centers(c, 1) = points(farthest, 1);
    }

    // update step
    Matrix sums(static_cast<std::size_t>(k), 2, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      sums(res.labels[i], 0) += points(i, 0);
      sums(res.labels[i], 1) += points(i, 1);
    }
    for (int c = 0; c < k; ++c) {
      res.centers(c, 0) = sums(c, 0) / counts[static_cast<std::size_t>(c)];
      res.centers(c, 1) = sums(c, 1) / counts[static_cast<std::size_t>(c)];
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      inertia += sq_dist2(points, i, res.centers, static_cast<std::size_t>(res.labels[i]));
    }
    if (inertia > prev_inertia * (1.0 + 1e-9) + 1e-12) {
      throw std::logic_error("Lloyd inertia increased: " + std::to_string(prev_inertia) +
                             " -> " + std::to_string(inertia));
    }
    res.n_iter = iter;
    const bool converged =
        prev_inertia != std::numeric_limits<double>::infinity() &&
        (prev_inertia == 0.0 ? inertia == 0.0
                             : (prev_inertia - inertia) / prev_inertia < 1e-6);
    res.inertia = inertia;
    prev_inertia = inertia;
    if (converged) break;
  }
  return res;
}

}  // namespace

const char* to_string(KmeansInit init) {
  return init == KmeansInit::kmeanspp ? "kmeans++" : "random";
}

Clustering kmeans_fit(const Matrix& points, int k, int restarts, std::uint64_t seed,
                      KmeansInit init) {
  const std::size_t n = points.rows();
  if (points.cols() != 2) throw std::invalid_argument("kmeans_fit expects 2-D points");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (static_cast<std::size_t>(k) > n) throw std::invalid_argument("k must be <= n");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (!all_finite(points)) throw std::invalid_argument("non-finite points");

  Clustering best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Rng rng(seed + static_cast<std::uint64_t>(r));
    LloydResult res = lloyd(points, k, seed_centers(points, k, rng, init));
    if (res.inertia < best.inertia) {
      best.k = k;
      best.labels = std::move(res.labels);
      best.centers = std::move(res.centers);
      best.inertia = res.inertia;
      best.n_iter = res.n_iter;
      best.seed = seed;
    }
  }
  return best;
}

double silhouette(const Matrix& points, const std::vector<int>& labels) {
  const std::size_t n = points.rows();
  if (labels.size() != n) throw std::invalid_argument("labels length mismatch");
  int k = 0;
  for (int label : labels) k = std::max(k, label + 1);
  if (k < 2) throw std::invalid_argument("silhouette needs k >= 2");
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int label : labels) {
    if (label < 0) throw std::invalid_argument("negative label");
    ++counts[static_cast<std::size_t>(label)];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw std::invalid_argument("empty cluster " + std::to_string(c));
    }
  }

  double total = 0.0;
  std::vector<double> mean_to(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    const int own = labels[i];
    if (counts[static_cast<std::size_t>(own)] == 1) continue;  // singleton contributes 0

    std::fill(mean_to.begin(), mean_to.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      mean_to[static_cast<std::size_t>(labels[j])] += std::sqrt(sq_dist2(points, i, points, j));
    }
    const double a =
        mean_to[static_cast<std::size_t>(own)] / (counts[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own) continue;
      b = std::min(b, mean_to[static_cast<std::size_t>(c)] / counts[static_cast<std::size_t>(c)]);
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

double adjusted_rand(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size()) throw std::invalid_argument("labelings differ in length");
  const std::size_t n = labels_a.size();
  if (n == 0) throw std::invalid_argument("empty labelings");

  int ka = 0, kb = 0;
  for (int label : labels_a) ka = std::max(ka, label + 1);
  for (int label : labels_b) kb = std::max(kb, label + 1);

  Matrix table(static_cast<std::size_t>(ka), static_cast<std::size_t>(kb), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    table(static_cast<std::size_t>(labels_a[i]), static_cast<std::size_t>(labels_b[i])) += 1.0;
  }
  const auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };

  double index = 0.0;
  for (double v : table.data()) index += comb2(v);
  double sum_a = 0.0;
  for (int r = 0; r < ka; ++r) {
    double row = 0.0;
    for (int c = 0; c < kb; ++c) row += table(r, c);
    sum_a += comb2(row);
  }
  double sum_b = 0.0;
  for (int c = 0; c < kb; ++c) {
    double col = 0.0;
    for (int r = 0; r < ka; ++r) col += table(r, c);
    sum_b += comb2(col);
  }

  const double expected = sum_a * sum_b / comb2(static_cast<double>(n));
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;  // both degenerate; identical partitions by construction
  return (index - expected) / denom;
}

TierAssignment assign_tiers(const Clustering& clustering, const FeatureMatrix& fm) {
  const std::size_t n = fm.n();
  if (clustering.labels.size() != n) {
    throw std::invalid_argument("clustering and feature matrix cover different rows");
  }
  const int k = clustering.k;

  // cluster means of raw coefficients, de-standardizing when needed
  std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < fm.d(); ++j) {
      double v = fm.values(i, j);
      if (fm.standardized) v = v * fm.column_stds[j] + fm.column_means[j];
      row_sum += v;
    }
    sums[static_cast<std::size_t>(clustering.labels[i])] += row_sum / static_cast<double>(fm.d());
    ++counts[static_cast<std::size_t>(clustering.labels[i])];
  }
  std::vector<double> means(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    means[static_cast<std::size_t>(c)] =
        counts[static_cast<std::size_t>(c)] > 0
            ? sums[static_cast<std::size_t>(c)] / counts[static_cast<std::size_t>(c)]
            : -std::numeric_limits<double>::infinity();
  }

  std::vector<int> order(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) order[static_cast<std::size_t>(c)] = c;
  std::stable_sort(order.begin(), order.end(), [&means](int x, int y) {
    if (means[static_cast<std::size_t>(x)] != means[static_cast<std::size_t>(y)]) {
      return means[static_cast<std::size_t>(x)] > means[static_cast<std::size_t>(y)];
    }
    return x < y;  // tie-break by cluster id
  });

  TierAssignment out;
  out.tier_of_cluster.assign(static_cast<std::size_t>(k), 0);
  for (int tier = 0; tier < k; ++tier) {
    out.tier_of_cluster[static_cast<std::size_t>(order[static_cast<std::size_t>(tier)])] = tier;
  }
  for (int c = 0; c + 1 < k; ++c) {
    if (means[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])] ==
        means[static_cast<std::size_t>(order[static_cast<std::size_t>(c + 1)])]) {
      out.tie_flagged = true;
    }
  }
  out.region_tiers.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.region_tiers.emplace_back(
        fm.region_ids[i],
        out.tier_of_cluster[static_cast<std::size_t>(clustering.labels[i])]);
  }
  return out;
}

std::string roman_tier(int tier_index) {
  if (tier_index < 0) throw std::invalid_argument("negative tier");
  static const char* ones[] = {"", "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX"};
  static const char* tens[] = {"", "X", "XX", "XXX", "XL", "L"};
  const int v = tier_index + 1;
  if (v >= 60) return std::to_string(v);  // past any plausible tier count
  return std::string(tens[v / 10]) + ones[v % 10];
}

}  // namespace riskmap
