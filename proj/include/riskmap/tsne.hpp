#pragma once

#include <span>
#include <vector>

#include "riskmap/embedding.hpp"
#include "riskmap/index.hpp"
#include "riskmap/matrix.hpp"

namespace riskmap {

// Probabilities below this are clamped up to protect the logarithms.
inline constexpr double kProbFloor = 1e-12;

// Symmetric joint probabilities with zero diagonal. The off-diagonal mass
// sums to 1 (up to the floor) before any exaggeration.
struct AffinityMatrix {
  Matrix p;                     // n x n
  int calibration_warnings = 0;  // rows whose perplexity target was unattainable

  std::size_t n() const { return p.rows(); }
};

// Bandwidth calibration result for one conditional row.
struct SigmaResult {
  double sigma = 0.0;
  std::vector<double> probs;   // conditional p_{j|i} over the other points, sums to 1
  double entropy_bits = 0.0;   // achieved Shannon entropy, base 2
  bool warning = false;        // target perplexity unattainable, nearest returned
};

// Squared Euclidean distances; symmetric with zero diagonal.
Matrix pairwise_sq_dists(const Matrix& points);
inline Matrix pairwise_sq_dists(const FeatureMatrix& fm) { return pairwise_sq_dists(fm.values); }

// Binary search for the Gaussian bandwidth whose conditional distribution over
// `sq_dist_row` (squared distances to the other points) has perplexity
// 2^H equal to the target: |H - log2(perplexity)| <= 1e-5. The bracket is
// found by doubling/halving, then up to 50 bisection steps. An unattainable
// target sets `warning` and returns the nearest achievable distribution.
SigmaResult calibrate_sigma(std::span<const double> sq_dist_row, double perplexity);

// High-dimensional joint affinities: per-row Gaussian conditionals calibrated
// to `perplexity`, symmetrized as (p_{j|i} + p_{i|j}) / 2n, floored at 1e-12.
AffinityMatrix joint_affinities(const FeatureMatrix& fm, double perplexity);
AffinityMatrix joint_affinities(const Matrix& points, double perplexity);

// Low-dimensional affinities under the Student-t kernel with one degree of
// freedom: q_ij = (1 + ||y_i - y_j||^2)^-1 normalized over all ordered pairs.
AffinityMatrix low_dim_affinities(const Matrix& y);

// KL(P || Q) = sum_{i != j} p_ij log(p_ij / q_ij), natural log.
double kl_cost(const AffinityMatrix& P, const AffinityMatrix& Q);

// Analytic gradient of kl_cost with respect to y:
// dC/dy_i = 4 sum_j (p_ij - q_ij) (y_i - y_j) (1 + ||y_i - y_j||^2)^-1.
Matrix kl_gradient(const AffinityMatrix& P, const AffinityMatrix& Q, const Matrix& y);

// Full optimization: Gaussian(0, 1e-4) initialization from cfg.seed, early
// exaggeration of P for the first exaggeration_iters updates, momentum
// schedule and per-parameter adaptive gains. The recorded cost trace always
// uses the un-exaggerated P (iteration 0, every 50th, the exaggeration
// release and the final iteration). Deterministic for a fixed (input, config,
// seed). Throws DivergenceError when the cost goes non-finite.
Embedding run_tsne(const FeatureMatrix& fm, const TsneConfig& cfg);

}  // namespace riskmap
