#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "riskmap/embedding.hpp"
#include "riskmap/index.hpp"
#include "riskmap/matrix.hpp"

namespace riskmap {

// Top-2 principal components of a feature matrix. Covariance uses 1/(n-1);
// each component's largest-magnitude entry is made positive so results are
// deterministic.
struct PcaModel {
  Matrix components;  // 2 x d, orthonormal rows
  std::array<double, 2> eigenvalues{};
  std::array<double, 2> explained_variance_ratio{};
  std::vector<double> column_means;
};

// All eigenpairs of a symmetric matrix via cyclic Jacobi rotations.
// Eigenvalues descending; eigenvectors are the matching rows of `vectors`.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;  // row i is the eigenvector of values[i]
};
SymmetricEigen jacobi_symmetric_eigen(const Matrix& a);

PcaModel pca_fit(const FeatureMatrix& fm);

// Projects rows onto the two components after centering. Axis 1 reads as the
// overall development volume, axis 2 as business imbalance; that reading is
// documentation, not a guarantee.
Embedding pca_project(const PcaModel& model, const FeatureMatrix& fm);

// Regions by descending first-axis score; ties broken by region_id.
std::vector<std::pair<std::string, double>> rank_regions(const Embedding& scores);

}  // namespace riskmap
