#include "riskmap/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace riskmap {

namespace {

// One pass of cyclic Jacobi over all off-diagonal pairs.
double jacobi_sweep(Matrix& a, Matrix& v) {
  const std::size_t n = a.rows();
  double off = 0.0;
  for (std::size_t p = 0; p + 1 < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      const double apq = a(p, q);
      if (apq == 0.0) continue;
      const double app = a(p, p), aqq = a(q, q);
      const double tau = (aqq - app) / (2.0 * apq);
      // smaller-magnitude root keeps the rotation angle below pi/4
      const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
      const double c = 1.0 / std::sqrt(1.0 + t * t);
      const double s = t * c;

      for (std::size_t k = 0; k < n; ++k) {
        const double akp = a(k, p), akq = a(k, q);
        a(k, p) = c * akp - s * akq;
        a(k, q) = s * akp + c * akq;
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double apk = a(p, k), aqk = a(q, k);
        a(p, k) = c * apk - s * aqk;
        a(q, k) = s * apk + c * aqk;
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double vkp = v(k, p), vkq = v(k, q);
        v(k, p) = c * vkp - s * vkq;
        v(k, q) = s * vkp + c * vkq;
      }
    }
  }
  for (std::size_t p = 0; p + 1 < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
  }
  return off;
}

void fix_sign(double* vec, std::size_t d) {
  std::size_t arg = 0;
  for (std::size_t j = 1; j < d; ++j) {
    if (std::abs(vec[j]) > std::abs(vec[arg])) arg = j;
  }
  if (vec[arg] < 0.0) {
    for (std::size_t j = 0; j < d; ++j) vec[j] = -vec[j];
  }
}

}  // namespace

SymmetricEigen jacobi_symmetric_eigen(const Matrix& input) {
  const std::size_t n = input.rows();
  if (n == 0 || input.cols() != n) throw std::invalid_argument("matrix must be square");

  Matrix a = input;
  Matrix v(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double scale = 0.0;
  for (double x : a.data()) scale = std::max(scale, std::abs(x));
  const double tol = std::max(scale, 1.0) * 1e-28;  // squared off-diagonal norm

  for (int sweep = 0; sweep < 100; ++sweep) {
    if (jacobi_sweep(a, v) <= tol) break;
  }

  SymmetricEigen out;
  out.values.resize(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  std::stable_sort(order.begin(), order.end(),
                   [&diag](std::size_t x, std::size_t y) { return diag[x] > diag[y]; });

  out.vectors = Matrix(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    out.values[r] = diag[order[r]];
    for (std::size_t j = 0; j < n; ++j) out.vectors(r, j) = v(j, order[r]);
  }
  return out;
}

PcaModel pca_fit(const FeatureMatrix& fm) {
  const std::size_t n = fm.n(), d = fm.d();
  if (n < 2) throw std::invalid_argument("pca_fit needs at least 2 rows");
  if (d < 2) throw std::invalid_argument("pca_fit needs at least 2 columns");
  if (!all_finite(fm.values)) throw std::invalid_argument("non-finite input to pca_fit");

  PcaModel model;
  model.column_means.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += fm.values(i, j);
    model.column_means[j] = mean / static_cast<double>(n);
  }

  Matrix cov(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = j; k < d; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        s += (fm.values(i, j) - model.column_means[j]) * (fm.values(i, k) - model.column_means[k]);
      }
      s /= static_cast<double>(n - 1);
      cov(j, k) = s;
      cov(k, j) = s;
    }
  }

  const SymmetricEigen eig = jacobi_symmetric_eigen(cov);

  double trace = 0.0;
  for (std::size_t j = 0; j < d; ++j) trace += cov(j, j);

  model.components = Matrix(2, d);
  for (int c = 0; c < 2; ++c) {
    double lambda = eig.values[c];
    if (lambda < -1e-10) throw std::logic_error("covariance produced a negative eigenvalue");
    lambda = std::max(lambda, 0.0);
    model.eigenvalues[c] = lambda;
    model.explained_variance_ratio[c] = trace > 0.0 ? std::min(lambda / trace, 1.0) : 0.0;
    for (std::size_t j = 0; j < d; ++j) model.components(c, j) = eig.vectors(c, j);
    fix_sign(model.components.row(c), d);
  }
  return model;
}

Embedding pca_project(const PcaModel& model, const FeatureMatrix& fm) {
  const std::size_t d = model.components.cols();
  if (fm.d() != d) {
    throw std::invalid_argument("dimension mismatch: model has " + std::to_string(d) +
                                " columns, matrix has " + std::to_string(fm.d()));
  }
  Embedding e;
  e.region_ids = fm.region_ids;
  e.coords = Matrix(fm.n(), 2);
  for (std::size_t i = 0; i < fm.n(); ++i) {
    for (int c = 0; c < 2; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        s += (fm.values(i, j) - model.column_means[j]) * model.components(c, j);
      }
      e.coords(i, c) = s;
    }
  }
  return e;
}

std::vector<std::pair<std::string, double>> rank_regions(const Embedding& scores) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(scores.n());
  for (std::size_t i = 0; i < scores.n(); ++i) {
    out.emplace_back(scores.region_ids[i], scores.coords(i, 0));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

}  // namespace riskmap
