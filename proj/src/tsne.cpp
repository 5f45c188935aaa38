#include "riskmap/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "riskmap/errors.hpp"
#include "riskmap/rng.hpp"

namespace riskmap {

namespace {

constexpr double kLn2 = 0.6931471805599453;

void sq_dists_into(const Matrix& points, Matrix& out) {
  const std::size_t n = points.rows(), d = points.cols();
  for (std::size_t i = 0; i < n; ++i) {
    out(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = points(i, k) - points(j, k);
        s += diff * diff;
      }
      out(i, j) = s;
      out(j, i) = s;
    }
  }
}

// Student-t kernel weights and the normalized floored Q. Returns sum of all
// off-diagonal weights.
double q_matrix_into(const Matrix& d2, Matrix& w, Matrix& q) {
  const std::size_t n = d2.rows();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w(i, i) = 0.0;
    q(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double kernel = 1.0 / (1.0 + d2(i, j));
      w(i, j) = kernel;
      w(j, i) = kernel;
      sum += 2.0 * kernel;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double value = std::max(w(i, j) / sum, kProbFloor);
      q(i, j) = value;
      q(j, i) = value;
    }
  }
  return sum;
}

// grad_i = 4 sum_j (p_ij - q_ij) w_ij (y_i - y_j)
void gradient_into(const Matrix& p, const Matrix& q, const Matrix& w, const Matrix& y,
                   Matrix& grad) {
  const std::size_t n = y.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double gx = 0.0, gy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double mult = (p(i, j) - q(i, j)) * w(i, j);
      gx += mult * (y(i, 0) - y(j, 0));
      gy += mult * (y(i, 1) - y(j, 1));
    }
    grad(i, 0) = 4.0 * gx;
    grad(i, 1) = 4.0 * gy;
  }
}

// Shannon entropy (bits) of the Gaussian conditional over squared distances
// at the given sigma, plus the distribution itself.
double conditional_row(std::span<const double> sq_dists, double sigma,
                       std::vector<double>& probs) {
  const double beta = 1.0 / (2.0 * sigma * sigma);
  const std::size_t m = sq_dists.size();
  probs.resize(m);

  double max_exponent = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    max_exponent = std::max(max_exponent, -beta * sq_dists[j]);
  }
  double sum = 0.0;
  double weighted_d = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double e = std::exp(-beta * sq_dists[j] - max_exponent);
    probs[j] = e;
    sum += e;
    weighted_d += e * sq_dists[j];
  }
  for (std::size_t j = 0; j < m; ++j) probs[j] /= sum;
  // H = ln(sum) + shift + beta * E[d]  (nats), converted to bits
  const double h_nats = std::log(sum) + max_exponent + beta * weighted_d / sum;
  return h_nats / kLn2;
}

AffinityMatrix joint_from_dists(const Matrix& d2, double perplexity) {
  const std::size_t n = d2.rows();
  if (n < 2) throw std::invalid_argument("need at least 2 points");
  if (!(perplexity > 0.0) || perplexity >= static_cast<double>(n)) {
    throw std::invalid_argument("perplexity must be < n (n = " + std::to_string(n) + ")");
  }

  // conditional rows
  Matrix cond(n, n, 0.0);
  int warnings = 0;
  std::vector<double> row(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row[k++] = d2(i, j);
    }
    const SigmaResult res = calibrate_sigma(row, perplexity);
    if (res.warning) ++warnings;
    k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cond(i, j) = res.probs[k++];
    }
  }

  AffinityMatrix out;
  out.calibration_warnings = warnings;
  out.p = Matrix(n, n, 0.0);
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double value = std::max((cond(i, j) + cond(j, i)) / denom, kProbFloor);
      out.p(i, j) = value;
      out.p(j, i) = value;
    }
  }
  return out;
}

}  // namespace

Matrix pairwise_sq_dists(const Matrix& points) {
  if (points.rows() < 2) throw std::invalid_argument("need at least 2 points");
  if (!all_finite(points)) throw std::invalid_argument("non-finite input to pairwise_sq_dists");
  Matrix out(points.rows(), points.rows());
  sq_dists_into(points, out);
  return out;
}

SigmaResult calibrate_sigma(std::span<const double> sq_dist_row, double perplexity) {
  const std::size_t m = sq_dist_row.size();
  if (m == 0) throw std::invalid_argument("empty distance row");
  if (!(perplexity > 0.0) || perplexity >= static_cast<double>(m) + 1.0) {
    throw std::invalid_argument("perplexity must be positive and < n");
  }
  double mean_positive = 0.0;
  std::size_t positive = 0;
  for (double d : sq_dist_row) {
    if (d > 0.0) {
      mean_positive += d;
      ++positive;
    }
  }
  if (positive == 0) throw std::invalid_argument("all distances are zero");
  mean_positive /= static_cast<double>(positive);

  const double target = std::log2(perplexity);
  const double tol = 1e-5;

  SigmaResult res;
  res.sigma = std::sqrt(mean_positive / 2.0);
  res.entropy_bits = conditional_row(sq_dist_row, res.sigma, res.probs);
  if (std::abs(res.entropy_bits - target) <= tol) return res;

  // entropy is nondecreasing in sigma; bracket the crossing by doubling
  double lo = res.sigma, hi = res.sigma;
  bool bracketed = false;
  if (res.entropy_bits < target) {
    for (int step = 0; step < 64; ++step) {
      hi *= 2.0;
      if (conditional_row(sq_dist_row, hi, res.probs) >= target) {
        lo = hi / 2.0;
        bracketed = true;
        break;
      }
    }
  } else {
    for (int step = 0; step < 64; ++step) {
      lo /= 2.0;
      if (conditional_row(sq_dist_row, lo, res.probs) <= target) {
        hi = lo * 2.0;
        bracketed = true;
        break;
      }
    }
  }
  if (!bracketed) {
    // target out of reach; return the nearest end of the expansion
    res.sigma = res.entropy_bits < target ? hi : lo;
    res.entropy_bits = conditional_row(sq_dist_row, res.sigma, res.probs);
    res.warning = true;
    return res;
  }

  for (int step = 0; step < 50; ++step) {
    const double mid = 0.5 * (lo + hi);
    const double h = conditional_row(sq_dist_row, mid, res.probs);
    res.sigma = mid;
    res.entropy_bits = h;
    if (std::abs(h - target) <= tol) return res;
    if (h < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  res.warning = std::abs(res.entropy_bits - target) > tol;
  return res;
}

AffinityMatrix joint_affinities(const Matrix& points, double perplexity) {
  return joint_from_dists(pairwise_sq_dists(points), perplexity);
}

AffinityMatrix joint_affinities(const FeatureMatrix& fm, double perplexity) {
  return joint_affinities(fm.values, perplexity);
}

AffinityMatrix low_dim_affinities(const Matrix& y) {
  if (y.rows() < 2) throw std::invalid_argument("need at least 2 points");
  if (!all_finite(y)) throw std::invalid_argument("non-finite coordinates");
  const std::size_t n = y.rows();
  Matrix d2(n, n);
  sq_dists_into(y, d2);
  AffinityMatrix out;
  out.p = Matrix(n, n);
  Matrix w(n, n);
  q_matrix_into(d2, w, out.p);
  return out;
}

double kl_cost(const AffinityMatrix& P, const AffinityMatrix& Q) {
  const std::size_t n = P.n();
  if (Q.n() != n) throw std::invalid_argument("P and Q sizes differ");
  double cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cost += P.p(i, j) * std::log(P.p(i, j) / Q.p(i, j));
    }
  }
  return cost;
}

Matrix kl_gradient(const AffinityMatrix& P, const AffinityMatrix& Q, const Matrix& y) {
  const std::size_t n = y.rows();
  if (P.n() != n || Q.n() != n || y.cols() != 2) {
    throw std::invalid_argument("shape mismatch in kl_gradient");
  }
  Matrix d2(n, n);
  sq_dists_into(y, d2);
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    w(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double kernel = 1.0 / (1.0 + d2(i, j));
      w(i, j) = kernel;
      w(j, i) = kernel;
    }
  }
  Matrix grad(n, 2);
  gradient_into(P.p, Q.p, w, y, grad);
  return grad;
}

Embedding run_tsne(const FeatureMatrix& fm, const TsneConfig& cfg) {
  const std::size_t n = fm.n();
  if (n < 2) throw std::invalid_argument("need at least 2 rows");
  if (!(cfg.perplexity > 0.0) || cfg.perplexity >= static_cast<double>(n)) {
    throw std::invalid_argument("perplexity must be < n (n = " + std::to_string(n) + ")");
  }
  if (cfg.exaggeration_iters > cfg.max_iters) {
    throw std::invalid_argument("exaggeration_iters must be <= max_iters");
  }
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(cfg.exaggeration_factor >= 1.0)) {
    throw std::invalid_argument("exaggeration_factor must be >= 1");
  }
  if (cfg.max_iters < 0) throw std::invalid_argument("max_iters must be nonnegative");
  if (!(cfg.min_gain > 0.0)) throw std::invalid_argument("min_gain must be positive");

  const AffinityMatrix P = joint_affinities(fm, cfg.perplexity);

  Embedding e;
  e.config_used = cfg;
  e.region_ids = fm.region_ids;
  e.coords = Matrix(n, 2);
  Rng rng(cfg.seed);
  for (std::size_t i = 0; i < n; ++i) {
    e.coords(i, 0) = rng.normal(0.0, 1e-4);
    e.coords(i, 1) = rng.normal(0.0, 1e-4);
  }

  Matrix velocity(n, 2, 0.0);
  Matrix gains(n, 2, 1.0);
  Matrix grad(n, 2);
  Matrix d2(n, n);
  Matrix w(n, n);
  AffinityMatrix Q;
  Q.p = Matrix(n, n);

  // exaggerated copy drives the gradient; the true P is kept for the trace
  AffinityMatrix P_work = P;
  const bool exaggerate = cfg.exaggeration_iters > 0 && cfg.exaggeration_factor > 1.0;
  if (exaggerate) {
    for (double& v : P_work.p.data()) v *= cfg.exaggeration_factor;
  }

  const auto record = [&](int iter) {
    if (!all_finite(e.coords)) throw DivergenceError(iter, cfg.learning_rate);
    sq_dists_into(e.coords, d2);
    q_matrix_into(d2, w, Q.p);
    const double kl = kl_cost(P, Q);
    if (!std::isfinite(kl)) throw DivergenceError(iter, cfg.learning_rate);
    e.cost_trace.push_back({iter, kl});
  };

  record(0);

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    if (exaggerate && iter == cfg.exaggeration_iters + 1) {
      P_work.p = P.p;  // release exaggeration
    }
    sq_dists_into(e.coords, d2);
    q_matrix_into(d2, w, Q.p);
    gradient_into(P_work.p, Q.p, w, e.coords, grad);

    const double momentum =
        iter <= cfg.momentum_switch_iter ? cfg.momentum_early : cfg.momentum_late;
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < 2; ++c) {
        const bool disagree = (grad(i, c) > 0.0) != (velocity(i, c) > 0.0);
        double gain = disagree ? gains(i, c) + 0.2 : gains(i, c) * 0.8;
        if (gain < cfg.min_gain) gain = cfg.min_gain;
        gains(i, c) = gain;
        velocity(i, c) =
            momentum * velocity(i, c) - cfg.learning_rate * gain * grad(i, c);
        e.coords(i, c) += velocity(i, c);
      }
    }
    // keep the map centered
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean_x += e.coords(i, 0);
      mean_y += e.coords(i, 1);
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      e.coords(i, 0) -= mean_x;
      e.coords(i, 1) -= mean_y;
    }

    if (iter % 50 == 0 || iter == cfg.max_iters ||
        (exaggerate && iter == cfg.exaggeration_iters)) {
      record(iter);
    }
  }
  return e;
}

}  // namespace riskmap
