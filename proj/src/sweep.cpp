#include "riskmap/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "riskmap/cluster.hpp"

namespace riskmap {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int resolve_threads(int max_threads) {
  if (max_threads > 0) return max_threads;
  if (const char* env = std::getenv("RISKMAP_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string format_value(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

const char* to_string(DistributionForm form) {
  switch (form) {
    case DistributionForm::uniform: return "uniform";
    case DistributionForm::clustered: return "clustered";
    case DistributionForm::discrete: return "discrete";
  }
  return "?";
}

double nn_dist_cv(const Matrix& points) {
  const std::size_t n = points.rows();
  if (n < 2) throw std::invalid_argument("need at least 2 points");
  std::vector<double> nn(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = points(i, 0) - points(j, 0);
      const double dy = points(i, 1) - points(j, 1);
      const double d = std::sqrt(dx * dx + dy * dy);
      nn[i] = std::min(nn[i], d);
      nn[j] = std::min(nn[j], d);
    }
  }
  double mean = 0.0;
  for (double d : nn) mean += d;
  mean /= static_cast<double>(n);
  if (mean == 0.0) return 0.0;
  double var = 0.0;
  for (double d : nn) var += (d - mean) * (d - mean);
  return std::sqrt(var / static_cast<double>(n)) / mean;
}

DistributionForm classify_from_metrics(double silhouette_at_k, double nn_cv,
                                       const SweepThresholds& thresholds) {
  if (silhouette_at_k >= thresholds.clustered_silhouette) return DistributionForm::clustered;
  if (nn_cv >= thresholds.discrete_nn_cv) return DistributionForm::discrete;
  return DistributionForm::uniform;
}

ClassifyResult classify_distribution(const Matrix& points, int k, std::uint64_t seed,
                                     const SweepThresholds& thresholds) {
  if (points.rows() < 2 * static_cast<std::size_t>(k)) {
    throw std::invalid_argument("need n >= 2k points to classify");
  }
  const Clustering clustering = kmeans_fit(points, k, 10, seed);
  ClassifyResult res;
  res.silhouette = silhouette(points, clustering.labels);
  res.nn_cv = nn_dist_cv(points);
  res.form = classify_from_metrics(res.silhouette, res.nn_cv, thresholds);
  return res;
}

std::vector<SweepCell> run_sweep(const FeatureMatrix& fm, const std::vector<double>& perplexities,
                                 const std::vector<int>& iter_budgets, int k, int seed_count,
                                 std::uint64_t base_seed, const SweepThresholds& thresholds,
                                 int max_threads) {
  if (perplexities.empty() || iter_budgets.empty()) {
    throw std::invalid_argument("empty sweep grid");
  }
  if (seed_count < 1) throw std::invalid_argument("seed_count must be >= 1");
  if (k < 2) throw std::invalid_argument("sweep needs k >= 2");
  if (fm.n() < 2 * static_cast<std::size_t>(k)) {
    throw std::invalid_argument("sweep needs n >= 2k rows");
  }
  for (double p : perplexities) {
    if (!(p > 0.0) || p >= static_cast<double>(fm.n())) {
      throw std::invalid_argument("perplexity must be < n (n = " + std::to_string(fm.n()) + ")");
    }
  }

  struct Task {
    std::size_t cell;
    std::uint64_t seed;
    double perplexity;
    int iters;
  };
  std::vector<Task> tasks;
  const std::size_t cell_count = perplexities.size() * iter_budgets.size();
  for (std::size_t pi = 0; pi < perplexities.size(); ++pi) {
    for (std::size_t li = 0; li < iter_budgets.size(); ++li) {
      const std::size_t cell = pi * iter_budgets.size() + li;
      for (int s = 0; s < seed_count; ++s) {
        tasks.push_back({cell, base_seed + static_cast<std::uint64_t>(s), perplexities[pi],
                         iter_budgets[li]});
      }
    }
  }

  std::vector<SweepRun> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  const auto worker = [&] {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size() || failed.load()) return;
      try {
        const Task& task = tasks[t];
        TsneConfig cfg;
        cfg.perplexity = task.perplexity;
        cfg.max_iters = task.iters;
        cfg.exaggeration_iters = std::min(cfg.exaggeration_iters, task.iters);
        cfg.seed = task.seed;
        const Embedding e = run_tsne(fm, cfg);

        const Clustering clustering = kmeans_fit(e.coords, k, 10, task.seed + 1);
        SweepRun run;
        run.seed = task.seed;
        run.final_kl = e.cost_trace.back().kl;
        run.silhouette = silhouette(e.coords, clustering.labels);
        run.nn_dist_cv = nn_dist_cv(e.coords);
        results[t] = run;
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };

  const int threads = std::min<int>(resolve_threads(max_threads), static_cast<int>(tasks.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) std::rethrow_exception(failure);

  std::vector<SweepCell> cells(cell_count);
  for (std::size_t pi = 0; pi < perplexities.size(); ++pi) {
    for (std::size_t li = 0; li < iter_budgets.size(); ++li) {
      const std::size_t c = pi * iter_budgets.size() + li;
      SweepCell& cell = cells[c];
      cell.perplexity = perplexities[pi];
      cell.max_iters = iter_budgets[li];
      cell.base_seed = base_seed;
    }
  }
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    cells[tasks[t].cell].runs.push_back(results[t]);
  }
  for (SweepCell& cell : cells) {
    std::vector<double> kl, sil, cv;
    for (const SweepRun& run : cell.runs) {
      kl.push_back(run.final_kl);
      sil.push_back(run.silhouette);
      cv.push_back(run.nn_dist_cv);
    }
    cell.final_kl = median(kl);
    cell.silhouette_at_k = median(sil);
    cell.nn_dist_cv = median(cv);
    cell.form = classify_from_metrics(cell.silhouette_at_k, cell.nn_dist_cv, thresholds);
  }
  return cells;
}

void write_sweep_csv(const std::vector<SweepCell>& cells, std::ostream& out) {
  out << "perplexity,iters,final_kl,silhouette,nn_cv,form\n";
  for (const SweepCell& c : cells) {
    out << format_value(c.perplexity) << ',' << c.max_iters << ',' << format_value(c.final_kl)
        << ',' << format_value(c.silhouette_at_k) << ',' << format_value(c.nn_dist_cv) << ','
        << to_string(c.form) << '\n';
  }
}

std::string sweep_table(const std::vector<SweepCell>& cells) {
  const std::size_t width = 14;
  const auto pad = [width](std::string s) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
  };
  const auto num = [&pad](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return pad(buf);
  };

  std::ostringstream out;
  out << pad("perplexity");
  for (const SweepCell& c : cells) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "P=%.1f", c.perplexity);
    out << pad(buf);
  }
  out << '\n' << pad("iterations");
  for (const SweepCell& c : cells) out << pad("L=" + std::to_string(c.max_iters));
  out << '\n' << pad("form");
  for (const SweepCell& c : cells) out << pad(to_string(c.form));
  out << '\n' << pad("silhouette");
  for (const SweepCell& c : cells) out << num(c.silhouette_at_k);
  out << '\n' << pad("nn_cv");
  for (const SweepCell& c : cells) out << num(c.nn_dist_cv);
  out << '\n' << pad("final_kl");
  for (const SweepCell& c : cells) out << num(c.final_kl);
  out << '\n';
  return out.str();
}

}  // namespace riskmap
