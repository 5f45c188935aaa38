// Acceptance suite. Runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion; exits with the number of failures.
//
//   acceptance <path-to-riskmap-cli> [--extended]
//
// --extended replaces the CI-capped city run with the full 5000-iteration
// configuration.

#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "riskmap/cluster.hpp"
#include "riskmap/index.hpp"
#include "riskmap/panel.hpp"
#include "riskmap/pca.hpp"
#include "riskmap/sweep.hpp"
#include "riskmap/synth.hpp"
#include "riskmap/tsne.hpp"

namespace fs = std::filesystem;
using namespace riskmap;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << name << " ("
            << detail << ")\n";
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix random_points(std::size_t n, std::size_t d, unsigned seed, double spread = 1.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, spread);
  Matrix m(n, d);
  for (double& v : m.data()) v = gauss(rng);
  return m;
}

FeatureMatrix wrap(const Matrix& values) {
  FeatureMatrix fm;
  fm.values = values;
  fm.region_ids.resize(values.rows());
  for (std::size_t i = 0; i < values.rows(); ++i) fm.region_ids[i] = "R" + std::to_string(i);
  return fm;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 == 1 ? v[v.size() / 2]
                           : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

// ---- criterion 1: analytic gradient vs central finite differences ---------
void criterion_1() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (unsigned trial = 0; trial < 20; ++trial) {
    const auto P = joint_affinities(random_points(10, 4, 1000 + trial), 3.0);
    Matrix y = random_points(10, 2, 2000 + trial);
    const Matrix analytic = kl_gradient(P, low_dim_affinities(y), y);
    const double h = 1e-5;
    for (std::size_t i = 0; i < 10; ++i) {
      for (int c = 0; c < 2; ++c) {
        const double saved = y(i, c);
        y(i, c) = saved + h;
        const double plus = kl_cost(P, low_dim_affinities(y));
        y(i, c) = saved - h;
        const double minus = kl_cost(P, low_dim_affinities(y));
        y(i, c) = saved;
        const double fd = (plus - minus) / (2.0 * h);
        worst = std::max(worst, std::abs(analytic(i, c) - fd) /
                                    std::max({std::abs(analytic(i, c)), std::abs(fd), 1e-8}));
      }
    }
  }
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "20 instances n=10, max relative error " << worst << ", " << elapsed << " s";
  report(1, "analytic KL gradient matches finite differences", worst < 1e-4 && elapsed < 5.0,
         detail.str());
}

// ---- criterion 2: affinity normalization and perplexity calibration -------
void criterion_2() {
  bool pass = true;
  std::ostringstream detail;

  for (const auto& [n, perplexity] :
       std::vector<std::pair<std::size_t, double>>{{40, 10.0}, {100, 25.0}, {60, 20.0}}) {
    const Matrix pts = random_points(n, 6, static_cast<unsigned>(3000 + n));
    const auto P = joint_affinities(pts, perplexity);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (P.p(i, j) != P.p(j, i)) pass = false;
        if (i == j && P.p(i, j) != 0.0) pass = false;
        if (i != j) sum += P.p(i, j);
      }
    }
    if (std::abs(sum - 1.0) > 1e-10) pass = false;

    const Matrix d2 = pairwise_sq_dists(pts);
    std::vector<double> row(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t k = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) row[k++] = d2(i, j);
      }
      const auto res = calibrate_sigma(row, perplexity);
      if (!res.warning && std::abs(res.entropy_bits - std::log2(perplexity)) > 1e-5) pass = false;
    }

    const auto Q = low_dim_affinities(random_points(n, 2, static_cast<unsigned>(4000 + n)));
    double qsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (Q.p(i, j) != Q.p(j, i)) pass = false;
        if (i != j) qsum += Q.p(i, j);
      }
    }
    if (std::abs(qsum - 1.0) > 1e-10) pass = false;
    detail << "n=" << n << " sumP err " << std::abs(sum - 1.0) << "; ";
  }
  report(2, "P/Q symmetric, unit mass, rows hit the perplexity target", pass, detail.str());
}

// ---- criterion 3: brute-force oracle equivalence ---------------------------
void criterion_3() {
  bool pass = true;
  double worst = 0.0;
  const auto track = [&](double err) {
    worst = std::max(worst, err);
    if (err > 1e-10) pass = false;
  };

  for (unsigned trial = 0; trial < 10; ++trial) {
    const Matrix pts = random_points(8 + trial % 3, 3, 5000 + trial);
    const Matrix d2 = pairwise_sq_dists(pts);
    const Matrix d2_ref = oracles::pairwise_sq_dists(pts);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
      for (std::size_t j = 0; j < pts.rows(); ++j) track(std::abs(d2(i, j) - d2_ref(i, j)));
    }

    const Matrix y = random_points(pts.rows(), 2, 6000 + trial);
    const auto Q = low_dim_affinities(y);
    const Matrix q_ref = oracles::student_t_q(y);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      for (std::size_t j = 0; j < y.rows(); ++j) track(std::abs(Q.p(i, j) - q_ref(i, j)));
    }

    const auto P = joint_affinities(pts, 3.0);
    track(std::abs(kl_cost(P, Q) - oracles::kl(P.p, q_ref)));

    std::mt19937 rng(7000 + trial);
    std::vector<int> labels(pts.rows());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      labels[i] = static_cast<int>(i < 2 ? i : rng() % 3);  // keep clusters 0..2 nonempty
    }
    labels[2] = 2;
    track(std::abs(silhouette(y, labels) - oracles::silhouette(y, labels)));

    std::vector<int> other(labels);
    std::shuffle(other.begin(), other.end(), rng);
    track(std::abs(adjusted_rand(labels, other) - oracles::adjusted_rand(labels, other)));
  }
  std::ostringstream detail;
  detail << "distances, Q, KL, silhouette, ARI on n<=10; max abs gap " << worst;
  report(3, "implementations match naive oracles", pass, detail.str());
}

// ---- criterion 4: PCA vs dense eigendecomposition --------------------------
void criterion_4() {
  bool pass = true;
  double worst = 0.0;
  for (unsigned trial = 0; trial < 20; ++trial) {
    const Matrix values = random_points(6, 5, 8000 + trial);
    const auto model = pca_fit(wrap(values));

    Eigen::MatrixXd x(6, 5);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 5; ++j) x(i, j) = values(i, j);
    }
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / 5.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);

    for (int c = 0; c < 2; ++c) {
      const double ref = solver.eigenvalues()(4 - c);
      worst = std::max(worst, std::abs(model.eigenvalues[c] - ref));
      if (std::abs(model.eigenvalues[c] - ref) > 1e-8) pass = false;

      Eigen::VectorXd vec = solver.eigenvectors().col(4 - c);
      Eigen::Index arg = 0;
      vec.cwiseAbs().maxCoeff(&arg);
      if (vec(arg) < 0) vec = -vec;
      for (int j = 0; j < 5; ++j) {
        const double gap = std::abs(model.components(c, j) - vec(j));
        worst = std::max(worst, gap);
        if (gap > 1e-8) pass = false;
      }
    }

    // projected variance equals the eigenvalue
    const auto scores = pca_project(model, wrap(values));
    for (int c = 0; c < 2; ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < 6; ++i) mean += scores.coords(i, c);
      mean /= 6.0;
      double var = 0.0;
      for (std::size_t i = 0; i < 6; ++i) {
        var += (scores.coords(i, c) - mean) * (scores.coords(i, c) - mean);
      }
      var /= 5.0;
      if (std::abs(var - model.eigenvalues[c]) > 1e-8) pass = false;
    }
  }
  std::ostringstream detail;
  detail << "20 random 6x5 matrices, max gap " << worst;
  report(4, "top-2 eigenpairs match the dense oracle", pass, detail.str());
}

// shared pipeline for criteria 5 and 8
struct ProvincesRun {
  double ari = 0.0;
  double kl_at_release = 0.0;
  double kl_final = 0.0;
};

ProvincesRun run_provinces(std::uint64_t seed) {
  const auto cfg = provinces_preset(seed);
  const auto fm = standardize(build_feature_matrix(synth_panel(cfg), Scope::provinces));
  TsneConfig tc;
  tc.perplexity = 5.0;
  tc.exaggeration_factor = 12.0;
  tc.seed = seed;
  const Embedding e = run_tsne(fm, tc);
  const Clustering clusters = kmeans_fit(e.coords, 4, 10, seed + 1);

  ProvincesRun out;
  out.ari = adjusted_rand(clusters.labels, planted_labels(cfg));
  out.kl_final = e.cost_trace.back().kl;
  for (const CostPoint& p : e.cost_trace) {
    if (p.iter == tc.exaggeration_iters) out.kl_at_release = p.kl;
  }
  return out;
}

std::vector<ProvincesRun> g_province_runs;

// ---- criterion 5: provincial reproduction ----------------------------------
void criterion_5() {
  const auto start = Clock::now();
  std::vector<double> aris;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    g_province_runs.push_back(run_provinces(seed));
    aris.push_back(g_province_runs.back().ari);
  }
  const double med = median(aris);
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "ARI per seed:";
  for (double a : aris) detail << ' ' << a;
  detail << "; median " << med << ", " << elapsed << " s";
  report(5, "31 planted tiers recovered at perplexity 5, k=4", med >= 0.8 && elapsed < 30.0,
         detail.str());
}

// ---- criterion 6: city-scale reproduction ----------------------------------
void criterion_6(bool extended) {
  const auto start = Clock::now();
  const int iters = extended ? 5000 : 1000;
  std::vector<double> aris;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto cfg = cities_preset(seed);
    const auto fm = standardize(build_feature_matrix(synth_panel(cfg), Scope::cities));
    TsneConfig tc;
    tc.perplexity = 30.0;
    tc.exaggeration_factor = 12.0;
    tc.max_iters = iters;
    tc.seed = seed;
    const Embedding e = run_tsne(fm, tc);
    const Clustering clusters = kmeans_fit(e.coords, 7, 10, seed + 1);
    aris.push_back(adjusted_rand(clusters.labels, planted_labels(cfg)));
  }
  const double med = median(aris);
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << (extended ? "extended 5000" : "CI-capped 1000") << " iters; ARI per seed:";
  for (double a : aris) detail << ' ' << a;
  detail << "; median " << med << ", " << elapsed << " s";
  report(6, "335 regions in 7 groups recovered at perplexity 30", med >= 0.7 && elapsed < 600.0,
         detail.str());
}

// ---- criterion 7: sweep qualitative ordering --------------------------------
void criterion_7() {
  const auto cfg = provinces_preset(11);
  const auto fm = standardize(build_feature_matrix(synth_panel(cfg), Scope::provinces));
  const auto cells = run_sweep(fm, {5.0, 10.0, 20.0}, {200, 500}, 4, 5, 90);

  bool p5_clustered = true;
  std::vector<double> sil5, sil20;
  for (const SweepCell& cell : cells) {
    if (cell.perplexity == 5.0) {
      if (cell.form != DistributionForm::clustered) p5_clustered = false;
      for (const SweepRun& run : cell.runs) sil5.push_back(run.silhouette);
    }
    if (cell.perplexity == 20.0) {
      for (const SweepRun& run : cell.runs) sil20.push_back(run.silhouette);
    }
  }
  const double med5 = median(sil5), med20 = median(sil20);
  std::ostringstream detail;
  detail << "P=5 cells clustered: " << (p5_clustered ? "yes" : "no") << "; median silhouette P=5 "
         << med5 << " vs P=20 " << med20;
  report(7, "sweep labels P=5 clustered and orders silhouettes", p5_clustered && med5 >= med20,
         detail.str());
}

// ---- criterion 8: monotonicity ---------------------------------------------
void criterion_8() {
  // Lloyd inertia is checked in-loop by kmeans_fit (it throws on an
  // increase); drive it across many configurations to exercise the check.
  bool lloyd_ok = true;
  try {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
      const Matrix pts = random_points(40, 2, 9000 + trial, 3.0);
      kmeans_fit(pts, 1 + static_cast<int>(rng() % 8), 5, trial);
    }
  } catch (const std::logic_error&) {
    lloyd_ok = false;
  }

  bool kl_ok = !g_province_runs.empty();
  std::ostringstream detail;
  detail << "Lloyd inertia non-increasing over 30 runs; KL release->final:";
  for (const ProvincesRun& run : g_province_runs) {
    detail << ' ' << run.kl_at_release << "->" << run.kl_final;
    if (!(run.kl_final < run.kl_at_release)) kl_ok = false;
  }
  report(8, "inertia never increases; KL falls after exaggeration release", lloyd_ok && kl_ok,
         detail.str());
}

// ---- criterion 9: data-shape check ------------------------------------------
void criterion_9() {
  const auto provinces = synth_panel(provinces_preset(21));
  const auto cities = synth_panel(cities_preset(22));
  auto full = merge_panels(provinces, cities);
  const auto report_ok = validate_panel(full);

  bool pass = full.regions.size() == 366 && report_ok.is_complete &&
              report_ok.observation_count == 35136;

  full.observations.erase(full.observations.begin() + 12345);
  const auto report_missing = validate_panel(full);
  pass = pass && !report_missing.is_complete && report_missing.missing_cells.size() == 1;

  std::ostringstream detail;
  detail << "366 regions x 4 businesses x 24 months = " << report_ok.observation_count
         << " observations; one removed cell rejected";
  report(9, "validator accepts the full panel and rejects a gap", pass, detail.str());
}

// ---- criterion 10: CLI determinism -------------------------------------------
int run_cmd(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void criterion_10(const std::string& cli) {
  const fs::path tmp =
      fs::temp_directory_path() / ("riskmap-accept-" + std::to_string(::getpid()));
  fs::create_directories(tmp);

  bool pass = true;
  std::string detail;
  const fs::path panel = tmp / "panel.csv";
  {
    std::ofstream out(panel);
    serialize_panel(synth_panel(provinces_preset(33)), out);
  }
  const std::string base = cli + " embed " + panel.string() +
                           " --method tsne --scope provinces --seed 7 --out-dir ";
  const fs::path run1 = tmp / "run1", run2 = tmp / "run2";
  const std::string quiet = " > /dev/null 2>&1";
  if (run_cmd(base + run1.string() + quiet) != 0 || run_cmd(base + run2.string() + quiet) != 0) {
    pass = false;
    detail = "embed run failed";
  } else {
    const bool csv_same = slurp(run1 / "embedding.csv") == slurp(run2 / "embedding.csv");
    const bool svg_same = slurp(run1 / "scatter.svg") == slurp(run2 / "scatter.svg");
    pass = csv_same && svg_same && !slurp(run1 / "embedding.csv").empty();
    detail = std::string("embedding.csv ") + (csv_same ? "identical" : "differs") +
             ", scatter.svg " + (svg_same ? "identical" : "differs");
  }
  std::error_code ec;
  fs::remove_all(tmp, ec);
  report(10, "two seeded cmd_embed runs are byte-identical", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-riskmap-cli> [--extended]\n";
    return 64;
  }
  const std::string cli = argv[1];
  const bool extended = argc > 2 && std::string(argv[2]) == "--extended";

  if (extended) {
    // long-form city run only; everything else is covered by the default suite
    criterion_6(true);
    return g_failures;
  }

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6(false);
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10(cli);
  return g_failures;
}
