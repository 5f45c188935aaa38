#include "riskmap/report.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace riskmap {

namespace {

using nlohmann::json;

json cell_to_json(const CellRef& cell) {
  return json{{"region_id", cell.region_id},
              {"business", to_string(cell.business)},
              {"indicator", to_string(cell.indicator)},
              {"month", cell.month}};
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows > 0 ? j[0].size() : 0;
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

std::string format_value(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

json to_json(const ValidationReport& report) {
  json missing = json::array();
  for (const auto& cell : report.missing_cells) missing.push_back(cell_to_json(cell));
  json dups = json::array();
  for (const auto& cell : report.duplicate_cells) dups.push_back(cell_to_json(cell));
  return json{{"observation_count", report.observation_count},
              {"missing_cells", std::move(missing)},
              {"duplicate_cells", std::move(dups)},
              {"missing_count", report.missing_cells.size()},
              {"duplicate_count", report.duplicate_cells.size()},
              {"is_complete", report.is_complete}};
}

json to_json(const PcaModel& model) {
  return json{{"components", matrix_to_json(model.components)},
              {"eigenvalues", model.eigenvalues},
              {"explained_variance_ratio", model.explained_variance_ratio},
              {"column_means", model.column_means}};
}

PcaModel pca_from_json(const json& j) {
  PcaModel model;
  model.components = matrix_from_json(j.at("components"));
  model.eigenvalues = j.at("eigenvalues").get<std::array<double, 2>>();
  model.explained_variance_ratio = j.at("explained_variance_ratio").get<std::array<double, 2>>();
  model.column_means = j.at("column_means").get<std::vector<double>>();
  return model;
}

json to_json(const TsneConfig& cfg) {
  return json{{"perplexity", cfg.perplexity},
              {"exaggeration_factor", cfg.exaggeration_factor},
              {"exaggeration_iters", cfg.exaggeration_iters},
              {"learning_rate", cfg.learning_rate},
              {"max_iters", cfg.max_iters},
              {"momentum_early", cfg.momentum_early},
              {"momentum_late", cfg.momentum_late},
              {"momentum_switch_iter", cfg.momentum_switch_iter},
              {"seed", cfg.seed},
              {"min_gain", cfg.min_gain}};
}

TsneConfig tsne_config_from_json(const json& j) {
  TsneConfig cfg;
  cfg.perplexity = j.at("perplexity").get<double>();
  cfg.exaggeration_factor = j.at("exaggeration_factor").get<double>();
  cfg.exaggeration_iters = j.at("exaggeration_iters").get<int>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.max_iters = j.at("max_iters").get<int>();
  cfg.momentum_early = j.at("momentum_early").get<double>();
  cfg.momentum_late = j.at("momentum_late").get<double>();
  cfg.momentum_switch_iter = j.at("momentum_switch_iter").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.min_gain = j.at("min_gain").get<double>();
  return cfg;
}

json to_json(const SynthConfig& cfg) {
  return json{{"tier_means", cfg.tier_means},
              {"tier_sizes", cfg.tier_sizes},
              {"months", cfg.months},
              {"noise_std", cfg.noise_std},
              {"middle_imbalance_std", cfg.middle_imbalance_std},
              {"seed", cfg.seed},
              {"admin_level", to_string(cfg.admin_level)},
              {"id_prefix", cfg.id_prefix},
              {"first_month_tag", cfg.first_month_tag}};
}

json to_json(const PipelineReport& report) {
  json j;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["input"] = {{"path", report.input_path},
                {"mode", to_string(report.mode)},
                {"regions", report.region_count},
                {"observations", report.observation_count},
                {"months", report.months},
                {"scope", to_string(report.scope)}};
  j["method"] = report.method;

  json config{{"standardize", report.standardized},
              {"weights", {{"m1", report.weights.m1},
                           {"m2", report.weights.m2},
                           {"m3", report.weights.m3}}},
              {"national_policy", report.national_policy == NationalPolicy::require_record
                                      ? "require_record"
                                      : "aggregate_mean"},
              {"impute_mean", report.impute_mean},
              {"seed", report.seed},
              {"kmeans", {{"k", report.kmeans_k},
                          {"restarts", report.kmeans_restarts},
                          {"init", to_string(report.kmeans_init)},
                          {"seed", report.kmeans_seed}}}};
  if (report.method == "tsne") config["tsne"] = to_json(report.tsne);
  j["config"] = std::move(config);

  if (report.pca) j["pca"] = to_json(*report.pca);

  json metrics{{"silhouette", report.silhouette_value}};
  if (report.final_kl) metrics["final_kl"] = *report.final_kl;
  if (report.pca) metrics["explained_variance_ratio"] = report.pca->explained_variance_ratio;
  j["metrics"] = std::move(metrics);

  j["clustering"] = {{"k", report.clustering.k},
                     {"labels", report.clustering.labels},
                     {"centers", matrix_to_json(report.clustering.centers)},
                     {"inertia", report.clustering.inertia},
                     {"n_iter", report.clustering.n_iter},
                     {"seed", report.clustering.seed}};

  json tier_names = json::array();
  for (int tier : report.tiers.tier_of_cluster) tier_names.push_back(roman_tier(tier));
  json region_tiers = json::object();
  for (const auto& [region, tier] : report.tiers.region_tiers) {
    region_tiers[region] = roman_tier(tier);
  }
  j["tiers"] = {{"tier_of_cluster", report.tiers.tier_of_cluster},
                {"tier_names", std::move(tier_names)},
                {"region_tiers", std::move(region_tiers)},
                {"tie_flagged", report.tiers.tie_flagged}};

  json trace = json::array();
  for (const CostPoint& p : report.embedding.cost_trace) {
    trace.push_back({{"iter", p.iter}, {"kl", p.kl}});
  }
  j["embedding"] = {{"region_ids", report.embedding.region_ids},
                    {"coords", matrix_to_json(report.embedding.coords)},
                    {"cost_trace", std::move(trace)}};
  return j;
}

PipelineReport report_from_json(const json& j) {
  PipelineReport r;
  r.input_path = j.at("input").at("path").get<std::string>();
  r.mode = j.at("input").at("mode").get<std::string>() == "raw"
               ? PanelMode::raw_indicators
               : PanelMode::precomputed_coefficients;
  r.region_count = j.at("input").at("regions").get<std::size_t>();
  r.observation_count = j.at("input").at("observations").get<std::size_t>();
  r.months = j.at("input").at("months").get<int>();
  const std::string scope = j.at("input").at("scope").get<std::string>();
  r.scope = scope == "provinces" ? Scope::provinces
                                 : (scope == "cities" ? Scope::cities : Scope::all);
  r.method = j.at("method").get<std::string>();

  const json& config = j.at("config");
  r.standardized = config.at("standardize").get<bool>();
  r.weights.m1 = config.at("weights").at("m1").get<double>();
  r.weights.m2 = config.at("weights").at("m2").get<double>();
  r.weights.m3 = config.at("weights").at("m3").get<double>();
  r.national_policy = config.at("national_policy").get<std::string>() == "require_record"
                          ? NationalPolicy::require_record
                          : NationalPolicy::aggregate_mean;
  r.impute_mean = config.at("impute_mean").get<bool>();
  r.seed = config.at("seed").get<std::uint64_t>();
  if (config.contains("tsne")) r.tsne = tsne_config_from_json(config.at("tsne"));
  r.kmeans_k = config.at("kmeans").at("k").get<int>();
  r.kmeans_restarts = config.at("kmeans").at("restarts").get<int>();
  r.kmeans_init = config.at("kmeans").at("init").get<std::string>() == "random"
                      ? KmeansInit::random_points
                      : KmeansInit::kmeanspp;
  r.kmeans_seed = config.at("kmeans").at("seed").get<std::uint64_t>();

  if (j.contains("pca")) r.pca = pca_from_json(j.at("pca"));
  if (j.at("metrics").contains("final_kl")) {
    r.final_kl = j.at("metrics").at("final_kl").get<double>();
  }
  r.silhouette_value = j.at("metrics").at("silhouette").get<double>();

  const json& clustering = j.at("clustering");
  r.clustering.k = clustering.at("k").get<int>();
  r.clustering.labels = clustering.at("labels").get<std::vector<int>>();
  r.clustering.centers = matrix_from_json(clustering.at("centers"));
  r.clustering.inertia = clustering.at("inertia").get<double>();
  r.clustering.n_iter = clustering.at("n_iter").get<int>();
  r.clustering.seed = clustering.at("seed").get<std::uint64_t>();

  r.tiers.tier_of_cluster = j.at("tiers").at("tier_of_cluster").get<std::vector<int>>();
  r.tiers.tie_flagged = j.at("tiers").at("tie_flagged").get<bool>();

  const json& emb = j.at("embedding");
  r.embedding.region_ids = emb.at("region_ids").get<std::vector<std::string>>();
  r.embedding.coords = matrix_from_json(emb.at("coords"));
  for (const json& p : emb.at("cost_trace")) {
    r.embedding.cost_trace.push_back({p.at("iter").get<int>(), p.at("kl").get<double>()});
  }
  if (r.method == "tsne") r.embedding.config_used = r.tsne;

  // region tiers rebuilt from labels + tier_of_cluster
  for (std::size_t i = 0; i < r.embedding.region_ids.size(); ++i) {
    r.tiers.region_tiers.emplace_back(
        r.embedding.region_ids[i],
        r.tiers.tier_of_cluster[static_cast<std::size_t>(r.clustering.labels[i])]);
  }
  return r;
}

std::string cost_trace_csv(const Embedding& embedding) {
  std::ostringstream out;
  out << "iter,kl\n";
  for (const CostPoint& p : embedding.cost_trace) {
    out << p.iter << ',' << format_value(p.kl) << '\n';
  }
  return out.str();
}

std::string embedding_csv(const PipelineReport& report) {
  std::ostringstream out;
  out << "region_id,x,y,cluster,tier\n";
  for (std::size_t i = 0; i < report.embedding.n(); ++i) {
    const int cluster = report.clustering.labels[i];
    out << report.embedding.region_ids[i] << ',' << format_value(report.embedding.coords(i, 0))
        << ',' << format_value(report.embedding.coords(i, 1)) << ',' << cluster << ','
        << roman_tier(report.tiers.tier_of_cluster[static_cast<std::size_t>(cluster)]) << '\n';
  }
  return out.str();
}

}  // namespace riskmap
