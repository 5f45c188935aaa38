#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "riskmap/cluster.hpp"
#include "riskmap/embedding.hpp"
#include "riskmap/panel.hpp"
#include "riskmap/pca.hpp"
#include "riskmap/sweep.hpp"
#include "riskmap/synth.hpp"

namespace riskmap {

inline constexpr const char* kToolName = "riskmap";
inline constexpr const char* kToolVersion = "0.1.0";

// Everything needed to reproduce one embed run plus its results.
struct PipelineReport {
  // input summary
  std::string input_path;
  PanelMode mode = PanelMode::precomputed_coefficients;
  std::size_t region_count = 0;
  std::size_t observation_count = 0;
  int months = 0;
  Scope scope = Scope::provinces;

  std::string method;  // "tsne" | "pca"

  // effective config
  bool standardized = true;
  Weights weights;
  NationalPolicy national_policy = NationalPolicy::require_record;
  bool impute_mean = false;
  std::uint64_t seed = 0;
  TsneConfig tsne;  // meaningful iff method == "tsne"
  int kmeans_k = 0;
  int kmeans_restarts = 10;
  KmeansInit kmeans_init = KmeansInit::kmeanspp;
  std::uint64_t kmeans_seed = 0;

  Embedding embedding;
  Clustering clustering;
  TierAssignment tiers;
  std::optional<double> final_kl;         // tsne only
  double silhouette_value = 0.0;
  std::optional<PcaModel> pca;            // pca only
};

nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const PcaModel& model);
PcaModel pca_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TsneConfig& cfg);
TsneConfig tsne_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthConfig& cfg);
nlohmann::json to_json(const PipelineReport& report);
PipelineReport report_from_json(const nlohmann::json& j);

// embedding.csv rows: region_id,x,y,cluster,tier
std::string embedding_csv(const PipelineReport& report);

// trace.csv rows: iter,kl
std::string cost_trace_csv(const Embedding& embedding);

}  // namespace riskmap
