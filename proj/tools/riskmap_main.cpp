// riskmap: regional internet-finance index pipeline.
// Subcommands: validate, embed, sweep, synth.
// Exit codes: 0 success, 1 validation failure, 2 usage/parse error,
// 3 numerical divergence.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "riskmap/cluster.hpp"
#include "riskmap/errors.hpp"
#include "riskmap/index.hpp"
#include "riskmap/panel.hpp"
#include "riskmap/pca.hpp"
#include "riskmap/report.hpp"
#include "riskmap/svg.hpp"
#include "riskmap/sweep.hpp"
#include "riskmap/synth.hpp"
#include "riskmap/tsne.hpp"

namespace {

using namespace riskmap;

PanelDataset load_panel(const std::string& path, const std::string& mode) {
  const PanelMode m =
      mode == "raw" ? PanelMode::raw_indicators : PanelMode::precomputed_coefficients;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open `" + path + "`");
  return parse_panel(in, m);
}

Scope scope_from(const std::string& s) {
  if (s == "provinces") return Scope::provinces;
  if (s == "cities") return Scope::cities;
  return Scope::all;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write `" + path.string() + "`");
  out << bytes;
}

struct ValidateOpts {
  std::string input;
  std::string mode = "precomputed";
};

int cmd_validate(const ValidateOpts& opt) {
  const PanelDataset ds = load_panel(opt.input, opt.mode);
  const ValidationReport report = validate_panel(ds);
  std::cout << to_json(report).dump(2) << '\n';
  return report.is_complete ? 0 : 1;
}

struct EmbedOpts {
  std::string input;
  std::string mode = "precomputed";
  std::string method;
  std::string scope = "provinces";
  std::optional<double> perplexity;
  double exaggeration = 12.0;
  int exaggeration_iters = 250;
  double learning_rate = 200.0;
  std::optional<int> iters;
  std::optional<int> k;
  std::uint64_t seed = 0;
  bool no_standardize = false;
  int restarts = 10;
  std::string init = "kmeans++";
  std::string national = "require";
  std::string impute = "none";
  std::string weights = "0.5,0.25,0.25";
  std::string out_dir = ".";
  bool labels = false;
  std::string features_out;
};

Weights parse_weights(const std::string& s) {
  std::stringstream ss(s);
  Weights w;
  char c1 = 0, c2 = 0;
  if (!(ss >> w.m1 >> c1 >> w.m2 >> c2 >> w.m3) || c1 != ',' || c2 != ',') {
    throw std::invalid_argument("bad --weights, expected m1,m2,m3");
  }
  validate(w);
  return w;
}

int cmd_embed(const EmbedOpts& opt) {
  const PanelDataset parsed = load_panel(opt.input, opt.mode);
  const PanelDataset ds = opt.impute == "mean" ? impute_missing_mean(parsed) : parsed;

  PipelineReport report;
  report.input_path = opt.input;
  report.mode = ds.mode;
  report.region_count = ds.regions.size();
  report.observation_count = ds.observations.size();
  report.months = ds.month_count();
  report.scope = scope_from(opt.scope);
  report.method = opt.method;
  report.standardized = !opt.no_standardize;
  report.weights = parse_weights(opt.weights);
  report.national_policy = opt.national == "aggregate" ? NationalPolicy::aggregate_mean
                                                       : NationalPolicy::require_record;
  report.impute_mean = opt.impute == "mean";
  report.seed = opt.seed;

  const bool city_scale = report.scope != Scope::provinces;
  const double perplexity = opt.perplexity.value_or(city_scale ? 30.0 : 5.0);
  const int iters = opt.iters.value_or(city_scale ? 5000 : 1000);
  const int k = opt.k.value_or(city_scale ? 7 : 4);

  FeatureMatrix raw;
  try {
    raw = build_feature_matrix(ds, report.scope, report.weights, report.national_policy);
  } catch (const std::invalid_argument& e) {
    // an incomplete scoped panel is a data problem, not a usage problem
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  const FeatureMatrix features = opt.no_standardize ? raw : standardize(raw);

  if (opt.method == "tsne") {
    TsneConfig cfg;
    cfg.perplexity = perplexity;
    cfg.exaggeration_factor = opt.exaggeration;
    cfg.exaggeration_iters = std::min(opt.exaggeration_iters, iters);
    cfg.learning_rate = opt.learning_rate;
    cfg.max_iters = iters;
    cfg.seed = opt.seed;
    report.tsne = cfg;
    report.embedding = run_tsne(features, cfg);
    report.final_kl = report.embedding.cost_trace.back().kl;
  } else {
    const PcaModel model = pca_fit(features);
    report.pca = model;
    report.embedding = pca_project(model, features);
  }

  report.kmeans_k = k;
  report.kmeans_restarts = opt.restarts;
  report.kmeans_init = opt.init == "random" ? KmeansInit::random_points : KmeansInit::kmeanspp;
  report.kmeans_seed = opt.seed + 1;
  report.clustering = kmeans_fit(report.embedding.coords, k, opt.restarts, report.kmeans_seed,
                                 report.kmeans_init);
  report.tiers = assign_tiers(report.clustering, raw);
  report.silhouette_value =
      k >= 2 ? silhouette(report.embedding.coords, report.clustering.labels) : 0.0;

  const std::filesystem::path dir(opt.out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "embedding.csv", embedding_csv(report));
  write_file(dir / "report.json", to_json(report).dump(2) + "\n");
  if (opt.method == "tsne") {
    write_file(dir / "trace.csv", cost_trace_csv(report.embedding));
  }
  SvgOptions svg_opt;
  svg_opt.show_labels = opt.labels;
  write_file(dir / "scatter.svg", render_svg(report.embedding, report.clustering.labels, svg_opt));
  if (!opt.features_out.empty()) {
    std::ofstream out(opt.features_out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write `" + opt.features_out + "`");
    write_feature_csv(features, out);
  }

  std::cout << opt.method << " embedding of " << report.embedding.n() << " regions ("
            << to_string(report.scope) << ")\n";
  if (report.final_kl) std::cout << "final KL: " << *report.final_kl << '\n';
  if (report.pca) {
    std::cout << "explained variance ratio: " << report.pca->explained_variance_ratio[0] << ", "
              << report.pca->explained_variance_ratio[1] << '\n';
  }
  std::cout << "silhouette (k=" << k << "): " << report.silhouette_value << '\n'
            << "outputs: " << (dir / "embedding.csv").string() << ", "
            << (dir / "report.json").string() << ", " << (dir / "scatter.svg").string() << '\n';
  return 0;
}

struct SweepOpts {
  std::string input;
  std::string mode = "precomputed";
  std::string scope = "provinces";
  std::vector<double> perplexities = {5.0, 10.0, 20.0};
  std::vector<int> iters = {200, 500};
  int seeds = 5;
  std::uint64_t seed = 0;
  std::optional<int> k;
  bool no_standardize = false;
  SweepThresholds thresholds;
  std::string out = "sweep.csv";
};

int cmd_sweep(const SweepOpts& opt) {
  const PanelDataset ds = load_panel(opt.input, opt.mode);
  const Scope scope = scope_from(opt.scope);
  FeatureMatrix features;
  try {
    features = build_feature_matrix(ds, scope);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  if (!opt.no_standardize) features = standardize(features);
  const int k = opt.k.value_or(scope == Scope::provinces ? 4 : 7);

  const std::vector<SweepCell> cells =
      run_sweep(features, opt.perplexities, opt.iters, k, opt.seeds, opt.seed, opt.thresholds);

  std::cout << sweep_table(cells);
  std::ofstream out(opt.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write `" + opt.out + "`");
  write_sweep_csv(cells, out);
  std::cout << "wrote " << opt.out << '\n';
  return 0;
}

struct SynthOpts {
  std::string preset = "provinces";
  int months = 24;
  double noise = 0.15;
  double imbalance = 0.4;
  std::uint64_t seed = 0;
  std::string out = "panel.csv";
};

int cmd_synth(const SynthOpts& opt) {
  const std::uint64_t synth_seed = opt.seed + 2;  // fixed sub-seed offset
  const auto configure = [&](SynthConfig cfg) {
    cfg.months = opt.months;
    cfg.noise_std = opt.noise;
    cfg.middle_imbalance_std = opt.imbalance;
    return cfg;
  };

  PanelDataset ds;
  nlohmann::json echo;
  if (opt.preset == "full") {
    SynthConfig provinces = configure(provinces_preset(synth_seed));
    SynthConfig cities = configure(cities_preset(synth_seed + 1));
    ds = merge_panels(synth_panel(provinces), synth_panel(cities));
    echo = {{"preset", "full"}, {"provinces", to_json(provinces)}, {"cities", to_json(cities)}};
  } else {
    SynthConfig cfg = configure(opt.preset == "cities" ? cities_preset(synth_seed)
                                                       : provinces_preset(synth_seed));
    ds = synth_panel(cfg);
    echo = {{"preset", opt.preset}, {"config", to_json(cfg)}};
  }

  std::ofstream out(opt.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write `" + opt.out + "`");
  serialize_panel(ds, out);
  echo["regions"] = ds.regions.size();
  echo["observations"] = ds.observations.size();
  echo["output"] = opt.out;
  std::cout << echo.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regional internet-finance index pipeline: index construction, "
               "t-SNE/PCA embedding, k-means tiering, parameter sweeps"};
  app.require_subcommand(1);

  ValidateOpts validate_opts;
  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a panel CSV for completeness");
  validate_cmd->add_option("input", validate_opts.input, "panel CSV")->required();
  validate_cmd->add_option("--mode", validate_opts.mode, "precomputed|raw")
      ->check(CLI::IsMember({"precomputed", "raw"}));

  EmbedOpts embed_opts;
  CLI::App* embed_cmd = app.add_subcommand("embed", "Embed, cluster and tier a panel");
  embed_cmd->add_option("input", embed_opts.input, "panel CSV")->required();
  embed_cmd->add_option("--mode", embed_opts.mode)->check(CLI::IsMember({"precomputed", "raw"}));
  embed_cmd->add_option("--method", embed_opts.method, "tsne|pca")
      ->required()
      ->check(CLI::IsMember({"tsne", "pca"}));
  embed_cmd->add_option("--scope", embed_opts.scope)
      ->check(CLI::IsMember({"provinces", "cities", "all"}));
  embed_cmd->add_option("--perplexity", embed_opts.perplexity,
                        "default 5 for provinces, 30 otherwise");
  embed_cmd->add_option("--exaggeration", embed_opts.exaggeration);
  embed_cmd->add_option("--exaggeration-iters", embed_opts.exaggeration_iters);
  embed_cmd->add_option("--lr", embed_opts.learning_rate);
  embed_cmd->add_option("--iters", embed_opts.iters, "default 1000 for provinces, 5000 otherwise");
  embed_cmd->add_option("--k", embed_opts.k, "default 4 for provinces, 7 otherwise");
  embed_cmd->add_option("--seed", embed_opts.seed);
  embed_cmd->add_flag("--no-standardize", embed_opts.no_standardize);
  embed_cmd->add_option("--restarts", embed_opts.restarts);
  embed_cmd->add_option("--init", embed_opts.init)->check(CLI::IsMember({"kmeans++", "random"}));
  embed_cmd->add_option("--national", embed_opts.national,
                        "raw-mode national baseline: require|aggregate")
      ->check(CLI::IsMember({"require", "aggregate"}));
  embed_cmd->add_option("--impute", embed_opts.impute)->check(CLI::IsMember({"none", "mean"}));
  embed_cmd->add_option("--weights", embed_opts.weights, "m1,m2,m3");
  embed_cmd->add_option("--out-dir", embed_opts.out_dir);
  embed_cmd->add_flag("--labels", embed_opts.labels, "draw region ids in the scatter");
  embed_cmd->add_option("--features-out", embed_opts.features_out,
                        "also write the feature matrix CSV");

  SweepOpts sweep_opts;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Grid over (perplexity, iterations), classify distributions");
  sweep_cmd->add_option("input", sweep_opts.input, "panel CSV")->required();
  sweep_cmd->add_option("--mode", sweep_opts.mode)->check(CLI::IsMember({"precomputed", "raw"}));
  sweep_cmd->add_option("--scope", sweep_opts.scope)
      ->check(CLI::IsMember({"provinces", "cities", "all"}));
  sweep_cmd->add_option("--perplexities", sweep_opts.perplexities)->delimiter(',');
  sweep_cmd->add_option("--iters", sweep_opts.iters)->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep_opts.seeds, "seeds per cell");
  sweep_cmd->add_option("--seed", sweep_opts.seed, "base seed");
  sweep_cmd->add_option("--k", sweep_opts.k);
  sweep_cmd->add_flag("--no-standardize", sweep_opts.no_standardize);
  sweep_cmd->add_option("--clustered-sil", sweep_opts.thresholds.clustered_silhouette,
                        "silhouette at or above which a cell reads clustered");
  sweep_cmd->add_option("--discrete-nncv", sweep_opts.thresholds.discrete_nn_cv,
                        "nn-distance CV at or above which a low-silhouette cell reads discrete");
  sweep_cmd->add_option("--out", sweep_opts.out);

  SynthOpts synth_opts;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a planted-tier synthetic panel");
  synth_cmd->add_option("--preset", synth_opts.preset)
      ->check(CLI::IsMember({"provinces", "cities", "full"}));
  synth_cmd->add_option("--months", synth_opts.months);
  synth_cmd->add_option("--noise", synth_opts.noise);
  synth_cmd->add_option("--imbalance", synth_opts.imbalance);
  synth_cmd->add_option("--seed", synth_opts.seed);
  synth_cmd->add_option("--out", synth_opts.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(validate_opts);
    if (embed_cmd->parsed()) return cmd_embed(embed_opts);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts);
    if (synth_cmd->parsed()) return cmd_synth(synth_opts);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
