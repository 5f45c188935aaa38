#include "riskmap/synth.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "riskmap/rng.hpp"

namespace riskmap {

namespace {

void check(const SynthConfig& cfg) {
  if (cfg.tier_means.size() != cfg.tier_sizes.size()) {
    throw std::invalid_argument("tier_means and tier_sizes must align");
  }
  if (cfg.tier_means.empty()) throw std::invalid_argument("need at least one tier");
  for (std::size_t t = 0; t + 1 < cfg.tier_means.size(); ++t) {
    if (!(cfg.tier_means[t] > cfg.tier_means[t + 1])) {
      throw std::invalid_argument("tier_means must be strictly descending");
    }
  }
  for (double m : cfg.tier_means) {
    if (!(m > 0.0)) throw std::invalid_argument("tier means must be positive");
  }
  for (int s : cfg.tier_sizes) {
    if (s < 1) throw std::invalid_argument("tier sizes must be positive");
  }
  if (cfg.months < 1) throw std::invalid_argument("months must be >= 1");
  if (cfg.noise_std < 0.0 || cfg.middle_imbalance_std < 0.0) {
    throw std::invalid_argument("spreads must be nonnegative");
  }
}

std::string pad_id(const std::string& prefix, int index, int width) {
  std::string digits = std::to_string(index);
  while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
  return prefix + digits;
}

// log-normal factor with mean 1
double lognormal_unit(Rng& rng, double sigma) {
  if (sigma == 0.0) return 1.0;
  return std::exp(sigma * rng.normal() - 0.5 * sigma * sigma);
}

std::string next_month_tag(const std::string& tag) {
  int year = std::stoi(tag.substr(0, 4));
  int month = std::stoi(tag.substr(5, 2));
  if (++month > 12) {
    month = 1;
    ++year;
  }
  if (year > 9999) throw std::invalid_argument("month tag past year 9999");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

}  // namespace

SynthConfig provinces_preset(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  return cfg;
}

SynthConfig cities_preset(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.tier_means = {12.0, 6.0, 3.2, 1.8, 1.0, 0.5, 0.22};
  cfg.tier_sizes = {15, 30, 45, 55, 60, 65, 65};  // 335 regions
  cfg.admin_level = AdminLevel::city;
  cfg.id_prefix = "C";
  cfg.seed = seed;
  return cfg;
}

double tier_imbalance_std(const SynthConfig& cfg, int tier) {
  const int last = static_cast<int>(cfg.tier_sizes.size()) - 1;
  if (tier == 0 || tier == last) return 0.0;
  return cfg.middle_imbalance_std;
}

PanelDataset synth_panel(const SynthConfig& cfg) {
  check(cfg);

  PanelDataset ds;
  ds.mode = PanelMode::precomputed_coefficients;
  ds.month_tags.reserve(cfg.months);
  std::string tag = cfg.first_month_tag;
  for (int m = 0; m < cfg.months; ++m) {
    ds.month_tags.push_back(tag);
    tag = next_month_tag(tag);
  }

  const int n = cfg.region_count();
  const int width = static_cast<int>(std::to_string(n).size());
  const int T = cfg.months;

  Rng rng(cfg.seed);
  int region_index = 0;
  for (std::size_t tier = 0; tier < cfg.tier_sizes.size(); ++tier) {
    const double mean = cfg.tier_means[tier];
    const double imbalance = tier_imbalance_std(cfg, static_cast<int>(tier));
    for (int r = 0; r < cfg.tier_sizes[tier]; ++r) {
      ++region_index;
      const std::string id = pad_id(cfg.id_prefix, region_index, width);
      ds.regions.push_back(
          {id, "Region " + std::to_string(region_index), cfg.admin_level});

      double factors[kBusinessCount];
      for (int b = 0; b < kBusinessCount; ++b) factors[b] = lognormal_unit(rng, imbalance);

      for (int b = 0; b < kBusinessCount; ++b) {
        for (int m = 0; m < T; ++m) {
          const double drift = T > 1 ? 1.0 + 0.2 * m / static_cast<double>(T - 1) : 1.0;
          const double value = mean * factors[b] * drift * lognormal_unit(rng, cfg.noise_std);
          ds.observations.push_back(
              {id, static_cast<Business>(b), Indicator::penetration, m, value});
        }
      }
    }
  }
  return ds;
}

std::vector<int> planted_labels(const SynthConfig& cfg) {
  check(cfg);
  std::vector<int> labels;
  labels.reserve(cfg.region_count());
  for (std::size_t tier = 0; tier < cfg.tier_sizes.size(); ++tier) {
    labels.insert(labels.end(), cfg.tier_sizes[tier], static_cast<int>(tier));
  }
  return labels;
}

PanelDataset merge_panels(const PanelDataset& a, const PanelDataset& b) {
  if (a.mode != PanelMode::precomputed_coefficients ||
      b.mode != PanelMode::precomputed_coefficients) {
    throw std::invalid_argument("merge_panels expects precomputed panels");
  }
  if (a.month_tags != b.month_tags) {
    throw std::invalid_argument("merge_panels expects identical month tags");
  }
  std::set<std::string> ids;
  for (const auto& r : a.regions) ids.insert(r.region_id);
  for (const auto& r : b.regions) {
    if (!ids.insert(r.region_id).second) {
      throw std::invalid_argument("region id `" + r.region_id + "` present in both panels");
    }
  }
  PanelDataset out = a;
  out.regions.insert(out.regions.end(), b.regions.begin(), b.regions.end());
  out.observations.insert(out.observations.end(), b.observations.begin(), b.observations.end());
  return out;
}

}  // namespace riskmap
