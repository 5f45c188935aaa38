#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskmap/panel.hpp"

namespace riskmap {

// Planted-tier panel generator. Values follow
//   B = tier_mean * business_factor(region, business) * month_drift(t) * noise
// with log-normal (mean 1) business factors and noise, and a mild linear
// upward drift from 1.0 to 1.2 across the months. The first and last tiers
// get business factor spread 0; middle tiers get `middle_imbalance_std`.
struct SynthConfig {
  std::vector<double> tier_means = {8.0, 3.0, 1.5, 0.6};  // strictly descending
  std::vector<int> tier_sizes = {4, 7, 9, 11};
  int months = 24;
  double noise_std = 0.15;
  double middle_imbalance_std = 0.4;
  std::uint64_t seed = 0;
  AdminLevel admin_level = AdminLevel::province;
  std::string id_prefix = "P";
  std::string first_month_tag = "2014-01";

  int region_count() const {
    int n = 0;
    for (int s : tier_sizes) n += s;
    return n;
  }
};

// 31 provinces in 4 tiers (the defaults above).
SynthConfig provinces_preset(std::uint64_t seed = 0);

// 335 cities in 7 groups.
SynthConfig cities_preset(std::uint64_t seed = 0);

// Business-factor spread for one tier under the first/last = 0 rule.
double tier_imbalance_std(const SynthConfig& cfg, int tier);

// Deterministic per seed; always passes validate_panel complete.
PanelDataset synth_panel(const SynthConfig& cfg);

// Planted tier per region, aligned with lexicographically sorted region ids
// (the generator zero-pads ids so sorted order equals generation order).
std::vector<int> planted_labels(const SynthConfig& cfg);

// Concatenates two precomputed panels with disjoint region ids and identical
// month tags.
PanelDataset merge_panels(const PanelDataset& a, const PanelDataset& b);

}  // namespace riskmap
