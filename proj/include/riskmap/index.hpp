#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "riskmap/matrix.hpp"
#include "riskmap/panel.hpp"

namespace riskmap {

// Indicator weights of the business coefficient. Defaults follow the index
// construction: penetration 50%, amount per capita 25%, count per capita 25%.
struct Weights {
  double m1 = 0.50;
  double m2 = 0.25;
  double m3 = 0.25;

  bool operator==(const Weights&) const = default;
};

// Throws std::invalid_argument unless each weight is in [0,1] and the sum is
// 1 within 1e-12.
void validate(const Weights& w);

struct FeatureLabel {
  Business business = Business::payment;
  int month = 0;
  std::string month_tag;

  bool operator==(const FeatureLabel&) const = default;
};

// Region x feature matrix, feature = (business, month) in business-major,
// month-minor order. Rows are sorted by region_id so the layout is
// independent of input order.
struct FeatureMatrix {
  Matrix values;  // n x d
  std::vector<std::string> region_ids;
  std::vector<FeatureLabel> feature_labels;
  bool standardized = false;
  std::vector<double> column_means;  // present iff standardized
  std::vector<double> column_stds;

  std::size_t n() const { return values.rows(); }
  std::size_t d() const { return values.cols(); }
};

enum class Scope : int { provinces = 0, cities = 1, all = 2 };

const char* to_string(Scope scope);

// value of region relative to the national baseline
double relative_indicator(double x_region, double x_national);

// weighted combination of the three relative indicators
double business_coefficient(const std::array<double, 3>& a, const Weights& w);

// Assembles the coefficient matrix for the scoped regions (national rows are
// never features). Raw mode computes relative indicators against the national
// baseline and combines them; precomputed mode copies values. Throws when the
// scoped panel is incomplete.
FeatureMatrix build_feature_matrix(const PanelDataset& ds, Scope scope, const Weights& w = {},
                                   NationalPolicy national = NationalPolicy::require_record);

// Per-column z-score with population (1/n) std. Constant columns become zero
// with std recorded as 1. Throws if fm is already standardized.
FeatureMatrix standardize(const FeatureMatrix& fm);

// CSV interchange: header = region_id + feature labels, one row per region.
void write_feature_csv(const FeatureMatrix& fm, std::ostream& out);

}  // namespace riskmap
