#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "riskmap/index.hpp"
#include "riskmap/synth.hpp"

using namespace riskmap;

TEST_CASE("relative_indicator") {
  CHECK(relative_indicator(5.0, 5.0) == 1.0);
  CHECK(relative_indicator(8.0, 1.0) == 8.0);
  CHECK(relative_indicator(0.0, 2.0) == 0.0);
  CHECK_THROWS_AS(relative_indicator(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(relative_indicator(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("relative_indicator(x, x) == 1 for positive x") {
  for (double x : {1e-6, 0.5, 1.0, 123.0, 1e9}) {
    CHECK(relative_indicator(x, x) == 1.0);
  }
}

TEST_CASE("business_coefficient") {
  const Weights w;
  CHECK(business_coefficient({1, 1, 1}, w) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(business_coefficient({2.0, 1.0, 1.0}, w) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(business_coefficient({0, 0, 0}, w) == 0.0);

  CHECK_THROWS_AS(business_coefficient({1, 1, 1}, Weights{0.5, 0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(business_coefficient({1, 1, 1}, Weights{-0.5, 0.75, 0.75}),
                  std::invalid_argument);
}

TEST_CASE("business_coefficient convexity and permutation behavior") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> value(0.0, 10.0);
  const Weights w;
  for (int trial = 0; trial < 200; ++trial) {
    const std::array<double, 3> a{value(rng), value(rng), value(rng)};
    const double c = business_coefficient(a, w);
    CHECK(c >= *std::min_element(a.begin(), a.end()) - 1e-12);
    CHECK(c <= *std::max_element(a.begin(), a.end()) + 1e-12);

    // m2 == m3, so swapping the equally weighted slots never changes anything
    CHECK(business_coefficient({a[0], a[2], a[1]}, w) == doctest::Approx(c).epsilon(1e-15));
    // swapping across the unequal weight changes the value iff the slots differ
    const double swapped = business_coefficient({a[1], a[0], a[2]}, w);
    if (a[0] == a[1]) {
      CHECK(swapped == c);
    } else {
      CHECK(swapped != c);
    }
  }
}

TEST_CASE("feature matrix shapes match province and city scale") {
  const auto provinces = synth_panel(provinces_preset(1));
  const auto fp = build_feature_matrix(provinces, Scope::provinces);
  CHECK(fp.n() == 31);
  CHECK(fp.d() == 96);

  const auto cities = synth_panel(cities_preset(2));
  const auto fc = build_feature_matrix(cities, Scope::cities);
  CHECK(fc.n() == 335);
  CHECK(fc.d() == 96);

  const auto both = merge_panels(provinces, cities);
  CHECK(build_feature_matrix(both, Scope::all).n() == 366);
  CHECK(build_feature_matrix(both, Scope::provinces).n() == 31);
}

TEST_CASE("raw-mode toy composes relative indicators and weights") {
  std::ostringstream csv;
  csv << "region_id,region_name,admin_level,business,indicator,month,value\n";
  for (const char* b : {"payment", "fund", "credit", "insurance"}) {
    int slot = 0;
    for (const char* ind : {"penetration", "amount_per_capita", "count_per_capita"}) {
      csv << "CN,National,national," << b << ',' << ind << ",2014-01,1\n";
      // region A: payment = (2,1,1), everything else all ones
      const bool bump = std::string(b) == "payment" && slot == 0;
      csv << "A,Alpha,province," << b << ',' << ind << ",2014-01," << (bump ? 2 : 1) << "\n";
      csv << "B,Beta,province," << b << ',' << ind << ",2014-01,1\n";
      ++slot;
    }
  }
  std::istringstream in(csv.str());
  const auto ds = parse_panel(in, PanelMode::raw_indicators);
  const auto fm = build_feature_matrix(ds, Scope::provinces);
  REQUIRE(fm.n() == 2);
  REQUIRE(fm.d() == 4);
  CHECK(fm.region_ids[0] == "A");
  CHECK(fm.values(0, 0) == doctest::Approx(1.5).epsilon(1e-15));  // 0.5*2 + 0.25 + 0.25
  CHECK(fm.values(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fm.values(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("build_feature_matrix is invariant under input row order") {
  auto ds = synth_panel(provinces_preset(3));
  const auto fm = build_feature_matrix(ds, Scope::provinces);

  std::mt19937 shuffle_rng(5);
  std::shuffle(ds.observations.begin(), ds.observations.end(), shuffle_rng);
  std::shuffle(ds.regions.begin(), ds.regions.end(), shuffle_rng);
  const auto fm2 = build_feature_matrix(ds, Scope::provinces);
  CHECK(fm.values == fm2.values);
  CHECK(fm.region_ids == fm2.region_ids);
}

TEST_CASE("build_feature_matrix rejects incomplete scoped panels") {
  auto ds = synth_panel(provinces_preset(4));
  ds.observations.pop_back();
  CHECK_THROWS_AS(build_feature_matrix(ds, Scope::provinces), std::invalid_argument);
  // but completeness only matters inside the scope
  CHECK_THROWS_AS(build_feature_matrix(ds, Scope::cities), std::invalid_argument);  // no cities
}

TEST_CASE("standardize") {
  FeatureMatrix fm;
  fm.region_ids = {"A", "B", "C"};
  fm.feature_labels = {{Business::payment, 0, "2014-01"}, {Business::fund, 0, "2014-01"}};
  fm.values = Matrix(3, 2);
  fm.values(0, 0) = 1;
  fm.values(1, 0) = 2;
  fm.values(2, 0) = 3;
  fm.values(0, 1) = 5;
  fm.values(1, 1) = 5;
  fm.values(2, 1) = 5;

  const auto z = standardize(fm);
  CHECK(z.standardized);
  const double expected = 1.0 / std::sqrt(2.0 / 3.0);  // population std of (1,2,3)
  CHECK(z.values(0, 0) == doctest::Approx(-expected).epsilon(1e-12));
  CHECK(z.values(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(z.values(2, 0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(z.values(0, 0) == doctest::Approx(-1.2247448714).epsilon(1e-9));

  // constant column: zeros, std recorded as 1
  CHECK(z.values(0, 1) == 0.0);
  CHECK(z.values(1, 1) == 0.0);
  CHECK(z.column_stds[1] == 1.0);
  CHECK(z.column_means[1] == 5.0);

  CHECK_THROWS_AS(standardize(z), std::invalid_argument);
}

TEST_CASE("standardized columns have zero mean and unit std") {
  const auto ds = synth_panel(provinces_preset(8));
  const auto z = standardize(build_feature_matrix(ds, Scope::provinces));
  for (std::size_t j = 0; j < z.d(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < z.n(); ++i) mean += z.values(i, j);
    mean /= static_cast<double>(z.n());
    double var = 0.0;
    for (std::size_t i = 0; i < z.n(); ++i) var += (z.values(i, j) - mean) * (z.values(i, j) - mean);
    var /= static_cast<double>(z.n());
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
  }
}

TEST_CASE("feature CSV carries labels and region ids") {
  auto cfg = provinces_preset(9);
  cfg.tier_means = {2.0, 1.0};
  cfg.tier_sizes = {1, 1};
  cfg.months = 2;
  const auto ds = synth_panel(cfg);
  const auto fm = build_feature_matrix(ds, Scope::provinces);
  std::ostringstream out;
  write_feature_csv(fm, out);
  const std::string csv = out.str();
  CHECK(csv.find("region_id,payment_2014-01,payment_2014-02,fund_2014-01") == 0);
  CHECK(csv.find("\nP1,") != std::string::npos);
}
