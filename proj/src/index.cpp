#include "riskmap/index.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace riskmap {

namespace {

std::string format_value(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

const char* to_string(Scope scope) {
  switch (scope) {
    case Scope::provinces: return "provinces";
    case Scope::cities: return "cities";
    case Scope::all: return "all";
  }
  return "?";
}

void validate(const Weights& w) {
  for (double m : {w.m1, w.m2, w.m3}) {
    if (!(m >= 0.0 && m <= 1.0)) {
      throw std::invalid_argument("weights must lie in [0,1]");
    }
  }
  if (std::abs(w.m1 + w.m2 + w.m3 - 1.0) > 1e-12) {
    throw std::invalid_argument("weights must sum to 1");
  }
}

double relative_indicator(double x_region, double x_national) {
  if (!(x_national > 0.0)) {
    throw std::invalid_argument("national baseline must be positive, got " +
                                std::to_string(x_national));
  }
  if (!(x_region >= 0.0)) {
    throw std::invalid_argument("regional value must be nonnegative");
  }
  return x_region / x_national;
}

double business_coefficient(const std::array<double, 3>& a, const Weights& w) {
  validate(w);
  for (double v : a) {
    if (!(v >= 0.0)) throw std::invalid_argument("relative indicators must be nonnegative");
  }
  return w.m1 * a[0] + w.m2 * a[1] + w.m3 * a[2];
}

FeatureMatrix build_feature_matrix(const PanelDataset& ds, Scope scope, const Weights& w,
                                   NationalPolicy national) {
  validate(w);

  std::vector<std::string> ids;
  for (const auto& r : ds.regions) {
    if (r.admin_level == AdminLevel::national) continue;
    if (scope == Scope::provinces && r.admin_level != AdminLevel::province) continue;
    if (scope == Scope::cities && r.admin_level != AdminLevel::city) continue;
    ids.push_back(r.region_id);
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) {
    throw std::invalid_argument(std::string("no regions in scope `") + to_string(scope) + "`");
  }

  const int T = ds.month_count();
  if (T == 0) throw std::invalid_argument("panel has no months");

  FeatureMatrix fm;
  fm.region_ids = ids;
  fm.feature_labels.reserve(static_cast<std::size_t>(kBusinessCount) * T);
  for (int b = 0; b < kBusinessCount; ++b) {
    for (int m = 0; m < T; ++m) {
      fm.feature_labels.push_back({static_cast<Business>(b), m, ds.month_tags[m]});
    }
  }
  fm.values = Matrix(ids.size(), fm.feature_labels.size());

  const PanelIndex index(ds);
  const bool raw = ds.mode == PanelMode::raw_indicators;

  // raw mode: national baseline per (business, indicator, month), shared by rows
  Matrix baseline;
  if (raw) {
    baseline = Matrix(kBusinessCount * kIndicatorCount, T);
    for (int b = 0; b < kBusinessCount; ++b) {
      for (int ind = 0; ind < kIndicatorCount; ++ind) {
        for (int m = 0; m < T; ++m) {
          baseline(b * kIndicatorCount + ind, m) = national_slice(
              ds, index, static_cast<Business>(b), static_cast<Indicator>(ind), m, national);
        }
      }
    }
  }

  std::size_t missing = 0;
  std::string first_missing;
  for (std::size_t row = 0; row < ids.size(); ++row) {
    for (int b = 0; b < kBusinessCount; ++b) {
      for (int m = 0; m < T; ++m) {
        const std::size_t col = static_cast<std::size_t>(b) * T + m;
        if (raw) {
          std::array<double, 3> a{};
          bool ok = true;
          for (int ind = 0; ind < kIndicatorCount; ++ind) {
            const auto v =
                index.value(ids[row], static_cast<Business>(b), static_cast<Indicator>(ind), m);
            if (!v) {
              ok = false;
              break;
            }
            a[ind] = relative_indicator(*v, baseline(b * kIndicatorCount + ind, m));
          }
          if (!ok) {
            if (missing++ == 0) {
              first_missing = ids[row] + "/" + to_string(static_cast<Business>(b)) + "/month " +
                              std::to_string(m);
            }
            continue;
          }
          fm.values(row, col) = business_coefficient(a, w);
        } else {
          const auto v = index.value(ids[row], static_cast<Business>(b), Indicator::penetration, m);
          if (!v) {
            if (missing++ == 0) {
              first_missing = ids[row] + "/" + to_string(static_cast<Business>(b)) + "/month " +
                              std::to_string(m);
            }
            continue;
          }
          fm.values(row, col) = *v;
        }
      }
    }
  }
  if (missing > 0) {
    throw std::invalid_argument("scoped panel incomplete: " + std::to_string(missing) +
                                " missing cell(s), first " + first_missing);
  }
  return fm;
}

FeatureMatrix standardize(const FeatureMatrix& fm) {
  if (fm.standardized) throw std::invalid_argument("feature matrix already standardized");
  const std::size_t n = fm.n(), d = fm.d();
  if (n == 0) throw std::invalid_argument("empty feature matrix");

  FeatureMatrix out = fm;
  out.standardized = true;
  out.column_means.resize(d);
  out.column_stds.resize(d);

  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += fm.values(i, j);
    mean /= static_cast<double>(n);

    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = fm.values(i, j) - mean;
      var += r * r;
    }
    double std = std::sqrt(var / static_cast<double>(n));

    const double scale = std::max(1.0, std::abs(mean));
    if (std < 1e-12 * scale) {
      // constant column: all zeros, std recorded as 1
      std = 1.0;
      for (std::size_t i = 0; i < n; ++i) out.values(i, j) = 0.0;
    } else {
      for (std::size_t i = 0; i < n; ++i) out.values(i, j) = (fm.values(i, j) - mean) / std;
    }
    out.column_means[j] = mean;
    out.column_stds[j] = std;
  }
  return out;
}

void write_feature_csv(const FeatureMatrix& fm, std::ostream& out) {
  out << "region_id";
  for (const auto& label : fm.feature_labels) {
    out << ',' << to_string(label.business) << '_'
        << (label.month_tag.empty() ? "m" + std::to_string(label.month) : label.month_tag);
  }
  out << '\n';
  for (std::size_t i = 0; i < fm.n(); ++i) {
    out << fm.region_ids[i];
    for (std::size_t j = 0; j < fm.d(); ++j) {
      out << ',' << format_value(fm.values(i, j));
    }
    out << '\n';
  }
}

}  // namespace riskmap
