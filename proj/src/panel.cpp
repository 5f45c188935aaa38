#include "riskmap/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "riskmap/errors.hpp"

namespace riskmap {

namespace {

constexpr const char* kHeader = "region_id,region_name,admin_level,business,indicator,month,value";

// Packs (region slot, business, indicator, month) into one key.
std::uint64_t cell_key(int region, int business, int indicator, int month) {
  return (static_cast<std::uint64_t>(region) << 24) |
         (static_cast<std::uint64_t>(business) << 22) |
         (static_cast<std::uint64_t>(indicator) << 20) |
         static_cast<std::uint64_t>(month);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

// YYYY-MM with month 01..12.
bool parse_month_tag(std::string_view tag, int* year, int* month) {
  if (tag.size() != 7 || tag[4] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u}) {
    if (tag[i] < '0' || tag[i] > '9') return false;
  }
  const int y = (tag[0] - '0') * 1000 + (tag[1] - '0') * 100 + (tag[2] - '0') * 10 + (tag[3] - '0');
  const int m = (tag[5] - '0') * 10 + (tag[6] - '0');
  if (m < 1 || m > 12) return false;
  if (year) *year = y;
  if (month) *month = m;
  return true;
}

int month_ordinal(std::string_view tag) {
  int y = 0, m = 0;
  parse_month_tag(tag, &y, &m);
  return y * 12 + (m - 1);
}

std::string format_value(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

const char* to_string(Business b) {
  switch (b) {
    case Business::payment: return "payment";
    case Business::fund: return "fund";
    case Business::credit: return "credit";
    case Business::insurance: return "insurance";
  }
  return "?";
}

const char* to_string(Indicator ind) {
  switch (ind) {
    case Indicator::penetration: return "penetration";
    case Indicator::amount_per_capita: return "amount_per_capita";
    case Indicator::count_per_capita: return "count_per_capita";
  }
  return "?";
}

const char* to_string(AdminLevel lvl) {
  switch (lvl) {
    case AdminLevel::province: return "province";
    case AdminLevel::city: return "city";
    case AdminLevel::national: return "national";
  }
  return "?";
}

const char* to_string(PanelMode mode) {
  return mode == PanelMode::raw_indicators ? "raw" : "precomputed";
}

std::optional<Business> business_from(std::string_view token) {
  if (token == "payment") return Business::payment;
  if (token == "fund") return Business::fund;
  if (token == "credit") return Business::credit;
  if (token == "insurance") return Business::insurance;
  return std::nullopt;
}

std::optional<Indicator> indicator_from(std::string_view token) {
  if (token == "penetration") return Indicator::penetration;
  if (token == "amount_per_capita") return Indicator::amount_per_capita;
  if (token == "count_per_capita") return Indicator::count_per_capita;
  return std::nullopt;
}

std::optional<AdminLevel> admin_level_from(std::string_view token) {
  if (token == "province") return AdminLevel::province;
  if (token == "city") return AdminLevel::city;
  if (token == "national") return AdminLevel::national;
  return std::nullopt;
}

const RegionRecord* PanelDataset::find_region(std::string_view region_id) const {
  for (const auto& r : regions) {
    if (r.region_id == region_id) return &r;
  }
  return nullptr;
}

const RegionRecord* PanelDataset::national_region() const {
  for (const auto& r : regions) {
    if (r.admin_level == AdminLevel::national) return &r;
  }
  return nullptr;
}

PanelIndex::PanelIndex(const PanelDataset& ds)
    : ignore_indicator_(ds.mode == PanelMode::precomputed_coefficients) {
  region_slot_.reserve(ds.regions.size());
  for (std::size_t i = 0; i < ds.regions.size(); ++i) {
    region_slot_.emplace(ds.regions[i].region_id, static_cast<int>(i));
  }
  cells_.reserve(ds.observations.size());
  for (const auto& obs : ds.observations) {
    auto it = region_slot_.find(obs.region_id);
    if (it == region_slot_.end()) continue;  // orphan row; validate reports it as missing grid
    const int ind = ignore_indicator_ ? 0 : static_cast<int>(obs.indicator);
    // first occurrence wins; duplicates surface through validate_panel
    cells_.emplace(cell_key(it->second, static_cast<int>(obs.business), ind, obs.month),
                   obs.value);
  }
}

std::optional<double> PanelIndex::value(std::string_view region_id, Business b, Indicator ind,
                                        int month) const {
  auto rit = region_slot_.find(std::string(region_id));
  if (rit == region_slot_.end()) return std::nullopt;
  const int i = ignore_indicator_ ? 0 : static_cast<int>(ind);
  auto cit = cells_.find(cell_key(rit->second, static_cast<int>(b), i, month));
  if (cit == cells_.end()) return std::nullopt;
  return cit->second;
}

PanelDataset parse_panel(std::istream& in, PanelMode mode) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(0, "empty input, expected CSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw ParseError(1, "bad header, expected `" + std::string(kHeader) + "`");
  }

  struct RawRow {
    std::string region_id;
    Business business;
    Indicator indicator;
    std::string month_tag;
    double value;
    std::size_t line_no;
  };

  PanelDataset ds;
  ds.mode = mode;
  std::vector<RawRow> rows;
  std::unordered_map<std::string, std::size_t> region_pos;
  std::map<std::string, int> tags;  // tag -> ordinal, sorted

  const bool precomputed = mode == PanelMode::precomputed_coefficients;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const auto f = split_fields(line);
    if (f.size() != 7) {
      throw ParseError(line_no, "expected 7 fields, got " + std::to_string(f.size()));
    }
    if (f[0].empty()) throw ParseError(line_no, "empty region_id");

    const auto lvl = admin_level_from(f[2]);
    if (!lvl) throw ParseError(line_no, "unknown admin_level `" + std::string(f[2]) + "`");
    const auto bus = business_from(f[3]);
    if (!bus) throw ParseError(line_no, "unknown business `" + std::string(f[3]) + "`");

    Indicator ind = Indicator::penetration;
    if (precomputed) {
      // indicator column is ignored; `-` is the conventional placeholder
      if (f[4] != "-" && !indicator_from(f[4])) {
        throw ParseError(line_no, "unknown indicator `" + std::string(f[4]) + "`");
      }
    } else {
      const auto parsed = indicator_from(f[4]);
      if (!parsed) throw ParseError(line_no, "unknown indicator `" + std::string(f[4]) + "`");
      ind = *parsed;
    }

    if (!parse_month_tag(f[5], nullptr, nullptr)) {
      throw ParseError(line_no, "bad month `" + std::string(f[5]) + "`, expected YYYY-MM");
    }

    double value = 0.0;
    const auto res = std::from_chars(f[6].data(), f[6].data() + f[6].size(), value);
    if (res.ec != std::errc() || res.ptr != f[6].data() + f[6].size()) {
      throw ParseError(line_no, "non-numeric value `" + std::string(f[6]) + "`");
    }
    if (!std::isfinite(value)) throw ParseError(line_no, "non-finite value");
    if (value < 0.0) throw ParseError(line_no, "negative value " + std::string(f[6]));

    const std::string region_id(f[0]);
    auto it = region_pos.find(region_id);
    if (it == region_pos.end()) {
      region_pos.emplace(region_id, ds.regions.size());
      ds.regions.push_back({region_id, std::string(f[1]), *lvl});
    } else {
      const RegionRecord& seen = ds.regions[it->second];
      if (seen.region_name != f[1] || seen.admin_level != *lvl) {
        throw ParseError(line_no, "region `" + region_id + "` redefined with different name or admin_level");
      }
    }

    tags.emplace(std::string(f[5]), 0);
    rows.push_back({region_id, *bus, ind, std::string(f[5]), value, line_no});
  }

  int national_count = 0;
  for (const auto& r : ds.regions) {
    if (r.admin_level == AdminLevel::national) ++national_count;
  }
  if (national_count > 1) throw ParseError(0, "more than one national record");

  // Dense chronological month indices; calendar gaps rejected.
  {
    int idx = 0;
    int prev_ord = -1;
    for (auto& [tag, slot] : tags) {
      const int ord = month_ordinal(tag);
      if (prev_ord >= 0 && ord != prev_ord + 1) {
        throw ParseError(0, "calendar gap between months `" + ds.month_tags.back() + "` and `" + tag + "`");
      }
      prev_ord = ord;
      slot = idx++;
      ds.month_tags.push_back(tag);
    }
  }

  std::unordered_map<std::uint64_t, std::size_t> first_line;
  first_line.reserve(rows.size());
  ds.observations.reserve(rows.size());
  for (const auto& row : rows) {
    const int month = tags.at(row.month_tag);
    const int region = static_cast<int>(region_pos.at(row.region_id));
    const int ind = precomputed ? 0 : static_cast<int>(row.indicator);
    const auto key = cell_key(region, static_cast<int>(row.business), ind, month);
    auto [it, inserted] = first_line.emplace(key, row.line_no);
    if (!inserted) {
      throw ParseError(row.line_no, "duplicate observation key, first seen at line " +
                                        std::to_string(it->second));
    }
    ds.observations.push_back({row.region_id, row.business, row.indicator, month, row.value});
  }
  return ds;
}

void serialize_panel(const PanelDataset& ds, std::ostream& out) {
  out << kHeader << '\n';
  const bool precomputed = ds.mode == PanelMode::precomputed_coefficients;
  std::unordered_map<std::string_view, const RegionRecord*> regions;
  regions.reserve(ds.regions.size());
  for (const auto& r : ds.regions) regions.emplace(r.region_id, &r);
  for (const auto& obs : ds.observations) {
    const auto it = regions.find(obs.region_id);
    const RegionRecord* region = it == regions.end() ? nullptr : it->second;
    const char* name = region ? region->region_name.c_str() : "";
    const char* lvl = region ? to_string(region->admin_level) : "province";
    out << obs.region_id << ',' << name << ',' << lvl << ',' << to_string(obs.business) << ','
        << (precomputed ? "-" : to_string(obs.indicator)) << ','
        << ds.month_tags[static_cast<std::size_t>(obs.month)] << ',' << format_value(obs.value)
        << '\n';
  }
}

ValidationReport validate_panel(const PanelDataset& ds) {
  ValidationReport report;
  report.observation_count = ds.observations.size();

  const bool precomputed = ds.mode == PanelMode::precomputed_coefficients;
  std::unordered_map<std::string, int> region_slot;
  for (std::size_t i = 0; i < ds.regions.size(); ++i) {
    region_slot.emplace(ds.regions[i].region_id, static_cast<int>(i));
  }

  std::unordered_map<std::uint64_t, int> counts;
  counts.reserve(ds.observations.size());
  for (const auto& obs : ds.observations) {
    auto it = region_slot.find(obs.region_id);
    if (it == region_slot.end()) continue;
    const int ind = precomputed ? 0 : static_cast<int>(obs.indicator);
    ++counts[cell_key(it->second, static_cast<int>(obs.business), ind, obs.month)];
  }

  // duplicates in observation order, reported once per extra occurrence
  std::unordered_map<std::uint64_t, int> seen;
  for (const auto& obs : ds.observations) {
    auto it = region_slot.find(obs.region_id);
    if (it == region_slot.end()) continue;
    const int ind = precomputed ? 0 : static_cast<int>(obs.indicator);
    const auto key = cell_key(it->second, static_cast<int>(obs.business), ind, obs.month);
    if (++seen[key] > 1) {
      report.duplicate_cells.push_back({obs.region_id, obs.business, obs.indicator, obs.month});
    }
  }

  const int indicators = precomputed ? 1 : kIndicatorCount;
  for (std::size_t r = 0; r < ds.regions.size(); ++r) {
    for (int b = 0; b < kBusinessCount; ++b) {
      for (int ind = 0; ind < indicators; ++ind) {
        for (int m = 0; m < ds.month_count(); ++m) {
          if (!counts.count(cell_key(static_cast<int>(r), b, ind, m))) {
            report.missing_cells.push_back({ds.regions[r].region_id, static_cast<Business>(b),
                                            static_cast<Indicator>(ind), m});
          }
        }
      }
    }
  }
  if (ds.regions.empty() || ds.month_count() == 0) {
    // empty grid enumerates no cells; an empty dataset is still incomplete
    report.is_complete = false;
    return report;
  }
  report.is_complete = report.missing_cells.empty() && report.duplicate_cells.empty();
  return report;
}

double national_slice(const PanelDataset& ds, const PanelIndex& index, Business b, Indicator ind,
                      int month, NationalPolicy policy) {
  if (ds.mode != PanelMode::raw_indicators) {
    throw std::invalid_argument("national_slice requires a raw_indicators panel");
  }
  const RegionRecord* national = ds.national_region();
  if (national) {
    const auto v = index.value(national->region_id, b, ind, month);
    if (v) return *v;
    if (policy == NationalPolicy::require_record) {
      throw std::invalid_argument(std::string("national cell missing: ") + to_string(b) + "/" +
                                  to_string(ind) + "/month " + std::to_string(month));
    }
  } else if (policy == NationalPolicy::require_record) {
    throw std::invalid_argument("no national record in dataset");
  }

  // aggregate_mean: unweighted mean over non-national regions
  double sum = 0.0;
  int n = 0;
  for (const auto& r : ds.regions) {
    if (r.admin_level == AdminLevel::national) continue;
    const auto v = index.value(r.region_id, b, ind, month);
    if (!v) {
      throw std::invalid_argument("cannot aggregate national baseline, region `" + r.region_id +
                                  "` is missing the cell");
    }
    sum += *v;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("no regional values to aggregate");
  return sum / n;
}

double national_slice(const PanelDataset& ds, Business b, Indicator ind, int month,
                      NationalPolicy policy) {
  return national_slice(ds, PanelIndex(ds), b, ind, month, policy);
}

PanelDataset impute_missing_mean(const PanelDataset& ds) {
  PanelDataset out = ds;
  const PanelIndex index(ds);
  const bool precomputed = ds.mode == PanelMode::precomputed_coefficients;
  const int indicators = precomputed ? 1 : kIndicatorCount;

  for (const auto& region : ds.regions) {
    for (int b = 0; b < kBusinessCount; ++b) {
      for (int ind = 0; ind < indicators; ++ind) {
        double sum = 0.0;
        int present = 0;
        for (int m = 0; m < ds.month_count(); ++m) {
          const auto v = index.value(region.region_id, static_cast<Business>(b),
                                     static_cast<Indicator>(ind), m);
          if (v) {
            sum += *v;
            ++present;
          }
        }
        if (present == ds.month_count()) continue;
        if (present == 0) {
          throw std::invalid_argument("cannot impute `" + region.region_id + "`/" +
                                      to_string(static_cast<Business>(b)) +
                                      ": no observed months");
        }
        const double mean = sum / present;
        for (int m = 0; m < ds.month_count(); ++m) {
          const auto v = index.value(region.region_id, static_cast<Business>(b),
                                     static_cast<Indicator>(ind), m);
          if (!v) {
            out.observations.push_back({region.region_id, static_cast<Business>(b),
                                        static_cast<Indicator>(ind), m, mean});
          }
        }
      }
    }
  }
  return out;
}

}  // namespace riskmap
