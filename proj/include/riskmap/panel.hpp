#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace riskmap {

// The four internet-finance business lines, in fixed column order.
enum class Business : int { payment = 0, fund = 1, credit = 2, insurance = 3 };

// Raw indicators combined into a business coefficient.
enum class Indicator : int { penetration = 0, amount_per_capita = 1, count_per_capita = 2 };

enum class AdminLevel : int { province = 0, city = 1, national = 2 };

// raw_indicators: values are indicator levels, a national baseline row is
// required and coefficients are computed on the fly.
// precomputed_coefficients: values are business coefficients already; the
// indicator column is ignored.
enum class PanelMode : int { raw_indicators = 0, precomputed_coefficients = 1 };

inline constexpr int kBusinessCount = 4;
inline constexpr int kIndicatorCount = 3;

const char* to_string(Business b);
const char* to_string(Indicator ind);
const char* to_string(AdminLevel lvl);
const char* to_string(PanelMode mode);
std::optional<Business> business_from(std::string_view token);
std::optional<Indicator> indicator_from(std::string_view token);
std::optional<AdminLevel> admin_level_from(std::string_view token);

struct RegionRecord {
  std::string region_id;
  std::string region_name;
  AdminLevel admin_level = AdminLevel::province;

  bool operator==(const RegionRecord&) const = default;
};

struct Observation {
  std::string region_id;
  Business business = Business::payment;
  Indicator indicator = Indicator::penetration;  // ignored in precomputed mode
  int month = 0;                                 // dense 0-based index
  double value = 0.0;

  bool operator==(const Observation&) const = default;
};

// Immutable after construction; plain value type, safe to share.
struct PanelDataset {
  std::vector<RegionRecord> regions;       // first-seen order, ids unique
  std::vector<Observation> observations;   // input order
  std::vector<std::string> month_tags;     // YYYY-MM, chronological, gapless
  PanelMode mode = PanelMode::precomputed_coefficients;

  int month_count() const { return static_cast<int>(month_tags.size()); }
  const RegionRecord* find_region(std::string_view region_id) const;
  const RegionRecord* national_region() const;

  bool operator==(const PanelDataset&) const = default;
};

// Identifies one cell of the expected grid in validation reports.
struct CellRef {
  std::string region_id;
  Business business = Business::payment;
  Indicator indicator = Indicator::penetration;
  int month = 0;

  bool operator==(const CellRef&) const = default;
};

struct ValidationReport {
  std::size_t observation_count = 0;
  std::vector<CellRef> missing_cells;
  std::vector<CellRef> duplicate_cells;
  bool is_complete = false;
};

// Hash lookup over a dataset's observations. Build once, query many times.
// In precomputed mode the indicator argument is ignored.
class PanelIndex {
 public:
  explicit PanelIndex(const PanelDataset& ds);

  std::optional<double> value(std::string_view region_id, Business b, Indicator ind,
                              int month) const;

 private:
  std::unordered_map<std::string, int> region_slot_;
  std::unordered_map<std::uint64_t, double> cells_;
  bool ignore_indicator_;
};

// Reads the CSV schema
//   region_id,region_name,admin_level,business,indicator,month,value
// Month tags are remapped to dense chronological indices; calendar gaps are
// rejected. Throws ParseError on malformed rows, unknown tokens, negative or
// non-numeric values and duplicate keys (both line numbers reported).
PanelDataset parse_panel(std::istream& in, PanelMode mode);

// Inverse of parse_panel; parse(serialize(ds)) == ds.
void serialize_panel(const PanelDataset& ds, std::ostream& out);

// Enumerates the full expected grid (regions x businesses x indicators-or-1 x
// months) and reports gaps and duplicates. Never mutates the dataset.
ValidationReport validate_panel(const PanelDataset& ds);

enum class NationalPolicy : int {
  require_record = 0,  // a national record must carry the cell
  aggregate_mean = 1,  // fall back to the unweighted mean over regions
};

// National baseline for one (business, indicator, month) cell. Raw mode only.
double national_slice(const PanelDataset& ds, const PanelIndex& index, Business b,
                      Indicator ind, int month,
                      NationalPolicy policy = NationalPolicy::require_record);
double national_slice(const PanelDataset& ds, Business b, Indicator ind, int month,
                      NationalPolicy policy = NationalPolicy::require_record);

// Fills each missing grid cell with the mean over months of the same
// (region, business, indicator) series. Errors when a series is entirely
// absent. Returns a new dataset; imputed observations are appended in grid
// order.
PanelDataset impute_missing_mean(const PanelDataset& ds);

}  // namespace riskmap
