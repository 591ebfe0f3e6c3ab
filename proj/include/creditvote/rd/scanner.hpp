#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "creditvote/kernel/regression.hpp"
#include "creditvote/records.hpp"

namespace creditvote::rd {

struct RdConfig {
  std::vector<int> cutoff_grid = default_grid();
  int polynomial_degree = 4;
  // Observations enter a candidate fit when their score lies in
  // [grid_min - window_margin, grid_max + window_margin]; a half-width, when
  // set, further restricts them to |score - cutoff| <= window_halfwidth.
  int window_margin = 25;
  std::optional<int> window_halfwidth;
  std::size_t min_observations = 500;
  double alpha_level = 0.05;
  kernel::CovarianceType covariance = kernel::CovarianceType::HC1;
  // false: a common higher-order polynomial with only the jump differing.
  bool side_specific_polynomial = true;
  // Pool each odd (non-election) year into the following election year.
  bool pool_non_election_years = false;
  // Candidates within this distance of a larger significant jump are dropped.
  int contiguity_points = 5;

  static std::vector<int> default_grid();
  void validate() const;  // throws ConfigError
  double critical_value() const;
  int window_low() const;
  int window_high() const;
};

struct ZoneYear {
  std::string commuting_zone;
  int year = 0;
  friend auto operator<=>(const ZoneYear&, const ZoneYear&) = default;
};

struct CutoffEstimate {
  std::string commuting_zone;
  int year = 0;
  int cutoff = 0;
  double alpha = 0.0;  // jump in asinh(total credit limit)
  double se = 0.0;
  double t_stat = 0.0;
  std::size_t n_left = 0;
  std::size_t n_right = 0;
};

enum class SkipReason { InsufficientObservations, NoSupportOnOneSide, RankDeficient };
std::string_view to_string(SkipReason reason);

struct ScanSkip {
  std::string commuting_zone;
  int year = 0;
  std::optional<int> cutoff;  // empty when the whole zone-year was skipped
  SkipReason reason = SkipReason::InsufficientObservations;
  std::size_t observations = 0;
  std::string detail;
};

enum class Provenance { Detected, ImputedForward, ImputedBackward };
std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view name);

struct ThresholdEstimate {
  std::string commuting_zone;
  int year = 0;
  int cutoff = 0;
  double alpha = 0.0;
  double se = 0.0;
  double t_stat = 0.0;
  Provenance provenance = Provenance::Detected;
  int source_year = 0;  // year whose detection this threshold carries
};

// ln(v + sqrt(v^2 + 1)). Throws std::invalid_argument for non-finite input.
double asinh_transform(double v);

using CutoffFit = std::variant<CutoffEstimate, ScanSkip>;

// Regresses asinh(limit) on the jump dummy and the polynomial in the
// centred score, with county fixed effects absorbed. Degenerate support and
// rank problems come back as a ScanSkip rather than an exception.
CutoffFit fit_rd_at_cutoff(std::span<const CreditRecord> records, int cutoff,
                           const RdConfig& config, const ZoneYear& key = {});

struct ScanResult {
  std::vector<CutoffEstimate> estimates;  // ascending cutoff
  std::vector<ScanSkip> skips;
};

ScanResult scan_cutoffs(std::span<const CreditRecord> records, const RdConfig& config,
                        const ZoneYear& key = {});

// Positive significant candidates, largest jump wins, ties to the lower cutoff.
std::optional<ThresholdEstimate> select_threshold(std::span<const CutoffEstimate> estimates,
                                                  const RdConfig& config);

// Drops candidates within config.contiguity_points of a larger significant jump.
std::vector<CutoffEstimate> suppress_contiguous(std::span<const CutoffEstimate> estimates,
                                                const RdConfig& config);

using ThresholdSeries = std::map<int, std::optional<ThresholdEstimate>>;

// Fills gaps forward from the latest detection and leading gaps backward
// from the first one. Returns nullopt when no year has a detection.
std::optional<std::map<int, ThresholdEstimate>> impute_thresholds(const ThresholdSeries& series);

// Election year a record contributes to, or nullopt when it is unused.
std::optional<int> estimation_year(int year, std::span<const int> election_years,
                                   bool pool_non_election_years);

struct ZoneYearScan {
  ZoneYear key;
  std::size_t observations = 0;
  std::vector<CutoffEstimate> estimates;
  std::optional<ThresholdEstimate> selected;
};

struct PanelScan {
  std::vector<ZoneYearScan> zone_years;      // sorted by (zone, year)
  std::vector<ThresholdEstimate> thresholds;  // after imputation, sorted
  std::vector<ScanSkip> skips;
  std::vector<std::string> dropped_zones;  // never detected in any year
  std::size_t regressions = 0;            // candidate fits that produced an estimate
};

// Scans every (zone, election year) in parallel and merges deterministically.
PanelScan scan_panel(std::span<const CreditRecord> records, const RdConfig& config,
                     std::span<const int> election_years, int workers = 1);

}  // namespace creditvote::rd
