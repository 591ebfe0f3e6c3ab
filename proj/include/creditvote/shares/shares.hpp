#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "creditvote/geo/crosswalk.hpp"
#include "creditvote/rd/scanner.hpp"
#include "creditvote/records.hpp"

namespace creditvote::shares {

inline constexpr int kStandardBandwidths[] = {5, 10, 15, 20, 25};

// Share of a cell-year's scored individuals near its zone's threshold.
// Below: [cutoff - b, cutoff - 1]; above: [cutoff, cutoff + b - 1].
struct ShareRecord {
  std::string cell_id;
  int year = 0;
  int bandwidth = 0;
  std::optional<double> share_total;  // empty when the zone has no threshold
  std::optional<double> share_above;
  std::optional<double> share_below;
  std::size_t cell_population = 0;

  friend bool operator==(const ShareRecord&, const ShareRecord&) = default;
};

struct ShareBuild {
  std::vector<ShareRecord> records;  // sorted by (cell, year, bandwidth)
  std::vector<std::string> log;
};

// Counts are split by cell and year through the assigner; years lists the
// election years to emit for every cell.
ShareBuild compute_shares(std::span<const CreditRecord> records,
                          std::span<const rd::ThresholdEstimate> thresholds,
                          const geo::CellAssigner& assigner, std::span<const int> years,
                          std::span<const int> bandwidths);

// Counts of one cell-year at one threshold: returns (below, above).
std::pair<std::size_t, std::size_t> count_near_threshold(std::span<const int> scores, int cutoff,
                                                         int bandwidth);

enum class ShareKind { Total, Above, Below };

struct ShareSummaryRow {
  int bandwidth = 0;
  ShareKind kind = ShareKind::Total;
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t cells = 0;
  double total_weight = 0.0;
};

// Population-weighted mean, standard deviation, min and max per bandwidth
// and share kind. The sd follows analytic-weight conventions:
// sqrt(sum w (x - m)^2 / sum w * n / (n - 1)), zero for a single cell.
// Records with null shares or zero population are skipped.
std::vector<ShareSummaryRow> summarize_shares(std::span<const ShareRecord> records);

// Fixed-width table with one row per bandwidth and kind.
std::string format_share_summary(std::span<const ShareSummaryRow> rows, std::size_t observations);

}  // namespace creditvote::shares
