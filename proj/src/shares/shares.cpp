#include "creditvote/shares/shares.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace creditvote::shares {

std::pair<std::size_t, std::size_t> count_near_threshold(std::span<const int> scores, int cutoff,
                                                         int bandwidth) {
  std::size_t below = 0;
  std::size_t above = 0;
  for (int s : scores) {
    if (s >= cutoff - bandwidth && s <= cutoff - 1) ++below;
    else if (s >= cutoff && s <= cutoff + bandwidth - 1) ++above;
  }
  return {below, above};
}

ShareBuild compute_shares(std::span<const CreditRecord> records,
                          std::span<const rd::ThresholdEstimate> thresholds,
                          const geo::CellAssigner& assigner, std::span<const int> years,
                          std::span<const int> bandwidths) {
  for (int b : bandwidths)
    if (b < 1) throw std::invalid_argument(fmt::format("bandwidth must be positive, got {}", b));

  std::map<std::pair<std::string, int>, int> cutoff_of;
  for (const auto& t : thresholds) cutoff_of[{t.commuting_zone, t.year}] = t.cutoff;

  std::map<std::pair<std::string, int>, std::vector<int>> scores;
  std::map<int, std::size_t> unassigned;
  for (const auto& r : records) {
    if (std::find(years.begin(), years.end(), r.year) == years.end()) continue;
    if (!r.valid()) continue;
    auto cell = assigner.cell_for(r.zcta, r.year);
    if (!cell) {
      ++unassigned[r.year];
      continue;
    }
    scores[{*cell, r.year}].push_back(r.credit_score);
  }

  ShareBuild out;
  for (const auto& [year, count] : unassigned)
    out.log.push_back(fmt::format("{}: {} records could not be assigned to a cell", year, count));

  static const std::vector<int> kEmpty;
  for (const auto& cell : assigner.cells()) {
    for (int year : years) {
      auto found = scores.find({cell.cell_id, year});
      const auto& cell_scores = found == scores.end() ? kEmpty : found->second;
      auto cutoff = cutoff_of.find({cell.commuting_zone, year});
      if (cutoff == cutoff_of.end())
        out.log.push_back(fmt::format("{} {}: commuting zone {} has no threshold", cell.cell_id,
                                      year, cell.commuting_zone));
      for (int b : bandwidths) {
        ShareRecord rec;
        rec.cell_id = cell.cell_id;
        rec.year = year;
        rec.bandwidth = b;
        rec.cell_population = cell_scores.size();
        if (cutoff != cutoff_of.end()) {
          const auto [below, above] = count_near_threshold(cell_scores, cutoff->second, b);
          const double pop = static_cast<double>(cell_scores.size());
          const double sb = pop > 0 ? static_cast<double>(below) / pop : 0.0;
          const double sa = pop > 0 ? static_cast<double>(above) / pop : 0.0;
          rec.share_below = sb;
          rec.share_above = sa;
          // Same partition, so the total is exactly the sum of its parts.
          rec.share_total = sa + sb;
        }
        out.records.push_back(std::move(rec));
      }
    }
  }
  std::sort(out.records.begin(), out.records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.cell_id, a.year, a.bandwidth) < std::tie(b.cell_id, b.year, b.bandwidth);
  });
  return out;
}

std::vector<ShareSummaryRow> summarize_shares(std::span<const ShareRecord> records) {
  std::map<int, std::vector<const ShareRecord*>> by_bandwidth;
  for (const auto& r : records)
    if (r.share_total && r.cell_population > 0) by_bandwidth[r.bandwidth].push_back(&r);

  std::vector<ShareSummaryRow> rows;
  for (const auto& [bw, group] : by_bandwidth) {
    for (ShareKind kind : {ShareKind::Total, ShareKind::Above, ShareKind::Below}) {
      auto value = [kind](const ShareRecord& r) {
        switch (kind) {
          case ShareKind::Total: return *r.share_total;
          case ShareKind::Above: return *r.share_above;
          case ShareKind::Below: return *r.share_below;
        }
        return 0.0;
      };
      ShareSummaryRow row;
      row.bandwidth = bw;
      row.kind = kind;
      row.cells = group.size();
      row.min = value(*group.front());
      row.max = row.min;
      double wx = 0.0;
      for (const auto* r : group) {
        const double w = static_cast<double>(r->cell_population);
        const double x = value(*r);
        row.total_weight += w;
        wx += w * x;
        row.min = std::min(row.min, x);
        row.max = std::max(row.max, x);
      }
      row.mean = wx / row.total_weight;
      if (group.size() > 1) {
        double ss = 0.0;
        for (const auto* r : group) {
          const double d = value(*r) - row.mean;
          ss += static_cast<double>(r->cell_population) * d * d;
        }
        const double n = static_cast<double>(group.size());
        row.sd = std::sqrt(ss / row.total_weight * n / (n - 1.0));
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_share_summary(std::span<const ShareSummaryRow> rows, std::size_t observations) {
  std::string out = fmt::format(
      "Shares near the threshold by bandwidth (BW), population weighted, {} individuals\n",
      observations);
  out += fmt::format("{:<24}{:>10}{:>10}{:>10}{:>10}\n", "Variable", "Mean", "St. Dev.", "Min", "Max");
  for (const auto& r : rows) {
    const char* kind = r.kind == ShareKind::Total ? "tot" : r.kind == ShareKind::Above ? "above" : "below";
    out += fmt::format("{:<24}{:>10.3f}{:>10.3f}{:>10.3g}{:>10.3g}\n",
                       fmt::format("share({}), BW: {}", kind, r.bandwidth), r.mean, r.sd, r.min,
                       r.max);
  }
  return out;
}

}  // namespace creditvote::shares
