#include <gtest/gtest.h>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <variant>

#include "creditvote/errors.hpp"
#include "creditvote/rd/scanner.hpp"

using namespace creditvote;
using namespace creditvote::rd;

namespace {

// asinh(limit) = 9 + jump 1[score >= cutoff] + 0.01 (score - 600) + N(0, sigma)
std::vector<CreditRecord> planted(std::uint64_t seed, int n, int cutoff, double jump, int lo = 560, int hi = 660,
                                  double sigma = 0.3, int year = 2008, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> score(lo, hi);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<CreditRecord> out(n);
  for (int i = 0; i < n; ++i) {
    auto& r = out[i];
    r.person_id = static_cast<std::uint64_t>(i);
    r.year = year;
    r.credit_score = score(rng);
    const double v = 9.0 + jump * (r.credit_score >= cutoff) + 0.01 * (r.credit_score - 600) + noise(rng);
    r.total_credit_limit = scale * std::sinh(v);
    r.zcta = "10001";
    r.county_fips = i % 3 == 0 ? "01001" : "01003";
    r.commuting_zone = "CZ1";
  }
  return out;
}

CutoffEstimate est(int cutoff, double alpha, double t) {
  CutoffEstimate e;
  e.commuting_zone = "CZ1";
  e.year = 2008;
  e.cutoff = cutoff;
  e.alpha = alpha;
  e.t_stat = t;
  e.se = alpha / t;
  return e;
}

}  // namespace

TEST(Asinh, Examples) {
  EXPECT_EQ(asinh_transform(0.0), 0.0);
  EXPECT_NEAR(asinh_transform(1.0), std::log(1.0 + std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(asinh_transform(1.0), 0.881374, 1e-6);
  EXPECT_NEAR(asinh_transform(11013.0), 10.0, 1e-4);
  EXPECT_NEAR(std::sinh(asinh_transform(11013.0) + 1.14), 34435.0, 0.005 * 34435.0);
  EXPECT_THROW(asinh_transform(std::nan("")), std::invalid_argument);
  double prev = -1.0;
  for (double v : {0.0, 0.5, 1.0, 10.0, 1e3, 1e6}) {
    EXPECT_GT(asinh_transform(v), prev);
    prev = asinh_transform(v);
  }
}

TEST(FitRd, PlantedJumpWithinThreeSe) {
  const auto records = planted(11, 2000, 600, 1.2);
  const auto fit = fit_rd_at_cutoff(records, 600, RdConfig{});
  ASSERT_TRUE(std::holds_alternative<CutoffEstimate>(fit));
  const auto& e = std::get<CutoffEstimate>(fit);
  EXPECT_NEAR(e.alpha, 1.2, 3.0 * e.se);
  EXPECT_NEAR(e.t_stat, e.alpha / e.se, 1e-12);
  EXPECT_GE(e.n_left + e.n_right, 500u);
}

TEST(FitRd, FlatDgpSize) {
  int small = 0;
  for (int r = 0; r < 500; ++r) {
    const auto records = planted(1000 + r, 2000, 600, 0.0);
    const auto fit = fit_rd_at_cutoff(records, 600, RdConfig{});
    ASSERT_TRUE(std::holds_alternative<CutoffEstimate>(fit));
    if (std::abs(std::get<CutoffEstimate>(fit).t_stat) < 1.96) ++small;
  }
  EXPECT_GE(small, 465);  // 93%
}

TEST(FitRd, OneSidedSupportIsSkip) {
  const auto records = planted(12, 800, 600, 1.0, 600, 660);
  const auto fit = fit_rd_at_cutoff(records, 600, RdConfig{});
  ASSERT_TRUE(std::holds_alternative<ScanSkip>(fit));
  EXPECT_EQ(std::get<ScanSkip>(fit).reason, SkipReason::NoSupportOnOneSide);
}

TEST(Scan, FullGridGivesTwentyOneEstimates) {
  const auto records = planted(13, 3000, 600, 1.0, 535, 685);
  const auto scan = scan_cutoffs(records, RdConfig{});
  ASSERT_EQ(scan.estimates.size(), 21u);
  EXPECT_TRUE(scan.skips.empty());
  for (std::size_t i = 0; i < 21; ++i) EXPECT_EQ(scan.estimates[i].cutoff, 560 + 5 * static_cast<int>(i));
}

TEST(Scan, BelowMinimumObservationsIsSkipped) {
  const auto records = planted(14, 499, 600, 1.2);
  const auto scan = scan_cutoffs(records, RdConfig{});
  EXPECT_TRUE(scan.estimates.empty());
  ASSERT_EQ(scan.skips.size(), 1u);
  EXPECT_EQ(scan.skips[0].reason, SkipReason::InsufficientObservations);
  EXPECT_EQ(scan.skips[0].observations, 499u);
  EXPECT_FALSE(scan.skips[0].cutoff.has_value());
  EXPECT_NE(scan.skips[0].detail.find("more than 500 observations"), std::string::npos);

  const auto enough = planted(14, 500, 600, 1.2);
  EXPECT_FALSE(scan_cutoffs(enough, RdConfig{}).estimates.empty());
}

TEST(Scan, PlantedJumpIsMaxTCandidate) {
  int hits = 0;
  for (int r = 0; r < 100; ++r) {
    const auto scan = scan_cutoffs(planted(2000 + r, 2000, 600, 1.2), RdConfig{});
    auto best = std::max_element(scan.estimates.begin(), scan.estimates.end(),
                                 [](const auto& a, const auto& b) { return a.t_stat < b.t_stat; });
    if (best != scan.estimates.end() && std::abs(best->cutoff - 600) <= 5) ++hits;
  }
  EXPECT_GE(hits, 95);
}

TEST(Select, LargestCoefficientWins) {
  const std::vector<CutoffEstimate> e{est(560, 0.5, 3.0), est(600, 1.2, 4.0)};
  auto t = select_threshold(e, RdConfig{});
  ASSERT_TRUE(t);
  EXPECT_EQ(t->cutoff, 600);
  EXPECT_EQ(t->provenance, Provenance::Detected);
  EXPECT_EQ(t->source_year, 2008);
}

TEST(Select, NothingSignificantOrNegative) {
  EXPECT_FALSE(select_threshold(std::vector{est(580, 0.4, 1.5), est(600, 0.9, 1.9)}, RdConfig{}));
  EXPECT_FALSE(select_threshold(std::vector{est(580, -0.8, -4.0)}, RdConfig{}));
  EXPECT_FALSE(select_threshold(std::vector<CutoffEstimate>{}, RdConfig{}));
}

TEST(Select, TieGoesToLowerCutoff) {
  auto t = select_threshold(std::vector{est(620, 1.0, 5.0), est(580, 1.0, 3.0)}, RdConfig{});
  ASSERT_TRUE(t);
  EXPECT_EQ(t->cutoff, 580);
}

TEST(Select, ContiguousCandidatesSuppressed) {
  const auto kept = suppress_contiguous(std::vector{est(595, 0.7, 3.0), est(600, 1.1, 5.0), est(605, 0.6, 2.5),
                                                    est(640, 0.3, 2.1)},
                                        RdConfig{});
  std::vector<int> cutoffs;
  for (const auto& e : kept) cutoffs.push_back(e.cutoff);
  EXPECT_EQ(cutoffs, (std::vector<int>{600, 640}));
}

TEST(Impute, ForwardFill) {
  ThresholdSeries s;
  ThresholdEstimate a{"CZ1", 2004, 600, 1.0, 0.1, 10, Provenance::Detected, 2004};
  ThresholdEstimate c{"CZ1", 2008, 620, 1.1, 0.1, 11, Provenance::Detected, 2008};
  s[2004] = a;
  s[2006] = std::nullopt;
  s[2008] = c;
  const auto out = impute_thresholds(s);
  ASSERT_TRUE(out);
  EXPECT_EQ(out->at(2006).cutoff, 600);
  EXPECT_EQ(out->at(2006).provenance, Provenance::ImputedForward);
  EXPECT_EQ(out->at(2006).source_year, 2004);
  EXPECT_EQ(out->at(2006).year, 2006);
  EXPECT_EQ(out->at(2008).provenance, Provenance::Detected);
}

TEST(Impute, BackwardFillForLeadingGap) {
  ThresholdSeries s;
  s[2004] = std::nullopt;
  s[2006] = ThresholdEstimate{"CZ1", 2006, 610, 1.0, 0.1, 10, Provenance::Detected, 2006};
  const auto out = impute_thresholds(s);
  ASSERT_TRUE(out);
  EXPECT_EQ(out->at(2004).cutoff, 610);
  EXPECT_EQ(out->at(2004).provenance, Provenance::ImputedBackward);
  EXPECT_EQ(out->at(2004).source_year, 2006);
}

TEST(Impute, NoDetectionDropsZone) {
  ThresholdSeries s{{2004, std::nullopt}, {2006, std::nullopt}};
  EXPECT_FALSE(impute_thresholds(s));
}

TEST(EstimationYear, PoolingOddYears) {
  const std::vector<int> years{2004, 2006, 2008};
  EXPECT_EQ(estimation_year(2006, years, false), 2006);
  EXPECT_FALSE(estimation_year(2005, years, false));
  EXPECT_EQ(estimation_year(2005, years, true), 2006);
  EXPECT_FALSE(estimation_year(2009, years, true));
}

namespace {

std::vector<CreditRecord> small_panel() {
  std::vector<CreditRecord> all;
  int zone = 0;
  for (int cut : {580, 600, 630}) {
    for (int year : {2004, 2005, 2006, 2008}) {
      // 2008 is too thin to scan and has to be imputed
      auto part = planted(100 * zone + year, year == 2008 ? 200 : 1200, cut, 1.2, 535, 685, 0.3, year);
      for (auto& r : part) r.commuting_zone = fmt::format("CZ{}", zone);
      all.insert(all.end(), part.begin(), part.end());
    }
    ++zone;
  }
  auto tiny = planted(77, 300, 600, 1.2, 535, 685, 0.3, 2004);
  for (auto& r : tiny) r.commuting_zone = "CZ9";
  all.insert(all.end(), tiny.begin(), tiny.end());
  return all;
}

}  // namespace

TEST(ScanPanel, DeterministicAcrossWorkers) {
  const auto records = small_panel();
  const std::vector<int> years{2004, 2006, 2008};
  const auto a = scan_panel(records, RdConfig{}, years, 1);
  const auto b = scan_panel(records, RdConfig{}, years, 4);
  ASSERT_EQ(a.thresholds.size(), b.thresholds.size());
  for (std::size_t i = 0; i < a.thresholds.size(); ++i) {
    EXPECT_EQ(a.thresholds[i].cutoff, b.thresholds[i].cutoff);
    EXPECT_EQ(a.thresholds[i].alpha, b.thresholds[i].alpha);
  }
  EXPECT_EQ(a.regressions, b.regressions);
  EXPECT_EQ(a.skips.size(), b.skips.size());
  EXPECT_EQ(a.dropped_zones, (std::vector<std::string>{"CZ9"}));
}

TEST(ScanPanel, PlantedZonesRecoveredAndImputed) {
  const auto scan = scan_panel(small_panel(), RdConfig{}, std::vector<int>{2004, 2006, 2008}, 2);
  std::map<std::string, int> truth{{"CZ0", 580}, {"CZ1", 600}, {"CZ2", 630}};
  for (const auto& t : scan.thresholds) {
    EXPECT_LE(std::abs(t.cutoff - truth.at(t.commuting_zone)), 5) << t.commuting_zone << " " << t.year;
    if (t.year == 2008) {
      EXPECT_EQ(t.provenance, Provenance::ImputedForward);
      EXPECT_EQ(t.source_year, 2006);
    }
  }
}

TEST(ScanPanel, PoolingAgreesWithinOneStep) {
  const auto records = small_panel();
  RdConfig pooled;
  pooled.pool_non_election_years = true;
  const std::vector<int> years{2004, 2006, 2008};
  const auto a = scan_panel(records, RdConfig{}, years);
  const auto b = scan_panel(records, pooled, years);
  ASSERT_EQ(a.thresholds.size(), b.thresholds.size());
  for (std::size_t i = 0; i < a.thresholds.size(); ++i)
    EXPECT_LE(std::abs(a.thresholds[i].cutoff - b.thresholds[i].cutoff), 5);
}

TEST(ScanPanel, ScaleEquivariance) {
  const auto base = planted(15, 2000, 620, 1.2, 560, 660, 0.3, 2008, 1000.0);
  auto scaled = base;
  for (auto& r : scaled) r.total_credit_limit *= 7.0;
  const auto a = select_threshold(scan_cutoffs(base, RdConfig{}).estimates, RdConfig{});
  const auto b = select_threshold(scan_cutoffs(scaled, RdConfig{}).estimates, RdConfig{});
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->cutoff, b->cutoff);
  EXPECT_NEAR(a->alpha, b->alpha, 1e-3);
}

TEST(RdConfig, Validation) {
  RdConfig c;
  EXPECT_NO_THROW(c.validate());
  c.polynomial_degree = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RdConfig{};
  c.cutoff_grid = {555, 600};
  EXPECT_THROW(c.validate(), ConfigError);
  c = RdConfig{};
  c.min_observations = 9;  // below 2 * degree + 2
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NEAR(RdConfig{}.critical_value(), 1.959963984540, 1e-9);
  EXPECT_EQ(RdConfig{}.window_low(), 535);
  EXPECT_EQ(RdConfig{}.window_high(), 685);
}
