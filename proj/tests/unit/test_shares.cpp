#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "creditvote/geo/crosswalk.hpp"
#include "creditvote/pipeline/io.hpp"
#include "creditvote/shares/shares.hpp"

using namespace creditvote;
using namespace creditvote::shares;

namespace {

// Two zones; zone A has cells A1 (zcta 10001) and A2 (10002), zone B has B1 (20001).
geo::CellAssigner assigner() {
  static const std::vector<geo::CountyOverlap> zc{
      {"10001", "01001", 1}, {"10002", "01003", 1}, {"20001", "02001", 1}};
  static const std::vector<geo::DistrictOverlap> zd{
      {"10001", "0101", 111, 0}, {"10002", "0102", 111, 0}, {"20001", "0201", 111, 0}};
  const std::vector<geo::CcdCell> cells{{"01001-0101", "01001", "0101", "A", "01"},
                                        {"01003-0102", "01003", "0102", "A", "01"},
                                        {"02001-0201", "02001", "0201", "B", "02"}};
  return geo::CellAssigner(geo::zcta_to_county_majority(zc), geo::DistrictMap(zd), cells);
}

std::vector<CreditRecord> people(const std::string& zcta, const std::string& zone, std::vector<int> scores) {
  std::vector<CreditRecord> out;
  for (int s : scores) {
    CreditRecord r;
    r.person_id = out.size();
    r.year = 2008;
    r.credit_score = s;
    r.total_credit_limit = 1000;
    r.zcta = zcta;
    r.county_fips = "x";
    r.commuting_zone = zone;
    out.push_back(r);
  }
  return out;
}

rd::ThresholdEstimate threshold(std::string zone, int cutoff) {
  return {std::move(zone), 2008, cutoff, 1.0, 0.1, 10.0, rd::Provenance::Detected, 2008};
}

}  // namespace

TEST(Shares, HandCount) {
  const auto records = people("10001", "A", {590, 600, 610, 700, 710, 720, 730, 740, 750, 760});
  const std::vector<rd::ThresholdEstimate> t{threshold("A", 600)};
  const std::vector<int> years{2008}, bw{15};
  const auto out = compute_shares(records, t, assigner(), years, bw);
  const auto& r = out.records[0];
  ASSERT_EQ(r.cell_id, "01001-0101");
  EXPECT_EQ(r.cell_population, 10u);
  EXPECT_DOUBLE_EQ(*r.share_total, 0.3);
  EXPECT_DOUBLE_EQ(*r.share_above, 0.2);
  EXPECT_DOUBLE_EQ(*r.share_below, 0.1);
}

TEST(Shares, CountConvention) {
  const std::vector<int> s{584, 585, 599, 600, 614, 615};
  EXPECT_EQ(count_near_threshold(s, 600, 15), (std::pair<std::size_t, std::size_t>{2, 2}));
}

TEST(Shares, EmptyCellAndMissingThreshold) {
  const auto records = people("10001", "A", {600, 610});
  const std::vector<rd::ThresholdEstimate> t{threshold("A", 600)};
  const std::vector<int> years{2008}, bw{5, 15};
  const auto out = compute_shares(records, t, assigner(), years, bw);
  ASSERT_EQ(out.records.size(), 6u);
  for (const auto& r : out.records) {
    if (r.cell_id == "01003-0102") {  // zone A, nobody there
      EXPECT_EQ(r.cell_population, 0u);
      EXPECT_EQ(*r.share_total, 0.0);
    }
    if (r.cell_id == "02001-0201") EXPECT_FALSE(r.share_total.has_value());  // zone B has no threshold
  }
  ASSERT_FALSE(out.log.empty());
  EXPECT_NE(out.log[0].find("no threshold"), std::string::npos);
}

TEST(Shares, AdditivityAndMonotonicity) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> score(300, 850);
  std::vector<int> a(3000), b(2000);
  for (auto& v : a) v = score(rng);
  for (auto& v : b) v = score(rng);
  auto records = people("10001", "A", a);
  auto more = people("10002", "A", b);
  records.insert(records.end(), more.begin(), more.end());
  const std::vector<rd::ThresholdEstimate> t{threshold("A", 617)};
  const std::vector<int> years{2008};
  const auto out = compute_shares(records, t, assigner(), years, kStandardBandwidths);
  std::map<std::string, double> last_total;
  for (const auto& r : out.records) {
    if (!r.share_total) continue;
    EXPECT_EQ(*r.share_total, *r.share_above + *r.share_below);
    EXPECT_LE(last_total[r.cell_id], *r.share_total);
    last_total[r.cell_id] = *r.share_total;
  }
}

TEST(Shares, CellAggregateMatchesZoneLevel) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> score(450, 800);
  std::vector<int> a(1700), b(900);
  for (auto& v : a) v = score(rng);
  for (auto& v : b) v = score(rng);
  auto records = people("10001", "A", a);
  auto more = people("10002", "A", b);
  records.insert(records.end(), more.begin(), more.end());
  const std::vector<rd::ThresholdEstimate> t{threshold("A", 605)};
  const std::vector<int> years{2008}, bw{20};
  const auto out = compute_shares(records, t, assigner(), years, bw);
  double weighted = 0.0, pop = 0.0;
  for (const auto& r : out.records)
    if (r.share_total && r.cell_id.starts_with("01")) {
      weighted += *r.share_total * static_cast<double>(r.cell_population);
      pop += static_cast<double>(r.cell_population);
    }
  std::vector<int> all = a;
  all.insert(all.end(), b.begin(), b.end());
  const auto [below, above] = count_near_threshold(all, 605, 20);
  EXPECT_NEAR(weighted / pop, static_cast<double>(below + above) / static_cast<double>(all.size()), 1e-12);
}

TEST(Shares, UniformScoresMatchAnalyticShare) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> score(300, 850);
  std::vector<int> s(200000);
  for (auto& v : s) v = score(rng);
  const auto records = people("10001", "A", s);
  const std::vector<rd::ThresholdEstimate> t{threshold("A", 600)};
  const std::vector<int> years{2008}, bw{15};
  const auto out = compute_shares(records, t, assigner(), years, bw);
  const double p = 30.0 / 551.0;
  EXPECT_NEAR(*out.records[0].share_total, p, 4.0 * std::sqrt(p * (1 - p) / 200000.0));
}

TEST(Summary, SingleCellAndTwoCells) {
  ShareRecord one{"c1", 2008, 15, 0.2, 0.1, 0.1, 100};
  auto rows = summarize_shares(std::vector{one});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_DOUBLE_EQ(rows[0].mean, 0.2);
  EXPECT_EQ(rows[0].sd, 0.0);

  ShareRecord a{"c1", 2008, 15, 0.0, 0.0, 0.0, 50}, b{"c2", 2008, 15, 0.2, 0.1, 0.1, 50};
  rows = summarize_shares(std::vector{a, b});
  EXPECT_DOUBLE_EQ(rows[0].mean, 0.1);
  EXPECT_DOUBLE_EQ(rows[0].min, 0.0);
  EXPECT_DOUBLE_EQ(rows[0].max, 0.2);
  // analytic weights: sqrt(sum w (x - m)^2 / sum w * n / (n - 1))
  EXPECT_NEAR(rows[0].sd, std::sqrt(0.01 * 2.0), 1e-15);
}

TEST(Summary, NullAndEmptyCellsSkipped) {
  ShareRecord a{"c1", 2008, 5, 0.1, 0.05, 0.05, 10}, b{"c2", 2008, 5, std::nullopt, std::nullopt, std::nullopt, 40},
      c{"c3", 2008, 5, 0.0, 0.0, 0.0, 0};
  const auto rows = summarize_shares(std::vector{a, b, c});
  EXPECT_EQ(rows[0].cells, 1u);
  EXPECT_DOUBLE_EQ(rows[0].total_weight, 10.0);
}

TEST(Summary, FixtureLayoutBitExact) {
  const std::string dir = CREDITVOTE_FIXTURES;
  const auto records = pipeline::read_shares(dir + "/share_summary_input.csv");
  std::set<std::pair<std::string, int>> seen;
  std::size_t observations = 0;
  for (const auto& r : records)
    if (r.share_total && seen.insert({r.cell_id, r.year}).second) observations += r.cell_population;
  std::ifstream in(dir + "/share_summary_expected.txt", std::ios::binary);
  std::stringstream expected;
  expected << in.rdbuf();
  EXPECT_EQ(format_share_summary(summarize_shares(records), observations), expected.str());
}
