#include <gtest/gtest.h>

#include <fmt/format.h>

#include <algorithm>
#include <random>
#include <set>

#include "creditvote/errors.hpp"
#include "creditvote/geo/crosswalk.hpp"

using namespace creditvote;
using namespace creditvote::geo;

TEST(ZctaCounty, MajorityWins) {
  const std::vector<CountyOverlap> rows{{"10001", "36061", 700}, {"10001", "36005", 300}};
  const auto m = zcta_to_county_majority(rows);
  EXPECT_EQ(m.county_of.at("10001"), "36061");
  EXPECT_TRUE(m.ties.empty());
}

TEST(ZctaCounty, SingleCounty) {
  const std::vector<CountyOverlap> rows{{"20001", "11001", 5}};
  EXPECT_EQ(zcta_to_county_majority(rows).county_of.at("20001"), "11001");
}

TEST(ZctaCounty, ExactTieGoesToLowestFips) {
  const std::vector<CountyOverlap> rows{{"30001", "13121", 50}, {"30001", "13089", 50}};
  const auto m = zcta_to_county_majority(rows);
  EXPECT_EQ(m.county_of.at("30001"), "13089");
  EXPECT_EQ(m.ties, (std::vector<std::string>{"30001"}));
  // same answer whatever the row order
  const std::vector<CountyOverlap> flipped{rows[1], rows[0]};
  EXPECT_EQ(zcta_to_county_majority(flipped).county_of.at("30001"), "13089");
}

TEST(ZctaCounty, ZeroPopulationUnmappedAndLogged) {
  const std::vector<CountyOverlap> rows{{"40001", "21001", 0}, {"40002", "21003", 10}};
  const auto m = zcta_to_county_majority(rows);
  EXPECT_FALSE(m.county_of.contains("40001"));
  ASSERT_EQ(m.unmapped.size(), 1u);
  EXPECT_EQ(m.unmapped[0].code, "40001");
}

TEST(ZctaCounty, NegativePopulationIsDataError) {
  const std::vector<CountyOverlap> rows{{"40001", "21001", -1}};
  EXPECT_THROW(zcta_to_county_majority(rows), DataError);
}

TEST(ZctaCounty, TotalityAndOrderIndependence) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> county(0, 4), pop(0, 3);
  std::vector<CountyOverlap> rows;
  for (int z = 0; z < 200; ++z)
    for (int k = 0; k < 3; ++k)
      rows.push_back({fmt::format("{:05d}", 10000 + z), fmt::format("01{:03d}", county(rng)), double(pop(rng))});
  const auto a = zcta_to_county_majority(rows);
  std::shuffle(rows.begin(), rows.end(), rng);
  const auto b = zcta_to_county_majority(rows);
  EXPECT_EQ(a.county_of, b.county_of);
  EXPECT_EQ(a.unmapped, b.unmapped);
  std::set<std::string> seen;
  for (const auto& [z, c] : a.county_of) EXPECT_TRUE(seen.insert(z).second);
  for (const auto& e : a.unmapped) EXPECT_TRUE(seen.insert(e.code).second);
  EXPECT_EQ(seen.size(), 200u);
}

TEST(Cells, CountyInTwoDistricts) {
  const std::vector<CountyDistrict> pairs{{"36061", "3610"}, {"36061", "3612"}, {"36005", "3615"}};
  const std::map<std::string, std::string> cz{{"36061", "CZ19400"}, {"36005", "CZ19400"}};
  const auto built = build_ccd_cells(pairs, cz);
  ASSERT_EQ(built.cells.size(), 3u);
  EXPECT_EQ(std::count_if(built.cells.begin(), built.cells.end(), [](const auto& c) { return c.county_fips == "36061"; }),
            2);
  EXPECT_EQ(built.cells[0].cell_id, make_cell_id("36005", "3615"));
  EXPECT_EQ(built.cells[0].state, "36");
  EXPECT_TRUE(built.excluded.empty());
}

TEST(Cells, CountyWithoutZoneExcludedOnce) {
  const std::vector<CountyDistrict> pairs{{"01001", "0102"}, {"99999", "0101"}, {"99999", "0102"}};
  const std::map<std::string, std::string> cz{{"01001", "CZ1"}};
  const auto built = build_ccd_cells(pairs, cz);
  ASSERT_EQ(built.cells.size(), 1u);
  ASSERT_EQ(built.excluded.size(), 1u);
  EXPECT_EQ(built.excluded[0].code, "99999");
}

TEST(Cells, NestedInZones) {
  const std::vector<CountyOverlap> zc{{"10001", "01001", 10}, {"10002", "01001", 10}, {"10003", "01003", 10}};
  const std::vector<DistrictOverlap> zd{{"10001", "0101", 113, 0}, {"10002", "0102", 113, 0}, {"10003", "0102", 113, 0},
                                        {"10001", "0101", 114, 0}, {"10002", "0101", 114, 0}, {"10003", "0102", 114, 0}};
  const std::map<std::string, std::string> cz{{"01001", "CZA"}, {"01003", "CZB"}};
  const auto counties = zcta_to_county_majority(zc);
  const DistrictMap districts(zd);
  const auto built = build_ccd_cells(county_district_pairs(counties, districts), cz);
  EXPECT_EQ(built.cells.size(), 3u);  // 01001 x {0101, 0102}, 01003 x 0102
  for (const auto& c : built.cells) EXPECT_EQ(c.commuting_zone, cz.at(c.county_fips));

  const CellAssigner assigner(counties, districts, built.cells);
  EXPECT_EQ(congress_for_election_year(2012), 113);
  EXPECT_EQ(assigner.cell_for("10002", 2012), make_cell_id("01001", "0102"));
  EXPECT_EQ(assigner.cell_for("10002", 2014), make_cell_id("01001", "0101"));
  EXPECT_FALSE(assigner.cell_for("10002", 2016));  // no map for that Congress
  EXPECT_FALSE(assigner.cell_for("77777", 2012));
}

TEST(DistrictMap, LowestDistrictWithoutPopulation) {
  const std::vector<DistrictOverlap> zd{{"10001", "0105", 113, 0}, {"10001", "0103", 113, 0}};
  EXPECT_EQ(DistrictMap(zd).district("10001", 113), "0103");
  const std::vector<DistrictOverlap> weighted{{"10001", "0105", 113, 80}, {"10001", "0103", 113, 20}};
  EXPECT_EQ(DistrictMap(weighted).district("10001", 113), "0105");
}

namespace {

CreditRecord rec(std::string zcta, std::string county) {
  CreditRecord r;
  r.person_id = 1;
  r.year = 2008;
  r.credit_score = 650;
  r.zcta = std::move(zcta);
  r.county_fips = std::move(county);
  r.commuting_zone = "CZ1";
  return r;
}

}  // namespace

TEST(Vintage, IdentityRenameUnknown) {
  VintageCrosswalk vc;
  vc.county_to_2010 = {{"51560", "51005"}};  // Clifton Forge folded into Alleghany
  vc.valid_counties = {"51005", "01001"};
  vc.valid_zctas = {"24426", "10001"};
  std::vector<CreditRecord> records{rec("10001", "01001"), rec("24426", "51560"), rec("10001", "99001")};
  const auto out = freeze_vintage(records, vc);
  ASSERT_EQ(out.records.size(), 2u);
  EXPECT_EQ(out.records[0], records[0]);
  EXPECT_EQ(out.records[1].county_fips, "51005");
  ASSERT_EQ(out.excluded.size(), 1u);
  EXPECT_EQ(out.excluded[0].code, "county:99001");
  EXPECT_THROW(freeze_vintage(records, vc, 2000), ConfigError);
}
