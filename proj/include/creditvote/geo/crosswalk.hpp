#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "creditvote/records.hpp"

namespace creditvote::geo {

// Population overlap between a ZCTA and a county (2010 relationship file).
struct CountyOverlap {
  std::string zcta;
  std::string county_fips;
  double population = 0.0;
};

// ZCTA to congressional district for one Congress. Population is optional in
// the input; rows without it carry 0 and ties fall to the lowest district.
struct DistrictOverlap {
  std::string zcta;
  std::string district;
  int congress = 0;
  double population = 0.0;
};

struct Exclusion {
  std::string code;
  std::string reason;
  friend bool operator==(const Exclusion&, const Exclusion&) = default;
};

struct ZctaCountyMap {
  std::map<std::string, std::string> county_of;
  std::vector<Exclusion> unmapped;
  std::vector<std::string> ties;  // ZCTAs resolved by the lowest-FIPS rule
};

// Each ZCTA goes to the county holding most of its population; exact ties
// go to the lowest FIPS code. Zero-population ZCTAs are left unmapped.
ZctaCountyMap zcta_to_county_majority(std::span<const CountyOverlap> rows);

// Congress elected in a given November election year.
int congress_for_election_year(int year);

class DistrictMap {
 public:
  DistrictMap() = default;
  explicit DistrictMap(std::span<const DistrictOverlap> rows);

  std::optional<std::string> district(const std::string& zcta, int congress) const;
  std::vector<int> congresses() const;
  // (zcta, district) pairs for one Congress.
  const std::map<std::string, std::string>& assignments(int congress) const;

 private:
  std::map<int, std::map<std::string, std::string>> by_congress_;
};

struct CcdCell {
  std::string cell_id;  // "<county_fips>-<district>"
  std::string county_fips;
  std::string district;
  std::string commuting_zone;
  std::string state;  // first two digits of the county FIPS

  friend bool operator==(const CcdCell&, const CcdCell&) = default;
};

std::string make_cell_id(const std::string& county_fips, const std::string& district);

struct CountyDistrict {
  std::string county_fips;
  std::string district;
};

struct CellBuild {
  std::vector<CcdCell> cells;  // sorted by cell_id
  std::vector<Exclusion> excluded;
};

// One cell per distinct (county, district) pair; the commuting zone comes
// from the county. Counties without a zone are excluded and logged once.
CellBuild build_ccd_cells(std::span<const CountyDistrict> assignments,
                          const std::map<std::string, std::string>& county_zone);

// County-district pairs implied by ZCTA majority counties and every
// Congress in the district map.
std::vector<CountyDistrict> county_district_pairs(const ZctaCountyMap& counties,
                                                  const DistrictMap& districts);

// Maps superseded geography codes onto their 2010 definitions.
struct VintageCrosswalk {
  std::map<std::string, std::string> county_to_2010;
  std::map<std::string, std::string> zcta_to_2010;
  // Codes valid in 2010; empty means "accept anything not renamed".
  std::vector<std::string> valid_counties;
  std::vector<std::string> valid_zctas;
};

struct FreezeResult {
  std::vector<CreditRecord> records;
  std::vector<Exclusion> excluded;
};

FreezeResult freeze_vintage(std::vector<CreditRecord> records, const VintageCrosswalk& crosswalk,
                            int vintage = 2010);

// Resolves a credit record to its cell in a given election year.
class CellAssigner {
 public:
  CellAssigner(ZctaCountyMap counties, DistrictMap districts, std::span<const CcdCell> cells);

  std::optional<std::string> cell_for(const std::string& zcta, int election_year) const;
  const CcdCell* cell(const std::string& cell_id) const;
  const std::vector<CcdCell>& cells() const { return cells_; }

 private:
  ZctaCountyMap counties_;
  DistrictMap districts_;
  std::vector<CcdCell> cells_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace creditvote::geo
