#include "creditvote/geo/crosswalk.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "creditvote/errors.hpp"

namespace creditvote::geo {

namespace {

// Largest value wins; equal values go to the smallest key. Returns nullopt
// when the best value is not positive.
std::optional<std::string> majority(const std::map<std::string, double>& by_key, bool& tied) {
  tied = false;
  const std::string* best = nullptr;
  double best_value = 0.0;
  for (const auto& [key, value] : by_key) {  // ascending key order
    if (!best || value > best_value) {
      best = &key;
      best_value = value;
      tied = false;
    } else if (value == best_value) {
      tied = true;
    }
  }
  if (!best || best_value <= 0.0) return std::nullopt;
  return *best;
}

}  // namespace

ZctaCountyMap zcta_to_county_majority(std::span<const CountyOverlap> rows) {
  std::map<std::string, std::map<std::string, double>> overlap;
  for (const auto& r : rows) {
    if (r.population < 0.0)
      throw DataError(fmt::format("negative population overlap for zcta {}", r.zcta));
    overlap[r.zcta][r.county_fips] += r.population;
  }
  ZctaCountyMap out;
  for (const auto& [zcta, counties] : overlap) {
    bool tied = false;
    if (auto county = majority(counties, tied)) {
      out.county_of.emplace(zcta, *county);
      if (tied) out.ties.push_back(zcta);
    } else {
      out.unmapped.push_back({zcta, "zero total population"});
    }
  }
  return out;
}

int congress_for_election_year(int year) { return (year - 1786) / 2; }

DistrictMap::DistrictMap(std::span<const DistrictOverlap> rows) {
  std::map<int, std::map<std::string, std::map<std::string, double>>> weight;
  for (const auto& r : rows) weight[r.congress][r.zcta][r.district] += std::max(r.population, 0.0);
  for (const auto& [congress, zctas] : weight) {
    auto& target = by_congress_[congress];
    for (const auto& [zcta, districts] : zctas) {
      bool tied = false;
      auto pick = majority(districts, tied);
      // Without population information the lowest district code is used.
      target.emplace(zcta, pick ? *pick : districts.begin()->first);
    }
  }
}

std::optional<std::string> DistrictMap::district(const std::string& zcta, int congress) const {
  auto c = by_congress_.find(congress);
  if (c == by_congress_.end()) return std::nullopt;
  auto z = c->second.find(zcta);
  if (z == c->second.end()) return std::nullopt;
  return z->second;
}

std::vector<int> DistrictMap::congresses() const {
  std::vector<int> out;
  for (const auto& kv : by_congress_) out.push_back(kv.first);
  return out;
}

const std::map<std::string, std::string>& DistrictMap::assignments(int congress) const {
  static const std::map<std::string, std::string> empty;
  auto c = by_congress_.find(congress);
  return c == by_congress_.end() ? empty : c->second;
}

std::string make_cell_id(const std::string& county_fips, const std::string& district) {
  return county_fips + "-" + district;
}

CellBuild build_ccd_cells(std::span<const CountyDistrict> assignments,
                          const std::map<std::string, std::string>& county_zone) {
  std::map<std::string, CcdCell> cells;
  std::set<std::string> missing;
  for (const auto& a : assignments) {
    auto zone = county_zone.find(a.county_fips);
    if (zone == county_zone.end()) {
      missing.insert(a.county_fips);
      continue;
    }
    auto id = make_cell_id(a.county_fips, a.district);
    cells.try_emplace(id, CcdCell{id, a.county_fips, a.district, zone->second,
                                  a.county_fips.substr(0, 2)});
  }
  CellBuild out;
  for (auto& [id, cell] : cells) out.cells.push_back(std::move(cell));
  for (const auto& county : missing) out.excluded.push_back({county, "county has no commuting zone"});
  return out;
}

std::vector<CountyDistrict> county_district_pairs(const ZctaCountyMap& counties,
                                                  const DistrictMap& districts) {
  std::set<std::pair<std::string, std::string>> pairs;
  for (int congress : districts.congresses())
    for (const auto& [zcta, district] : districts.assignments(congress)) {
      auto county = counties.county_of.find(zcta);
      if (county != counties.county_of.end()) pairs.emplace(county->second, district);
    }
  std::vector<CountyDistrict> out;
  for (const auto& [county, district] : pairs) out.push_back({county, district});
  return out;
}

FreezeResult freeze_vintage(std::vector<CreditRecord> records, const VintageCrosswalk& crosswalk,
                            int vintage) {
  if (vintage != 2010) throw ConfigError(fmt::format("only the 2010 vintage is supported, got {}", vintage));
  const std::set<std::string> valid_counties(crosswalk.valid_counties.begin(),
                                             crosswalk.valid_counties.end());
  const std::set<std::string> valid_zctas(crosswalk.valid_zctas.begin(), crosswalk.valid_zctas.end());

  auto remap = [](std::string& code, const std::map<std::string, std::string>& renames,
                  const std::set<std::string>& valid) {
    if (auto it = renames.find(code); it != renames.end()) {
      code = it->second;
      return true;
    }
    return valid.empty() || valid.contains(code);
  };

  FreezeResult out;
  std::map<std::string, std::size_t> unknown;
  out.records.reserve(records.size());
  for (auto& r : records) {
    const bool county_ok = remap(r.county_fips, crosswalk.county_to_2010, valid_counties);
    const bool zcta_ok = remap(r.zcta, crosswalk.zcta_to_2010, valid_zctas);
    if (!county_ok) ++unknown["county:" + r.county_fips];
    if (!zcta_ok) ++unknown["zcta:" + r.zcta];
    if (county_ok && zcta_ok) out.records.push_back(std::move(r));
  }
  for (const auto& [code, count] : unknown)
    out.excluded.push_back({code, fmt::format("no 2010 equivalent ({} records)", count)});
  return out;
}

CellAssigner::CellAssigner(ZctaCountyMap counties, DistrictMap districts,
                           std::span<const CcdCell> cells)
    : counties_(std::move(counties)), districts_(std::move(districts)),
      cells_(cells.begin(), cells.end()) {
  for (std::size_t i = 0; i < cells_.size(); ++i) index_.emplace(cells_[i].cell_id, i);
}

std::optional<std::string> CellAssigner::cell_for(const std::string& zcta, int election_year) const {
  auto county = counties_.county_of.find(zcta);
  if (county == counties_.county_of.end()) return std::nullopt;
  auto district = districts_.district(zcta, congress_for_election_year(election_year));
  if (!district) return std::nullopt;
  auto id = make_cell_id(county->second, *district);
  if (!index_.contains(id)) return std::nullopt;
  return id;
}

const CcdCell* CellAssigner::cell(const std::string& cell_id) const {
  auto it = index_.find(cell_id);
  return it == index_.end() ? nullptr : &cells_[it->second];
}

}  // namespace creditvote::geo
