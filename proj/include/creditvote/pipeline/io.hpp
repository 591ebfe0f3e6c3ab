#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "creditvote/geo/crosswalk.hpp"
#include "creditvote/panel/panel.hpp"
#include "creditvote/rd/scanner.hpp"
#include "creditvote/records.hpp"
#include "creditvote/shares/shares.hpp"

// Readers and writers for every interchange file. Readers check the header
// and raise DataError naming missing columns or bad values; extra columns
// are ignored.
namespace creditvote::pipeline {

namespace fs = std::filesystem;

// person_id,year,credit_score,total_limit,zcta,county_fips,cz
std::vector<CreditRecord> read_credit_panel(const fs::path& path);
void write_credit_panel(const fs::path& path, std::span<const CreditRecord> records);

// cz,year,cutoff,alpha,se,t,provenance[,source_year]
std::vector<rd::ThresholdEstimate> read_thresholds(const fs::path& path);
void write_thresholds(const fs::path& path, std::span<const rd::ThresholdEstimate> thresholds);

// cz,year,cutoff,reason,observations,detail
void write_scan_skips(const fs::path& path, std::span<const rd::ScanSkip> skips);
// cz,year,cutoff,alpha,se,t,n_left,n_right
void write_cutoff_estimates(const fs::path& path, std::span<const rd::ZoneYearScan> scans);

// zcta,county_fips,pop
std::vector<geo::CountyOverlap> read_zcta_county(const fs::path& path);
void write_zcta_county(const fs::path& path, std::span<const geo::CountyOverlap> rows);
// zcta,cd,congress[,pop]
std::vector<geo::DistrictOverlap> read_zcta_cd(const fs::path& path);
void write_zcta_cd(const fs::path& path, std::span<const geo::DistrictOverlap> rows);
// county_fips,cz
std::map<std::string, std::string> read_county_cz(const fs::path& path);
void write_county_cz(const fs::path& path, const std::map<std::string, std::string>& county_zone);
// cell_id,county_fips,cd,cz,state
std::vector<geo::CcdCell> read_cells(const fs::path& path);
void write_cells(const fs::path& path, std::span<const geo::CcdCell> cells);
// kind,code,code_2010 with kind county or zcta. Every code_2010 is a valid
// 2010 code; rows whose code differs are renames.
geo::VintageCrosswalk read_vintage(const fs::path& path);

// code,reason
void write_exclusions(const fs::path& path, std::span<const geo::Exclusion> rows);

// cell_id,year,bw,share_tot,share_above,share_below,pop (null shares empty)
std::vector<shares::ShareRecord> read_shares(const fs::path& path);
void write_shares(const fs::path& path, std::span<const shares::ShareRecord> rows);

// cell_id,year,votes_rep,votes_dem,votes_other,winner_party,nominate1
std::vector<panel::ElectionRecord> read_elections(const fs::path& path);
void write_elections(const fs::path& path, std::span<const panel::ElectionRecord> rows);

// cell_id,year,share_white,share_female,exposure,instrument,pop
std::vector<panel::ControlRecord> read_controls(const fs::path& path);
void write_controls(const fs::path& path, std::span<const panel::ControlRecord> rows);

// One message per line under a "message" header.
void write_log(const fs::path& path, std::span<const std::string> lines);

}  // namespace creditvote::pipeline
