#include "creditvote/pipeline/io.hpp"

#include <fmt/format.h>

#include "creditvote/errors.hpp"
#include "creditvote/pipeline/csv.hpp"

namespace creditvote::pipeline {

namespace {

int as_int(const CsvTable& t, std::size_t row, std::string_view col) {
  const long long v = t.integer(row, col);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw DataError(fmt::format("column {} value {} out of range", col, v));
  return static_cast<int>(v);
}

}  // namespace

std::vector<CreditRecord> read_credit_panel(const fs::path& path) {
  const auto t = CsvTable::read(path);
  t.require({"person_id", "year", "credit_score", "total_limit", "zcta", "county_fips", "cz"});
  std::vector<CreditRecord> out;
  out.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CreditRecord r;
    r.person_id = t.unsigned_integer(i, "person_id");
    r.year = as_int(t, i, "year");
    r.credit_score = as_int(t, i, "credit_score");
    r.total_credit_limit = t.real(i, "total_limit");
    r.zcta = t.text(i, "zcta");
    r.county_fips = t.text(i, "county_fips");
    r.commuting_zone = t.text(i, "cz");
    out.push_back(std::move(r));
  }
  return out;
}

void write_credit_panel(const fs::path& path, std::span<const CreditRecord> records) {
  CsvWriter w({"person_id", "year", "credit_score", "total_limit", "zcta", "county_fips", "cz"});
  for (const auto& r : records)
    w.field(r.person_id)
        .field(r.year)
        .field(r.credit_score)
        .field(r.total_credit_limit)
        .field(r.zcta)
        .field(r.county_fips)
        .field(r.commuting_zone)
        .end_row();
  w.write(path);
}

std::vector<rd::ThresholdEstimate> read_thresholds(const fs::path& path) {
  const auto t = CsvTable::read(path);
  t.require({"cz", "year", "cutoff", "alpha", "se", "t", "provenance"});
  std::vector<rd::ThresholdEstimate> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    rd::ThresholdEstimate e;
    e.commuting_zone = t.text(i, "cz");
    e.year = as_int(t, i, "year");
    e.cutoff = as_int(t, i, "cutoff");
    e.alpha = t.real(i, "alpha");
    e.se = t.real(i, "se");
    e.t_stat = t.real(i, "t");
    try {
      e.provenance = rd::provenance_from_string(t.text(i, "provenance"));
    } catch (const std::exception& ex) {
      throw DataError(fmt::format("{}: {}", path.string(), ex.what()));
    }
    e.source_year = t.has("source_year") ? as_int(t, i, "source_year") : e.year;
    out.push_back(std::move(e));
  }
  return out;
}

void write_thresholds(const fs::path& path, std::span<const rd::ThresholdEstimate> thresholds) {
  CsvWriter w({"cz", "year", "cutoff", "alpha", "se", "t", "provenance", "source_year"});
  for (const auto& e : thresholds)
    w.field(e.commuting_zone)
        .field(e.year)
        .field(e.cutoff)
        .field(e.alpha)
        .field(e.se)
        .field(e.t_stat)
        .field(rd::to_string(e.provenance))
        .field(e.source_year)
        .end_row();
  w.write(path);
}

void write_scan_skips(const fs::path& path, std::span<const rd::ScanSkip> skips) {
  CsvWriter w({"cz", "year", "cutoff", "reason", "observations", "detail"});
  for (const auto& s : skips) {
    w.field(s.commuting_zone).field(s.year);
    if (s.cutoff) w.field(*s.cutoff);
    else w.field(std::string_view{});
    w.field(rd::to_string(s.reason)).field(static_cast<std::uint64_t>(s.observations)).field(s.detail).end_row();
  }
  w.write(path);
}

void write_cutoff_estimates(const fs::path& path, std::span<const rd::ZoneYearScan> scans) {
  CsvWriter w({"cz", "year", "cutoff", "alpha", "se", "t", "n_left", "n_right"});
  for (const auto& s : scans)
    for (const auto& e : s.estimates)
      w.field(e.commuting_zone)
          .field(e.year)
          .field(e.cutoff)
          .field(e.alpha)
          .field(e.se)
          .field(e.t_stat)
          .field(static_cast<std::uint64_t>(e.n_left))
          .field(static_cast<std::uint64_t>(e.n_right))
          .end_row();
  w.write(path);
}

std::vector<geo::CountyOverlap> read_zcta_county(const fs::path& path) {
  const auto t = CsvTable::read(path);
  t.require({"zcta", "county_fips", "pop"});
  std::vector<geo::CountyOverlap> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double pop = t.real(i, "pop");
    if (pop < 0) throw DataError(fmt::format("{}: negative population for zcta {}", path.string(), t.text(i, "zcta")));
    out.push_back({t.text(i, "zcta"), t.text(i, "county_fips"), pop});
  }
  return out;
}

void write_zcta_county(const fs::path& path, std::span<const geo::CountyOverlap> rows) {
  CsvWriter w({"zcta", "county_fips", "pop"});
  for (const auto& r : rows) w.field(r.zcta).field(r.county_fips).field(r.population).end_row();
  w.write(path);
}

std::vector<geo::DistrictOverlap> read_zcta_cd(const fs::path& path) {
  const auto t = CsvTable::read(path);
  t.require({"zcta", "cd", "congress"});
  std::vector<geo::DistrictOverlap> out;
  for (std::size_t i = 0; i < t.size(); ++i)
    out.push_back({t.text(i, "zcta"), t.text(i, "cd"), as_int(t, i, "congress"),
                   t.has("pop") ? t.real(i, "pop") : 0.0});
  return out;
}

void write_zcta_cd(const fs::path& path, std::span<const geo::DistrictOverlap> rows) {
  CsvWriter w({"zcta", "cd", "congress", "pop"});
  for (const auto& r : rows) w.field(r.zcta).field(r.district).field(r.congress).field(r.population).end_row();
  w.write(path);
}

std::map<std::string, std::string> read_county_cz(const fs::path& path) {
  const auto t = CsvTable::read(path);
  t.require({"county_fips", "cz"});
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto [it, inserted] = out.emplace(t.text(i, "county_fips"), t.text(i, "cz"));
    if (!inserted && it->second != t.text(i, "cz"))
      throw DataError(fmt::format("{}: county {} assigned to two commuting zones", path.string(), it->first));
  }
  return out;
}

void write_county_cz(const fs::path& path, const std::map<std::string, std::string>& county_zone) {
  CsvWriter w({"county_fips", "cz"});
  for (const auto& [county, zone] : county_zone) w.field(county).field(zone).end_row();
  w.write(path);
}

std::vector<geo::CcdCell> read_cells(const fs::path& path) {
  const auto t = CsvTable::read(path);
  t.require({"cell_id", "county_fips", "cd", "cz", "state"});
  std::vector<geo::CcdCell> out;
  for (std::size_t i = 0; i < t.size(); ++i)
    out.push_back({t.text(i, "cell_id"), t.text(i, "county_fips"), t.text(i, "cd"), t.text(i, "cz"),
                   t.text(i, "state")});
  return out;
}

void write_cells(const fs::path& path, std::span<const geo::CcdCell> cells) {
  CsvWriter w({"cell_id", "county_fips", "cd", "cz", "state"});
  for (const auto& c : cells)
    w.field(c.cell_id).field(c.county_fips).field(c.district).field(c.commuting_zone).field(c.state).end_row();
  w.write(path);
}

geo::VintageCrosswalk read_vintage(const fs::path& path) {
  const auto t = CsvTable::read(path);
  t.require({"kind", "code", "code_2010"});
  geo::VintageCrosswalk v;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& kind = t.text(i, "kind");
    const auto& code = t.text(i, "code");
    const auto& now = t.text(i, "code_2010");
    if (kind == "county") {
      if (code != now) v.county_to_2010[code] = now;
      v.valid_counties.push_back(now);
    } else if (kind == "zcta") {
      if (code != now) v.zcta_to_2010[code] = now;
      v.valid_zctas.push_back(now);
    } else {
      throw DataError(fmt::format("{}: kind must be county or zcta, got '{}'", path.string(), kind));
    }
  }
  return v;
}

void write_exclusions(const fs::path& path, std::span<const geo::Exclusion> rows) {
  CsvWriter w({"code", "reason"});
  for (const auto& r : rows) w.field(r.code).field(r.reason).end_row();
  w.write(path);
}

std::vector<shares::ShareRecord> read_shares(const fs::path& path) {
  const auto t = CsvTable::read(path);
  t.require({"cell_id", "year", "bw", "share_tot", "share_above", "share_below", "pop"});
  std::vector<shares::ShareRecord> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    shares::ShareRecord r;
    r.cell_id = t.text(i, "cell_id");
    r.year = as_int(t, i, "year");
    r.bandwidth = as_int(t, i, "bw");
    r.share_total = t.optional_real(i, "share_tot");
    r.share_above = t.optional_real(i, "share_above");
    r.share_below = t.optional_real(i, "share_below");
    r.cell_population = static_cast<std::size_t>(t.unsigned_integer(i, "pop"));
    out.push_back(std::move(r));
  }
  return out;
}

void write_shares(const fs::path& path, std::span<const shares::ShareRecord> rows) {
  CsvWriter w({"cell_id", "year", "bw", "share_tot", "share_above", "share_below", "pop"});
  for (const auto& r : rows)
    w.field(r.cell_id)
        .field(r.year)
        .field(r.bandwidth)
        .field(r.share_total)
        .field(r.share_above)
        .field(r.share_below)
        .field(static_cast<std::uint64_t>(r.cell_population))
        .end_row();
  w.write(path);
}

std::vector<panel::ElectionRecord> read_elections(const fs::path& path) {
  const auto t = CsvTable::read(path);
  t.require({"cell_id", "year", "votes_rep", "votes_dem", "votes_other", "winner_party", "nominate1"});
  std::vector<panel::ElectionRecord> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    panel::ElectionRecord e;
    e.cell_id = t.text(i, "cell_id");
    e.year = as_int(t, i, "year");
    e.votes_rep = t.real(i, "votes_rep");
    e.votes_dem = t.real(i, "votes_dem");
    e.votes_other = t.real(i, "votes_other");
    if (e.votes_rep < 0 || e.votes_dem < 0 || e.votes_other < 0)
      throw DataError(fmt::format("{}: negative vote count for {} {}", path.string(), e.cell_id, e.year));
    e.winner = panel::party_from_string(t.text(i, "winner_party"));
    e.nominate = t.optional_real(i, "nominate1");
    if (e.nominate && (*e.nominate < -1.0 || *e.nominate > 1.0))
      throw DataError(fmt::format("{}: nominate {} outside [-1, 1] for {} {}", path.string(), *e.nominate,
                                  e.cell_id, e.year));
    out.push_back(std::move(e));
  }
  return out;
}

void write_elections(const fs::path& path, std::span<const panel::ElectionRecord> rows) {
  CsvWriter w({"cell_id", "year", "votes_rep", "votes_dem", "votes_other", "winner_party", "nominate1"});
  for (const auto& e : rows)
    w.field(e.cell_id)
        .field(e.year)
        .field(e.votes_rep)
        .field(e.votes_dem)
        .field(e.votes_other)
        .field(panel::to_string(e.winner))
        .field(e.nominate)
        .end_row();
  w.write(path);
}

std::vector<panel::ControlRecord> read_controls(const fs::path& path) {
  const auto t = CsvTable::read(path);
  t.require({"cell_id", "year", "share_white", "share_female", "exposure", "instrument", "pop"});
  std::vector<panel::ControlRecord> out;
  for (std::size_t i = 0; i < t.size(); ++i)
    out.push_back({t.text(i, "cell_id"), as_int(t, i, "year"), t.real(i, "share_white"),
                   t.real(i, "share_female"), t.real(i, "exposure"), t.real(i, "instrument"),
                   t.real(i, "pop")});
  return out;
}

void write_controls(const fs::path& path, std::span<const panel::ControlRecord> rows) {
  CsvWriter w({"cell_id", "year", "share_white", "share_female", "exposure", "instrument", "pop"});
  for (const auto& c : rows)
    w.field(c.cell_id)
        .field(c.year)
        .field(c.share_white)
        .field(c.share_female)
        .field(c.exposure)
        .field(c.instrument)
        .field(c.population)
        .end_row();
  w.write(path);
}

void write_log(const fs::path& path, std::span<const std::string> lines) {
  CsvWriter w({"message"});
  for (const auto& l : lines) w.field(l).end_row();
  w.write(path);
}

}  // namespace creditvote::pipeline
