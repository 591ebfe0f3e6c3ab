#include "creditvote/pipeline/stages.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "creditvote/errors.hpp"
#include "creditvote/geo/crosswalk.hpp"
#include "creditvote/lab/world.hpp"
#include "creditvote/panel/tables.hpp"
#include "creditvote/pipeline/csv.hpp"
#include "creditvote/pipeline/io.hpp"
#include "creditvote/pipeline/manifest.hpp"
#include "creditvote/rd/density.hpp"
#include "creditvote/shares/shares.hpp"

namespace creditvote::pipeline {

namespace {

fs::path out_path(const PipelineConfig& c, std::string_view name) { return c.out_dir / std::string(name); }

void require_input(const fs::path& path, std::string_view producer) {
  if (!fs::exists(path))
    throw DataError(fmt::format("missing input {}; run the {} stage first or point the config at it",
                                path.string(), producer));
}

StageResult finish(const PipelineConfig& c, std::string_view stage, const std::vector<fs::path>& inputs,
                   std::vector<fs::path> outputs, std::vector<std::string> messages,
                   const nlohmann::json& notes = nlohmann::json::object()) {
  outputs.push_back(write_manifest(c.out_dir, stage, to_json(c), inputs, outputs, notes));
  return {std::string(stage), std::move(outputs), std::move(messages)};
}

// Credit records with the optional 2010 freeze applied.
std::vector<CreditRecord> load_credit(const PipelineConfig& c, std::vector<fs::path>& inputs,
                                      std::vector<geo::Exclusion>& excluded) {
  const auto path = c.input("credit_panel");
  require_input(path, "simulate");
  inputs.push_back(path);
  auto records = read_credit_panel(path);
  const auto before = records.size();
  std::erase_if(records, [](const CreditRecord& r) {
    return r.credit_score < kMinCreditScore || r.credit_score > kMaxCreditScore;
  });
  if (records.size() != before)
    excluded.push_back({"credit_score", fmt::format("{} records outside [{}, {}]", before - records.size(),
                                                    kMinCreditScore, kMaxCreditScore)});
  if (c.inputs.vintage) {
    require_input(*c.inputs.vintage, "(external) vintage");
    inputs.push_back(*c.inputs.vintage);
    auto frozen = geo::freeze_vintage(std::move(records), read_vintage(*c.inputs.vintage));
    excluded.insert(excluded.end(), frozen.excluded.begin(), frozen.excluded.end());
    return std::move(frozen.records);
  }
  return records;
}

std::vector<int> election_years(const PipelineConfig& c) {
  std::vector<int> years = c.election_years;
  std::sort(years.begin(), years.end());
  years.erase(std::unique(years.begin(), years.end()), years.end());
  return years;
}

}  // namespace

Stage stage_from_string(std::string_view name) {
  if (name == "simulate") return Stage::Simulate;
  if (name == "crosswalk") return Stage::Crosswalk;
  if (name == "scan") return Stage::Scan;
  if (name == "shares") return Stage::Shares;
  if (name == "estimate") return Stage::Estimate;
  if (name == "report") return Stage::Report;
  if (name == "pipeline") return Stage::Pipeline;
  if (name == "all") return Stage::All;
  throw ConfigError(fmt::format("unknown stage '{}'", name));
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Simulate: return "simulate";
    case Stage::Crosswalk: return "crosswalk";
    case Stage::Scan: return "scan";
    case Stage::Shares: return "shares";
    case Stage::Estimate: return "estimate";
    case Stage::Report: return "report";
    case Stage::Pipeline: return "pipeline";
    case Stage::All: return "all";
  }
  return "all";
}

// --- simulate

StageResult run_simulate(const PipelineConfig& c) {
  c.validate();
  const auto geography = lab::build_geography(c.world);
  const auto credit = lab::generate_credit_panel(c.world, c.workers);
  const auto world = lab::generate_election_panel(credit, c.world);

  std::vector<fs::path> outputs;
  auto emit = [&](std::string_view name) { return outputs.emplace_back(out_path(c, name)); };
  write_credit_panel(emit("credit_panel.csv"), credit);
  write_zcta_county(emit("zcta_county.csv"), geography.zcta_county);
  write_zcta_cd(emit("zcta_cd.csv"), geography.zcta_district);
  write_county_cz(emit("county_cz.csv"), geography.county_zone);
  write_elections(emit("elections.csv"), world.elections);
  write_controls(emit("controls.csv"), world.controls);

  CsvWriter truth({"cz", "cutoff", "jump"});
  for (const auto& [zone, cutoff] : lab::planted_thresholds(c.world))
    truth.field(zone).field(cutoff).field(c.world.planted_jump).end_row();
  truth.write(emit("planted_thresholds.csv"));
  write_shares(emit("true_shares.csv"), world.true_shares);
  write_file(emit("world_config.json"), lab::to_json(c.world).dump(2) + "\n");

  const nlohmann::json notes{{"seed", c.world.seed},
                             {"records", credit.size()},
                             {"zones", geography.zones.size()},
                             {"cells", geography.cells.size()}};
  return finish(c, "simulate", {}, std::move(outputs),
                {fmt::format("simulated {} credit records in {} zones and {} cells", credit.size(),
                             geography.zones.size(), geography.cells.size())},
                notes);
}

// --- crosswalk

StageResult run_crosswalk(const PipelineConfig& c) {
  c.validate();
  std::vector<fs::path> inputs{c.input("zcta_county"), c.input("zcta_cd"), c.input("county_cz")};
  for (const auto& p : inputs) require_input(p, "simulate");
  const auto counties = geo::zcta_to_county_majority(read_zcta_county(inputs[0]));
  const geo::DistrictMap districts(read_zcta_cd(inputs[1]));
  const auto county_zone = read_county_cz(inputs[2]);
  const auto built = geo::build_ccd_cells(geo::county_district_pairs(counties, districts), county_zone);

  std::vector<fs::path> outputs;
  auto emit = [&](std::string_view name) { return outputs.emplace_back(out_path(c, name)); };
  write_cells(emit("ccd_cells.csv"), built.cells);
  CsvWriter map({"zcta", "county_fips"});
  for (const auto& [zcta, county] : counties.county_of) map.field(zcta).field(county).end_row();
  map.write(emit("zcta_county_map.csv"));
  std::vector<geo::Exclusion> excluded = counties.unmapped;
  excluded.insert(excluded.end(), built.excluded.begin(), built.excluded.end());
  write_exclusions(emit("crosswalk_exclusions.csv"), excluded);

  const nlohmann::json notes{{"cells", built.cells.size()},
                             {"zctas_mapped", counties.county_of.size()},
                             {"lowest_fips_ties", counties.ties},
                             {"exclusions", excluded.size()}};
  return finish(c, "crosswalk", inputs, std::move(outputs),
                {fmt::format("{} cells, {} zctas mapped, {} exclusions", built.cells.size(),
                             counties.county_of.size(), excluded.size())},
                notes);
}

// --- scan

StageResult run_scan(const PipelineConfig& c) {
  c.validate();
  std::vector<fs::path> inputs;
  std::vector<geo::Exclusion> excluded;
  const auto records = load_credit(c, inputs, excluded);
  const auto years = election_years(c);
  const auto scan = rd::scan_panel(records, c.rd, years, c.workers);

  std::vector<fs::path> outputs;
  auto emit = [&](std::string_view name) { return outputs.emplace_back(out_path(c, name)); };
  write_thresholds(emit("thresholds.csv"), scan.thresholds);
  write_scan_skips(emit("scan_skips.csv"), scan.skips);
  write_cutoff_estimates(emit("cutoff_estimates.csv"), scan.zone_years);
  if (c.inputs.vintage || !excluded.empty()) write_exclusions(emit("credit_exclusions.csv"), excluded);

  std::size_t detected = 0, forward = 0, backward = 0;
  for (const auto& t : scan.thresholds) {
    if (t.provenance == rd::Provenance::Detected) ++detected;
    else if (t.provenance == rd::Provenance::ImputedForward) ++forward;
    else ++backward;
  }

  if (c.run_density_tests) {
    std::map<rd::ZoneYear, std::vector<int>> scores;
    for (const auto& r : records)
      if (auto y = rd::estimation_year(r.year, years, c.rd.pool_non_election_years))
        scores[{r.commuting_zone, *y}].push_back(r.credit_score);
    CsvWriter w({"cz", "year", "cutoff", "log_jump", "se", "t", "pass", "inconclusive", "populated_bins"});
    for (const auto& t : scan.thresholds) {
      if (t.provenance != rd::Provenance::Detected) continue;
      const auto& s = scores[{t.commuting_zone, t.year}];
      const auto d = rd::density_smoothness_test(s, t.cutoff, rd::DensityConfig{});
      w.field(t.commuting_zone)
          .field(t.year)
          .field(t.cutoff)
          .field(d.log_jump)
          .field(d.se)
          .field(d.t_stat)
          .field(d.pass ? "true" : "false")
          .field(d.inconclusive ? "true" : "false")
          .field(static_cast<std::uint64_t>(d.populated_bins))
          .end_row();
    }
    w.write(emit("density_tests.csv"));
  }

  const nlohmann::json notes{{"regressions", scan.regressions},
                             {"zone_years", scan.zone_years.size()},
                             {"detected", detected},
                             {"imputed_forward", forward},
                             {"imputed_backward", backward},
                             {"dropped_zones", scan.dropped_zones},
                             {"skips", scan.skips.size()}};
  return finish(c, "scan", inputs, std::move(outputs),
                {fmt::format("{} regressions over {} zone-years: {} detected, {} imputed forward, {} backward, "
                             "{} zones dropped",
                             scan.regressions, scan.zone_years.size(), detected, forward, backward,
                             scan.dropped_zones.size())},
                notes);
}

// --- shares

StageResult run_shares(const PipelineConfig& c) {
  c.validate();
  std::vector<fs::path> inputs;
  std::vector<geo::Exclusion> excluded;
  const auto records = load_credit(c, inputs, excluded);
  const auto thresholds_path = out_path(c, "thresholds.csv");
  const auto cells_path = out_path(c, "ccd_cells.csv");
  require_input(thresholds_path, "scan");
  require_input(cells_path, "crosswalk");
  require_input(c.input("zcta_county"), "simulate");
  require_input(c.input("zcta_cd"), "simulate");
  inputs.insert(inputs.end(), {thresholds_path, cells_path, c.input("zcta_county"), c.input("zcta_cd")});

  const auto thresholds = read_thresholds(thresholds_path);
  const auto cells = read_cells(cells_path);
  const geo::CellAssigner assigner(geo::zcta_to_county_majority(read_zcta_county(c.input("zcta_county"))),
                                   geo::DistrictMap(read_zcta_cd(c.input("zcta_cd"))), cells);
  const auto years = election_years(c);
  const auto built = shares::compute_shares(records, thresholds, assigner, years, c.bandwidths);

  std::vector<fs::path> outputs;
  auto emit = [&](std::string_view name) { return outputs.emplace_back(out_path(c, name)); };
  write_shares(emit("shares.csv"), built.records);
  write_log(emit("shares_log.csv"), built.log);

  std::set<std::pair<std::string, int>> seen;
  std::size_t individuals = 0;
  for (const auto& r : built.records)
    if (r.share_total && seen.insert({r.cell_id, r.year}).second) individuals += r.cell_population;
  const auto summary = shares::summarize_shares(built.records);
  write_file(emit("share_summary.txt"), shares::format_share_summary(summary, individuals));

  return finish(c, "shares", inputs, std::move(outputs),
                {fmt::format("{} share records, {} log entries", built.records.size(), built.log.size())},
                {{"records", built.records.size()}, {"individuals", individuals}});
}

// --- estimate

EstimateSet estimate_all(std::span<const panel::PanelRow> rows, const PipelineConfig& c) {
  EstimateSet s;
  s.bandwidth = c.bandwidth;
  std::vector<panel::PanelRow> restricted;
  std::span<const panel::PanelRow> sample = rows;
  if (!c.estimation_years.empty()) {
    restricted = panel::restrict_years(rows, c.estimation_years);
    sample = restricted;
  } else if (c.gerrymander_window) {
    restricted = panel::gerrymander_window(rows);
    sample = restricted;
  }
  std::set<int> years;
  for (const auto& r : sample) years.insert(r.year);
  s.years.assign(years.begin(), years.end());

  using panel::Outcome;
  using panel::Specification;
  using panel::Subset;
  for (auto spec : {Specification::Pooled, Specification::AboveBelow})
    for (auto outcome : {Outcome::RepShare, Outcome::DemShare})
      s.vote_models.push_back(panel::estimate(sample, outcome, Subset::All, spec, c.bandwidth, c.estimation));
  for (auto subset : {Subset::All, Subset::RepWinning, Subset::DemWinning})
    s.nominate_models.push_back(
        panel::estimate_nominate(sample, subset, c.bandwidth, Specification::Pooled, c.estimation));
  for (auto spec : {Specification::Pooled, Specification::AboveBelow})
    for (auto outcome : {Outcome::RepShare, Outcome::DemShare}) {
      auto key = fmt::format("{}_{}", panel::to_string(outcome), panel::to_string(spec));
      s.sweeps[key] = panel::bandwidth_sweep(sample, outcome, Subset::All, spec, c.bandwidths, c.estimation,
                                             c.workers);
    }
  return s;
}

nlohmann::json to_json(const EstimateSet& s) {
  nlohmann::json j;
  j["bandwidth"] = s.bandwidth;
  j["years"] = s.years;
  j["vote_models"] = nlohmann::json::array();
  for (const auto& e : s.vote_models) j["vote_models"].push_back(panel::to_json(e));
  j["nominate_models"] = nlohmann::json::array();
  for (const auto& e : s.nominate_models) j["nominate_models"].push_back(panel::to_json(e));
  j["sweeps"] = nlohmann::json::object();
  for (const auto& [key, list] : s.sweeps) {
    auto& arr = j["sweeps"][key] = nlohmann::json::array();
    for (const auto& e : list) arr.push_back(panel::to_json(e));
  }
  j["log"] = s.log;
  return j;
}

EstimateSet estimate_set_from_json(const nlohmann::json& j) {
  EstimateSet s;
  try {
    s.bandwidth = j.value("bandwidth", 15);
    s.years = j.value("years", std::vector<int>{});
    for (const auto& e : j.value("vote_models", nlohmann::json::array()))
      s.vote_models.push_back(panel::estimate_from_json(e));
    for (const auto& e : j.value("nominate_models", nlohmann::json::array()))
      s.nominate_models.push_back(panel::estimate_from_json(e));
    const auto sweeps = j.value("sweeps", nlohmann::json::object());
    for (const auto& [key, list] : sweeps.items())
      for (const auto& e : list) s.sweeps[key].push_back(panel::estimate_from_json(e));
    s.log = j.value("log", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("estimates.json: {}", e.what()));
  } catch (const ConfigError& e) {
    throw DataError(fmt::format("estimates.json: {}", e.what()));
  }
  return s;
}

StageResult run_estimate(const PipelineConfig& c) {
  c.validate();
  const auto shares_path = out_path(c, "shares.csv");
  require_input(shares_path, "shares");
  require_input(c.input("elections"), "simulate");
  require_input(c.input("controls"), "simulate");
  const std::vector<fs::path> inputs{shares_path, c.input("elections"), c.input("controls")};
  const auto assembled =
      panel::assemble_panel(read_shares(shares_path), read_elections(inputs[1]), read_controls(inputs[2]));
  auto set = estimate_all(assembled.rows, c);
  set.log = assembled.log;

  std::vector<fs::path> outputs{out_path(c, "estimates.json")};
  write_file(outputs.back(), to_json(set).dump(2) + "\n");
  const auto& main = set.vote_models.front().result;
  return finish(c, "estimate", inputs, std::move(outputs),
                {fmt::format("rep share on share_total (bw {}): {:.4f} (se {:.4f}), {} cell-years", c.bandwidth,
                             main.coef("share_total"), main.se("share_total"), main.n_obs)},
                {{"panel_rows", assembled.rows.size()}, {"dropped_cell_years", assembled.log.size()}});
}

// --- report

std::string render_report(const EstimateSet& s) {
  std::string out;
  out += panel::format_regression_table(s.vote_models, fmt::format("Vote shares, bandwidth {}", s.bandwidth));
  out += "\n";
  out += panel::format_regression_table(s.nominate_models,
                                        fmt::format("Winner DW-NOMINATE (dim 1), bandwidth {}", s.bandwidth));
  for (const auto& [key, list] : s.sweeps) {
    out += "\n";
    out += panel::format_sweep_table(list, fmt::format("Bandwidth sweep: {}", key));
  }
  return out;
}

StageResult run_report(const PipelineConfig& c) {
  c.validate();
  const auto estimates_path = out_path(c, "estimates.json");
  require_input(estimates_path, "estimate");
  std::vector<fs::path> inputs{estimates_path};
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(estimates_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(fmt::format("{}: {}", estimates_path.string(), e.what()));
  }
  const auto set = estimate_set_from_json(j);
  std::string text = render_report(set);
  const auto summary_path = out_path(c, "share_summary.txt");
  if (fs::exists(summary_path)) {
    inputs.push_back(summary_path);
    text += "\n" + read_file(summary_path);
  }
  std::vector<fs::path> outputs{out_path(c, "report.txt")};
  write_file(outputs.back(), text);

  CsvWriter csv({"table", "outcome", "subset", "specification", "bandwidth", "term", "coef", "se", "p", "stars",
                 "n_obs", "r2", "dep_var_mean"});
  auto add = [&](std::string_view table, const panel::PanelEstimate& e) {
    for (const auto& term : e.result.names) {
      const double p = e.result.p_value(term);
      csv.field(table)
          .field(panel::to_string(e.outcome))
          .field(panel::to_string(e.subset))
          .field(panel::to_string(e.specification))
          .field(e.bandwidth)
          .field(term)
          .field(e.result.coef(term))
          .field(e.result.se(term))
          .field(p)
          .field(panel::stars(p))
          .field(static_cast<long long>(e.result.n_obs))
          .field(e.result.r_squared)
          .field(e.dep_var_mean)
          .end_row();
    }
  };
  for (const auto& e : set.vote_models) add("vote", e);
  for (const auto& e : set.nominate_models) add("nominate", e);
  for (const auto& [key, list] : set.sweeps)
    for (const auto& e : list) add("sweep", e);
  outputs.push_back(out_path(c, "report.csv"));
  csv.write(outputs.back());
  return finish(c, "report", inputs, std::move(outputs), {"report written"});
}

std::vector<StageResult> run_stage(Stage stage, const PipelineConfig& config) {
  std::vector<StageResult> out;
  switch (stage) {
    case Stage::Simulate: out.push_back(run_simulate(config)); break;
    case Stage::Crosswalk: out.push_back(run_crosswalk(config)); break;
    case Stage::Scan: out.push_back(run_scan(config)); break;
    case Stage::Shares: out.push_back(run_shares(config)); break;
    case Stage::Estimate: out.push_back(run_estimate(config)); break;
    case Stage::Report: out.push_back(run_report(config)); break;
    case Stage::All:
      out.push_back(run_simulate(config));
      [[fallthrough]];
    case Stage::Pipeline:
      out.push_back(run_crosswalk(config));
      out.push_back(run_scan(config));
      out.push_back(run_shares(config));
      out.push_back(run_estimate(config));
      out.push_back(run_report(config));
      break;
  }
  return out;
}

}  // namespace creditvote::pipeline
