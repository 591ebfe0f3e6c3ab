#include "creditvote/pipeline/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>

#include "creditvote/errors.hpp"
#include "creditvote/pipeline/csv.hpp"
#include "creditvote/shares/shares.hpp"

namespace creditvote::pipeline {

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
  }
}

void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> known, std::string_view where) {
  if (!j.is_object()) throw ConfigError(fmt::format("{} must be a JSON object", where));
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(fmt::format("unknown {} key '{}'", where, key));
}

nlohmann::json path_or_null(const std::optional<std::filesystem::path>& p) {
  return p ? nlohmann::json(p->string()) : nlohmann::json();
}

kernel::CovarianceType covariance_key(const nlohmann::json& j) {
  std::string s;
  read(j, "covariance", s);
  try {
    return kernel::covariance_from_string(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void read_path(const nlohmann::json& j, const char* key, std::optional<std::filesystem::path>& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  std::string s;
  read(j, key, s);
  out = s;
}

}  // namespace

void PipelineConfig::validate() const {
  world.validate();
  rd.validate();
  if (workers < 1 || workers > 256) throw ConfigError(fmt::format("workers must be in 1..256, got {}", workers));
  if (bandwidths.empty()) throw ConfigError("at least one bandwidth is required");
  auto allowed = [](int b) {
    return std::find(std::begin(shares::kStandardBandwidths), std::end(shares::kStandardBandwidths), b) !=
           std::end(shares::kStandardBandwidths);
  };
  for (int b : bandwidths)
    if (!allowed(b)) throw ConfigError(fmt::format("bandwidth {} is not one of 5, 10, 15, 20, 25", b));
  if (!allowed(bandwidth)) throw ConfigError(fmt::format("bandwidth {} is not one of 5, 10, 15, 20, 25", bandwidth));
  if (election_years.empty()) throw ConfigError("election_years is empty");
  for (int y : election_years)
    if (y % 2 != 0) throw ConfigError(fmt::format("election year {} is odd", y));
  if (estimation.absorb.max_sweeps < 1 || estimation.absorb.tolerance <= 0)
    throw ConfigError("absorption needs positive max_sweeps and tolerance");
}

std::filesystem::path PipelineConfig::input(std::string_view name) const {
  const std::optional<std::filesystem::path>* explicit_path = nullptr;
  if (name == "credit_panel") explicit_path = &inputs.credit_panel;
  else if (name == "zcta_county") explicit_path = &inputs.zcta_county;
  else if (name == "zcta_cd") explicit_path = &inputs.zcta_cd;
  else if (name == "county_cz") explicit_path = &inputs.county_cz;
  else if (name == "elections") explicit_path = &inputs.elections;
  else if (name == "controls") explicit_path = &inputs.controls;
  if (explicit_path && *explicit_path) return **explicit_path;
  return input_dir.value_or(out_dir) / fmt::format("{}.csv", name);
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json rd = nlohmann::json::object(
      {{"cutoff_grid", c.rd.cutoff_grid},
       {"polynomial_degree", c.rd.polynomial_degree},
       {"window_margin", c.rd.window_margin},
       {"window_halfwidth", c.rd.window_halfwidth ? nlohmann::json(*c.rd.window_halfwidth) : nlohmann::json()},
       {"min_observations", c.rd.min_observations},
       {"alpha_level", c.rd.alpha_level},
       {"covariance", std::string(kernel::to_string(c.rd.covariance))},
       {"side_specific_polynomial", c.rd.side_specific_polynomial},
       {"pool_non_election_years", c.rd.pool_non_election_years},
       {"contiguity_points", c.rd.contiguity_points}});
  nlohmann::json est = nlohmann::json::object(
      {{"instrument_exposure", c.estimation.instrument_exposure},
       {"absorb_state_year", c.estimation.absorb_state_year},
       {"covariance", std::string(kernel::to_string(c.estimation.covariance))},
       {"max_sweeps", c.estimation.absorb.max_sweeps},
       {"tolerance", c.estimation.absorb.tolerance}});
  nlohmann::json inputs = nlohmann::json::object({{"credit_panel", path_or_null(c.inputs.credit_panel)},
                                                  {"zcta_county", path_or_null(c.inputs.zcta_county)},
                                                  {"zcta_cd", path_or_null(c.inputs.zcta_cd)},
                                                  {"county_cz", path_or_null(c.inputs.county_cz)},
                                                  {"elections", path_or_null(c.inputs.elections)},
                                                  {"controls", path_or_null(c.inputs.controls)},
                                                  {"vintage", path_or_null(c.inputs.vintage)}});
  return nlohmann::json::object({{"out", c.out_dir.string()},
                                 {"input_dir", path_or_null(c.input_dir)},
                                 {"inputs", std::move(inputs)},
                                 {"world", lab::to_json(c.world)},
                                 {"rd", std::move(rd)},
                                 {"election_years", c.election_years},
                                 {"bandwidths", c.bandwidths},
                                 {"bandwidth", c.bandwidth},
                                 {"years", c.estimation_years},
                                 {"gerrymander_window", c.gerrymander_window},
                                 {"estimation", std::move(est)},
                                 {"density_tests", c.run_density_tests},
                                 {"workers", c.workers}});
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  check_keys(j,
             {"out", "input_dir", "inputs", "world", "rd", "election_years", "bandwidths", "bandwidth", "years",
              "gerrymander_window", "estimation", "density_tests", "workers"},
             "config");
  PipelineConfig c;
  if (j.contains("out")) {
    std::string s;
    read(j, "out", s);
    c.out_dir = s;
  }
  read_path(j, "input_dir", c.input_dir);
  if (j.contains("inputs")) {
    const auto& in = j.at("inputs");
    check_keys(in, {"credit_panel", "zcta_county", "zcta_cd", "county_cz", "elections", "controls", "vintage"},
               "inputs");
    read_path(in, "credit_panel", c.inputs.credit_panel);
    read_path(in, "zcta_county", c.inputs.zcta_county);
    read_path(in, "zcta_cd", c.inputs.zcta_cd);
    read_path(in, "county_cz", c.inputs.county_cz);
    read_path(in, "elections", c.inputs.elections);
    read_path(in, "controls", c.inputs.controls);
    read_path(in, "vintage", c.inputs.vintage);
  }
  if (j.contains("world")) c.world = lab::world_config_from_json(j.at("world"));
  if (j.contains("rd")) {
    const auto& r = j.at("rd");
    check_keys(r,
               {"cutoff_grid", "polynomial_degree", "window_margin", "window_halfwidth", "min_observations",
                "alpha_level", "covariance", "side_specific_polynomial", "pool_non_election_years",
                "contiguity_points"},
               "rd");
    read(r, "cutoff_grid", c.rd.cutoff_grid);
    read(r, "polynomial_degree", c.rd.polynomial_degree);
    read(r, "window_margin", c.rd.window_margin);
    if (r.contains("window_halfwidth") && !r.at("window_halfwidth").is_null()) {
      int h = 0;
      read(r, "window_halfwidth", h);
      c.rd.window_halfwidth = h;
    }
    read(r, "min_observations", c.rd.min_observations);
    read(r, "alpha_level", c.rd.alpha_level);
    if (r.contains("covariance")) c.rd.covariance = covariance_key(r);
    read(r, "side_specific_polynomial", c.rd.side_specific_polynomial);
    read(r, "pool_non_election_years", c.rd.pool_non_election_years);
    read(r, "contiguity_points", c.rd.contiguity_points);
  }
  read(j, "election_years", c.election_years);
  read(j, "bandwidths", c.bandwidths);
  read(j, "bandwidth", c.bandwidth);
  read(j, "years", c.estimation_years);
  read(j, "gerrymander_window", c.gerrymander_window);
  if (j.contains("estimation")) {
    const auto& e = j.at("estimation");
    check_keys(e, {"instrument_exposure", "absorb_state_year", "covariance", "max_sweeps", "tolerance"},
               "estimation");
    read(e, "instrument_exposure", c.estimation.instrument_exposure);
    read(e, "absorb_state_year", c.estimation.absorb_state_year);
    if (e.contains("covariance")) c.estimation.covariance = covariance_key(e);
    read(e, "max_sweeps", c.estimation.absorb.max_sweeps);
    read(e, "tolerance", c.estimation.absorb.tolerance);
  }
  read(j, "density_tests", c.run_density_tests);
  read(j, "workers", c.workers);
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return config_from_json(j);
}

std::vector<int> parse_year_list(std::string_view text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    auto item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    int y = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), y);
    if (item.empty() || ec != std::errc() || p != item.data() + item.size())
      throw ConfigError(fmt::format("bad year '{}' in list '{}'", item, text));
    out.push_back(y);
    start = end + 1;
  }
  return out;
}

}  // namespace creditvote::pipeline
