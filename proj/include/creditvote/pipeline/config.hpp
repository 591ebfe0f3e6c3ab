#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "creditvote/lab/world.hpp"
#include "creditvote/panel/panel.hpp"
#include "creditvote/rd/scanner.hpp"

namespace creditvote::pipeline {

// Input files default to <input_dir>/<standard name>; input_dir defaults to
// the output directory so stages chain without extra configuration.
struct InputPaths {
  std::optional<std::filesystem::path> credit_panel;
  std::optional<std::filesystem::path> zcta_county;
  std::optional<std::filesystem::path> zcta_cd;
  std::optional<std::filesystem::path> county_cz;
  std::optional<std::filesystem::path> elections;
  std::optional<std::filesystem::path> controls;
  // kind,code,code_2010 renames; when absent records are used as given.
  std::optional<std::filesystem::path> vintage;
};

struct PipelineConfig {
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> input_dir;
  InputPaths inputs;
  lab::WorldConfig world;
  rd::RdConfig rd;
  std::vector<int> election_years{2004, 2006, 2008, 2010, 2012, 2014, 2016};
  std::vector<int> bandwidths{5, 10, 15, 20, 25};
  int bandwidth = 15;  // headline tables
  // Estimation sample restriction (--years); empty keeps every year.
  std::vector<int> estimation_years;
  bool gerrymander_window = false;
  panel::EstimationOptions estimation;
  bool run_density_tests = true;
  int workers = 1;

  void validate() const;  // throws ConfigError

  std::filesystem::path input(std::string_view name) const;
};

nlohmann::json to_json(const PipelineConfig& c);
// Unknown keys raise ConfigError; missing keys keep defaults.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

std::vector<int> parse_year_list(std::string_view text);  // "2012,2014,2016"

}  // namespace creditvote::pipeline
