#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "creditvote/geo/crosswalk.hpp"
#include "creditvote/panel/panel.hpp"
#include "creditvote/panel/shift_share.hpp"
#include "creditvote/rd/scanner.hpp"
#include "creditvote/records.hpp"
#include "creditvote/shares/shares.hpp"

namespace creditvote::lab {

// splitmix64 finaliser; seeds one mt19937_64 per (seed, stream) pair so
// zones and cells can be generated in any order or thread.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

struct VoteDgp {
  double beta_share = 0.27;
  // When both are set the outcome loads on the above/below split instead.
  std::optional<double> beta_above;
  std::optional<double> beta_below;
  double gamma_white = 0.7;
  double gamma_female = -0.97;
  double gamma_china = -0.02;
  double cell_effect_sd = 0.08;
  double year_effect_sd = 0.02;
  double noise_sd = 0.01;
  // Unobserved shock shared by exposure and vote share (loading on the
  // exposure shock); makes OLS on exposure biased.
  double confounding = 0.5;
  double exposure_noise_sd = 0.05;
  double beta_nominate = 0.509;
  double nominate_noise_sd = 0.02;
  double other_share_max = 0.04;  // third-party votes, uniform in [0, max]
  int share_bandwidth = 15;       // bandwidth whose share drives outcomes
  bool round_votes = false;
};

struct WorldConfig {
  int n_czs = 30;
  int counties_per_cz = 2;
  int cells_per_county = 2;  // congressional districts per county
  int zctas_per_cell = 2;
  int persons_per_cz = 2500;
  std::vector<int> years{2004, 2006, 2008, 2010, 2012, 2014, 2016};
  // Empty: a per-zone threshold drawn from the grid within threshold_range.
  std::map<std::string, int> planted_thresholds;
  std::pair<int, int> threshold_range{570, 650};
  double planted_jump = 1.14;
  double limit_noise_sd = 0.3;
  double county_effect_sd = 0.2;
  double base_level = 10.0;     // asinh(limit) at score 600
  double base_slope = 0.008;    // per score point
  double score_noise_sd = 15.0;  // person-year deviation from the person's mean
  double monthly_drift = 5.0;   // uniform +/- drift on top of it
  double cell_trend_sd = 3.0;   // cell-level mean shift per election cycle
  // Fraction of persons just below the threshold moved just above it.
  double bunching_fraction = 0.0;
  int bunching_width = 10;
  // Mixture of two truncated normals over [300, 850].
  double low_weight = 0.205;
  double low_mean = 515.0, low_sd = 65.0;
  double high_mean = 695.0, high_sd = 90.0;
  int n_industries = 10;
  VoteDgp votes;
  std::uint64_t seed = 20240601;

  void validate() const;  // throws ConfigError
};

nlohmann::json to_json(const WorldConfig& c);
// Missing keys keep their defaults; unknown keys raise ConfigError.
WorldConfig world_config_from_json(const nlohmann::json& j);

// Fixed geography of a world: codes only, no draws.
struct Geography {
  std::vector<std::string> zones;
  std::vector<geo::CountyOverlap> zcta_county;
  std::vector<geo::DistrictOverlap> zcta_district;
  std::map<std::string, std::string> county_zone;
  std::vector<geo::CcdCell> cells;
  // zone -> zcta -> cell
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> zctas_of_zone;
};

Geography build_geography(const WorldConfig& config);

// Planted threshold per zone (constant across years).
std::map<std::string, int> planted_thresholds(const WorldConfig& config);

// Credit records of one zone for the given years, in (year, person) order.
std::vector<CreditRecord> generate_zone_records(const WorldConfig& config, const Geography& geo,
                                                std::size_t zone_index, std::span<const int> years);

// All zones, concatenated in zone order.
std::vector<CreditRecord> generate_credit_panel(const WorldConfig& config, int workers = 1);

struct ElectionWorld {
  std::vector<panel::ElectionRecord> elections;
  std::vector<panel::ControlRecord> controls;
  std::map<int, panel::ShiftShareInputs> shift_share;  // by year; regions are zones
  std::vector<shares::ShareRecord> true_shares;
};

// Outcomes built from the shares the planted thresholds imply.
ElectionWorld generate_election_panel(std::span<const CreditRecord> credit, const WorldConfig& config);

geo::CellAssigner make_assigner(const Geography& geo);

}  // namespace creditvote::lab
