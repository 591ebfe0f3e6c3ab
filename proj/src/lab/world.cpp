#include "creditvote/lab/world.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "creditvote/errors.hpp"
#include "creditvote/parallel.hpp"

namespace creditvote::lab {

namespace {

// Stream ids. Zones use their index directly.
constexpr std::uint64_t kThresholdStream = 1ULL << 40;
constexpr std::uint64_t kElectionStream = 2ULL << 40;

double truncated_normal(std::mt19937_64& rng, double mean, double sd, double lo, double hi) {
  std::normal_distribution<double> n(mean, sd);
  for (;;) {
    const double x = n(rng);
    if (x >= lo && x <= hi) return x;
  }
}

std::string zone_id(std::size_t i) { return fmt::format("CZ{:03d}", i + 1); }
std::string state_of(std::size_t i) { return fmt::format("{:02d}", i % 50 + 1); }

int first_year(const WorldConfig& c) { return *std::min_element(c.years.begin(), c.years.end()); }

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(stream_seed(seed, stream));
}

void WorldConfig::validate() const {
  if (n_czs < 1 || counties_per_cz < 1 || cells_per_county < 1 || zctas_per_cell < 1 ||
      persons_per_cz < 1)
    throw ConfigError("world counts must all be at least 1");
  if (years.empty()) throw ConfigError("world needs at least one year");
  for (const auto& [zone, t] : planted_thresholds)
    if (t < 560 || t > 660 || t % 5 != 0)
      throw ConfigError(fmt::format("planted threshold {} of {} is not on the 560..660 grid", t, zone));
  if (threshold_range.first > threshold_range.second || threshold_range.first < 560 ||
      threshold_range.second > 660)
    throw ConfigError("threshold_range must lie within [560, 660]");
  if (limit_noise_sd < 0 || score_noise_sd < 0 || monthly_drift < 0 || cell_trend_sd < 0)
    throw ConfigError("noise scales must be nonnegative");
  if (bunching_fraction < 0 || bunching_fraction > 1) throw ConfigError("bunching_fraction must be in [0, 1]");
  if (bunching_width < 1) throw ConfigError("bunching_width must be positive");
  if (low_weight < 0 || low_weight > 1 || low_sd <= 0 || high_sd <= 0)
    throw ConfigError("score mixture parameters out of range");
  if (n_industries < 1) throw ConfigError("n_industries must be at least 1");
  if (votes.share_bandwidth < 1) throw ConfigError("votes.share_bandwidth must be positive");
  if (votes.beta_above.has_value() != votes.beta_below.has_value())
    throw ConfigError("votes.beta_above and votes.beta_below must be set together");
  if (votes.other_share_max < 0 || votes.other_share_max > 0.5)
    throw ConfigError("votes.other_share_max must be in [0, 0.5]");
}

// --- JSON

nlohmann::json to_json(const WorldConfig& c) {
  nlohmann::json v = nlohmann::json::object({{"beta_share", c.votes.beta_share},
                   {"beta_above", c.votes.beta_above ? nlohmann::json(*c.votes.beta_above) : nlohmann::json()},
                   {"beta_below", c.votes.beta_below ? nlohmann::json(*c.votes.beta_below) : nlohmann::json()},
                   {"gamma_white", c.votes.gamma_white},
                   {"gamma_female", c.votes.gamma_female},
                   {"gamma_china", c.votes.gamma_china},
                   {"cell_effect_sd", c.votes.cell_effect_sd},
                   {"year_effect_sd", c.votes.year_effect_sd},
                   {"noise_sd", c.votes.noise_sd},
                   {"confounding", c.votes.confounding},
                   {"exposure_noise_sd", c.votes.exposure_noise_sd},
                   {"beta_nominate", c.votes.beta_nominate},
                   {"nominate_noise_sd", c.votes.nominate_noise_sd},
                   {"other_share_max", c.votes.other_share_max},
                   {"share_bandwidth", c.votes.share_bandwidth},
                   {"round_votes", c.votes.round_votes}});
  return nlohmann::json::object({{"n_czs", c.n_czs},
          {"counties_per_cz", c.counties_per_cz},
          {"cells_per_county", c.cells_per_county},
          {"zctas_per_cell", c.zctas_per_cell},
          {"persons_per_cz", c.persons_per_cz},
          {"years", c.years},
          {"planted_thresholds", c.planted_thresholds},
          {"threshold_range", nlohmann::json::array({c.threshold_range.first, c.threshold_range.second})},
          {"planted_jump", c.planted_jump},
          {"limit_noise_sd", c.limit_noise_sd},
          {"county_effect_sd", c.county_effect_sd},
          {"base_level", c.base_level},
          {"base_slope", c.base_slope},
          {"score_noise_sd", c.score_noise_sd},
          {"monthly_drift", c.monthly_drift},
          {"cell_trend_sd", c.cell_trend_sd},
          {"bunching_fraction", c.bunching_fraction},
          {"bunching_width", c.bunching_width},
          {"low_weight", c.low_weight},
          {"low_mean", c.low_mean},
          {"low_sd", c.low_sd},
          {"high_mean", c.high_mean},
          {"high_sd", c.high_sd},
          {"n_industries", c.n_industries},
          {"votes", std::move(v)},
          {"seed", c.seed}});
}

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("world config key '{}': {}", key, e.what()));
  }
}

void read_optional(const nlohmann::json& j, const char* key, std::optional<double>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  double v = 0.0;
  read(j, key, v);
  out = v;
}

void reject_unknown(const nlohmann::json& j, const nlohmann::json& known, std::string_view where) {
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ConfigError(fmt::format("unknown {} key '{}'", where, key));
}

}  // namespace

WorldConfig world_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("world config must be a JSON object");
  WorldConfig c;
  const auto known = to_json(c);
  reject_unknown(j, known, "world config");
  read(j, "n_czs", c.n_czs);
  read(j, "counties_per_cz", c.counties_per_cz);
  read(j, "cells_per_county", c.cells_per_county);
  read(j, "zctas_per_cell", c.zctas_per_cell);
  read(j, "persons_per_cz", c.persons_per_cz);
  read(j, "years", c.years);
  read(j, "planted_thresholds", c.planted_thresholds);
  if (j.contains("threshold_range")) {
    std::vector<int> r;
    read(j, "threshold_range", r);
    if (r.size() != 2) throw ConfigError("threshold_range needs two values");
    c.threshold_range = {r[0], r[1]};
  }
  read(j, "planted_jump", c.planted_jump);
  read(j, "limit_noise_sd", c.limit_noise_sd);
  read(j, "county_effect_sd", c.county_effect_sd);
  read(j, "base_level", c.base_level);
  read(j, "base_slope", c.base_slope);
  read(j, "score_noise_sd", c.score_noise_sd);
  read(j, "monthly_drift", c.monthly_drift);
  read(j, "cell_trend_sd", c.cell_trend_sd);
  read(j, "bunching_fraction", c.bunching_fraction);
  read(j, "bunching_width", c.bunching_width);
  read(j, "low_weight", c.low_weight);
  read(j, "low_mean", c.low_mean);
  read(j, "low_sd", c.low_sd);
  read(j, "high_mean", c.high_mean);
  read(j, "high_sd", c.high_sd);
  read(j, "n_industries", c.n_industries);
  read(j, "seed", c.seed);
  if (j.contains("votes")) {
    const auto& v = j.at("votes");
    if (!v.is_object()) throw ConfigError("votes must be an object");
    reject_unknown(v, known.at("votes"), "votes");
    read(v, "beta_share", c.votes.beta_share);
    read_optional(v, "beta_above", c.votes.beta_above);
    read_optional(v, "beta_below", c.votes.beta_below);
    read(v, "gamma_white", c.votes.gamma_white);
    read(v, "gamma_female", c.votes.gamma_female);
    read(v, "gamma_china", c.votes.gamma_china);
    read(v, "cell_effect_sd", c.votes.cell_effect_sd);
    read(v, "year_effect_sd", c.votes.year_effect_sd);
    read(v, "noise_sd", c.votes.noise_sd);
    read(v, "confounding", c.votes.confounding);
    read(v, "exposure_noise_sd", c.votes.exposure_noise_sd);
    read(v, "beta_nominate", c.votes.beta_nominate);
    read(v, "nominate_noise_sd", c.votes.nominate_noise_sd);
    read(v, "other_share_max", c.votes.other_share_max);
    read(v, "share_bandwidth", c.votes.share_bandwidth);
    read(v, "round_votes", c.votes.round_votes);
  }
  c.validate();
  return c;
}

// --- Geography

Geography build_geography(const WorldConfig& config) {
  Geography g;
  const auto congresses = [&] {
    std::set<int> out;
    for (int y : config.years) out.insert(geo::congress_for_election_year(y + (y % 2)));
    return out;
  }();
  int zcta_counter = 10001;
  for (std::size_t z = 0; z < static_cast<std::size_t>(config.n_czs); ++z) {
    const auto zone = zone_id(z);
    const auto state = state_of(z);
    g.zones.push_back(zone);
    std::vector<std::string> counties;
    for (int c = 0; c < config.counties_per_cz; ++c) {
      const int county_number = static_cast<int>(z / 50) * config.counties_per_cz + c + 1;
      counties.push_back(state + fmt::format("{:03d}", county_number));
      g.county_zone[counties.back()] = zone;
    }
    for (int c = 0; c < config.counties_per_cz; ++c) {
      const auto& county = counties[static_cast<std::size_t>(c)];
      for (int d = 0; d < config.cells_per_county; ++d) {
        const int district_number =
            (static_cast<int>(z / 50) * config.counties_per_cz + c) * config.cells_per_county + d + 1;
        const auto district = state + fmt::format("{:02d}", district_number);
        for (int k = 0; k < config.zctas_per_cell; ++k) {
          const auto zcta = fmt::format("{:05d}", zcta_counter++);
          // The first ZCTA of each cell spills 30% of its population into a
          // neighbouring county so the majority rule has work to do.
          if (k == 0 && config.counties_per_cz > 1) {
            const auto& other = counties[static_cast<std::size_t>((c + 1) % config.counties_per_cz)];
            g.zcta_county.push_back({zcta, county, 700.0});
            g.zcta_county.push_back({zcta, other, 300.0});
          } else {
            g.zcta_county.push_back({zcta, county, 1000.0});
          }
          for (int congress : congresses) g.zcta_district.push_back({zcta, district, congress, 1000.0});
          g.zctas_of_zone[zone].emplace_back(zcta, geo::make_cell_id(county, district));
        }
      }
    }
  }
  const auto counties = geo::zcta_to_county_majority(g.zcta_county);
  const geo::DistrictMap districts(g.zcta_district);
  g.cells = geo::build_ccd_cells(geo::county_district_pairs(counties, districts), g.county_zone).cells;
  return g;
}

geo::CellAssigner make_assigner(const Geography& geo) {
  return geo::CellAssigner(geo::zcta_to_county_majority(geo.zcta_county),
                           geo::DistrictMap(geo.zcta_district), geo.cells);
}

std::map<std::string, int> planted_thresholds(const WorldConfig& config) {
  std::map<std::string, int> out;
  const int lo = (config.threshold_range.first + 4) / 5;
  const int hi = config.threshold_range.second / 5;
  for (std::size_t z = 0; z < static_cast<std::size_t>(config.n_czs); ++z) {
    const auto zone = zone_id(z);
    if (auto it = config.planted_thresholds.find(zone); it != config.planted_thresholds.end()) {
      out[zone] = it->second;
      continue;
    }
    auto rng = make_stream(config.seed, kThresholdStream + z);
    out[zone] = 5 * std::uniform_int_distribution<int>(lo, hi)(rng);
  }
  return out;
}

// --- Credit panel

std::vector<CreditRecord> generate_zone_records(const WorldConfig& config, const Geography& geo,
                                                std::size_t zone_index, std::span<const int> years) {
  const auto& zone = geo.zones.at(zone_index);
  const auto& zctas = geo.zctas_of_zone.at(zone);
  const int threshold = planted_thresholds(config).at(zone);
  auto rng = make_stream(config.seed, zone_index);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto county_of_zcta = geo::zcta_to_county_majority(geo.zcta_county).county_of;

  std::map<std::string, double> county_effect;
  for (const auto& [zcta, county] : county_of_zcta)
    if (geo.county_zone.at(county) == zone && !county_effect.contains(county)) county_effect[county] = 0.0;
  for (auto& [county, effect] : county_effect) effect = config.county_effect_sd * std_normal(rng);

  std::map<std::string, double> cell_trend;
  for (const auto& [zcta, cell] : zctas) cell_trend.try_emplace(cell, 0.0);
  for (auto& [cell, trend] : cell_trend) trend = config.cell_trend_sd * std_normal(rng);

  struct Person {
    std::size_t zcta;
    double mean_score;
  };
  std::vector<Person> persons(static_cast<std::size_t>(config.persons_per_cz));
  std::uniform_int_distribution<std::size_t> pick(0, zctas.size() - 1);
  for (auto& p : persons) {
    p.zcta = pick(rng);
    p.mean_score = unit(rng) < config.low_weight
                       ? truncated_normal(rng, config.low_mean, config.low_sd, kMinCreditScore, kMaxCreditScore)
                       : truncated_normal(rng, config.high_mean, config.high_sd, kMinCreditScore, kMaxCreditScore);
  }

  const int base_year = first_year(config);
  std::vector<CreditRecord> out;
  out.reserve(persons.size() * years.size());
  for (int year : years) {
    const double cycles = (year - base_year) / 2.0;
    for (std::size_t i = 0; i < persons.size(); ++i) {
      const auto& p = persons[i];
      const auto& [zcta, cell] = zctas[p.zcta];
      double s = p.mean_score + cycles * cell_trend.at(cell) + config.score_noise_sd * std_normal(rng) +
                 config.monthly_drift * (2.0 * unit(rng) - 1.0);
      int score = std::clamp(static_cast<int>(std::lround(s)), kMinCreditScore, kMaxCreditScore);
      const double bunch_draw = unit(rng);
      if (config.bunching_fraction > 0.0 && score >= threshold - config.bunching_width &&
          score < threshold && bunch_draw < config.bunching_fraction)
        score += config.bunching_width;
      const auto& county = county_of_zcta.at(zcta);
      const double value = config.base_level + county_effect.at(county) +
                           config.base_slope * (score - 600) +
                           (score >= threshold ? config.planted_jump : 0.0) +
                           config.limit_noise_sd * std_normal(rng);
      CreditRecord r;
      r.person_id = zone_index * static_cast<std::uint64_t>(config.persons_per_cz) + i + 1;
      r.year = year;
      r.credit_score = score;
      r.total_credit_limit = std::max(0.0, std::sinh(value));
      r.zcta = zcta;
      r.county_fips = county;
      r.commuting_zone = zone;
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<CreditRecord> generate_credit_panel(const WorldConfig& config, int workers) {
  config.validate();
  const auto geo = build_geography(config);
  std::vector<std::vector<CreditRecord>> parts(geo.zones.size());
  parallel_for(parts.size(), workers,
               [&](std::size_t z) { parts[z] = generate_zone_records(config, geo, z, config.years); });
  std::vector<CreditRecord> out;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  out.reserve(total);
  for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(out));
  return out;
}

// --- Elections

ElectionWorld generate_election_panel(std::span<const CreditRecord> credit, const WorldConfig& config) {
  config.validate();
  const auto& dgp = config.votes;
  const auto geo = build_geography(config);
  const auto assigner = make_assigner(geo);
  const auto planted = planted_thresholds(config);

  std::vector<int> years;
  for (int y : config.years)
    if (y % 2 == 0) years.push_back(y);
  std::sort(years.begin(), years.end());

  std::vector<rd::ThresholdEstimate> thresholds;
  for (const auto& [zone, cutoff] : planted)
    for (int y : years)
      thresholds.push_back({zone, y, cutoff, config.planted_jump, 0.0, 0.0, rd::Provenance::Detected, y});

  std::vector<int> bandwidths(std::begin(shares::kStandardBandwidths), std::end(shares::kStandardBandwidths));
  if (std::find(bandwidths.begin(), bandwidths.end(), dgp.share_bandwidth) == bandwidths.end())
    bandwidths.push_back(dgp.share_bandwidth);
  ElectionWorld world;
  world.true_shares = shares::compute_shares(credit, thresholds, assigner, years, bandwidths).records;

  auto rng = make_stream(config.seed, kElectionStream);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Shift-share: zone industry mix and industry import growth per year.
  std::map<std::string, std::map<std::string, double>> mix;
  for (const auto& zone : geo.zones) {
    std::vector<double> raw(static_cast<std::size_t>(config.n_industries));
    double sum = 0.0;
    for (auto& r : raw) sum += (r = -std::log(1.0 - unit(rng)));
    for (std::size_t j = 0; j < raw.size(); ++j) mix[zone][fmt::format("IND{:02d}", j + 1)] = 0.9 * raw[j] / sum;
  }
  std::map<std::string, double> industry_trend;
  for (int j = 0; j < config.n_industries; ++j)
    industry_trend[fmt::format("IND{:02d}", j + 1)] = 0.5 + std_normal(rng);
  std::map<std::pair<std::string, int>, panel::ShiftShareValue> exposure;
  for (int y : years) {
    panel::ShiftShareInputs in;
    in.industry_shares = mix;
    const double cycles = (y - years.front()) / 2.0;
    for (const auto& [industry, trend] : industry_trend) {
      const double other = trend * cycles + 0.5 * std_normal(rng);
      in.other_import_growth[industry] = other;
      in.us_import_growth[industry] = other + 0.2 * std_normal(rng);
    }
    for (const auto& [zone, v] : panel::build_shift_share(in)) exposure[{zone, y}] = v;
    world.shift_share[y] = std::move(in);
  }

  std::map<int, double> year_effect, year_nominate;
  for (int y : years) {
    year_effect[y] = dgp.year_effect_sd * std_normal(rng);
    year_nominate[y] = dgp.year_effect_sd * std_normal(rng);
  }

  struct CellDraw {
    double effect, nominate, white, female, other;
  };
  std::map<std::string, CellDraw> cell_draw;
  for (const auto& cell : geo.cells)
    cell_draw[cell.cell_id] = {dgp.cell_effect_sd * std_normal(rng), 0.3 * std_normal(rng),
                               0.5 + 0.4 * unit(rng), 0.49 + 0.04 * unit(rng),
                               dgp.other_share_max * unit(rng)};

  std::map<std::pair<std::string, int>, const shares::ShareRecord*> share_of;
  for (const auto& s : world.true_shares)
    if (s.bandwidth == dgp.share_bandwidth) share_of[{s.cell_id, s.year}] = &s;

  for (const auto& cell : geo.cells) {
    const auto& draw = cell_draw.at(cell.cell_id);
    for (int y : years) {
      const auto* s = share_of.at({cell.cell_id, y});
      const double white = std::clamp(draw.white + 0.01 * std_normal(rng), 0.0, 1.0);
      const double female = std::clamp(draw.female + 0.005 * std_normal(rng), 0.0, 1.0);
      const auto& zone_exposure = exposure.at({cell.commuting_zone, y});
      const double v = dgp.exposure_noise_sd * std_normal(rng);
      const double cell_exposure = zone_exposure.exposure + v;
      const double share_term =
          !s->share_total ? 0.0
          : dgp.beta_above ? *dgp.beta_above * *s->share_above + *dgp.beta_below * *s->share_below
                           : dgp.beta_share * *s->share_total;
      double rep = 0.46 + draw.effect + year_effect.at(y) + share_term + dgp.gamma_white * (white - 0.7) +
                   dgp.gamma_female * (female - 0.51) + dgp.gamma_china * cell_exposure +
                   dgp.confounding * v + dgp.noise_sd * std_normal(rng);
      rep = std::clamp(rep, 0.01, 0.99 - draw.other);
      const double dem = 1.0 - rep - draw.other;
      const double nominate = std::clamp(
          draw.nominate + year_nominate.at(y) +
              dgp.beta_nominate * (s->share_total ? *s->share_total : 0.0) +
              dgp.nominate_noise_sd * std_normal(rng),
          -1.0, 1.0);

      const double total = std::max(1.0, 0.5 * static_cast<double>(s->cell_population));
      panel::ElectionRecord e;
      e.cell_id = cell.cell_id;
      e.year = y;
      e.votes_rep = rep * total;
      e.votes_dem = dem * total;
      e.votes_other = draw.other * total;
      if (dgp.round_votes) {
        e.votes_rep = std::round(e.votes_rep);
        e.votes_dem = std::round(e.votes_dem);
        e.votes_other = std::round(e.votes_other);
      }
      e.winner = rep > dem ? panel::Party::Republican : panel::Party::Democrat;
      e.nominate = nominate;
      world.elections.push_back(std::move(e));

      panel::ControlRecord c;
      c.cell_id = cell.cell_id;
      c.year = y;
      c.share_white = white;
      c.share_female = female;
      c.exposure = cell_exposure;
      c.instrument = zone_exposure.instrument;
      c.population = static_cast<double>(s->cell_population);
      world.controls.push_back(std::move(c));
    }
  }
  return world;
}

}  // namespace creditvote::lab
