#include "creditvote/rd/scanner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "creditvote/errors.hpp"
#include "creditvote/kernel/absorb.hpp"
#include "creditvote/parallel.hpp"

namespace creditvote::rd {

namespace {

// Centred scores are divided by this before taking powers.
constexpr double kScoreScale = 50.0;

// Window-restricted rows of one zone-year with outcome and county codes
// computed once for all candidate cutoffs.
struct PreparedSample {
  std::vector<int> score;
  std::vector<double> outcome;
  std::vector<long long> county;
};

PreparedSample prepare(std::span<const CreditRecord> records, const RdConfig& config) {
  PreparedSample sample;
  std::unordered_map<std::string_view, long long> county_codes;
  const int lo = config.window_low();
  const int hi = config.window_high();
  for (const auto& r : records) {
    if (r.credit_score < lo || r.credit_score > hi) continue;
    sample.score.push_back(r.credit_score);
    sample.outcome.push_back(asinh_transform(r.total_credit_limit));
    auto [it, inserted] =
        county_codes.try_emplace(r.county_fips, static_cast<long long>(county_codes.size()));
    sample.county.push_back(it->second);
  }
  return sample;
}

ScanSkip make_skip(const ZoneYear& key, std::optional<int> cutoff, SkipReason reason,
                   std::size_t n, std::string detail) {
  return ScanSkip{key.commuting_zone, key.year, cutoff, reason, n, std::move(detail)};
}

CutoffFit fit_prepared(const PreparedSample& sample, int cutoff, const RdConfig& config,
                       const ZoneYear& key) {
  std::vector<kernel::Index> rows;
  rows.reserve(sample.score.size());
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  for (std::size_t i = 0; i < sample.score.size(); ++i) {
    if (config.window_halfwidth && std::abs(sample.score[i] - cutoff) > *config.window_halfwidth)
      continue;
    rows.push_back(static_cast<kernel::Index>(i));
    (sample.score[i] >= cutoff ? n_right : n_left) += 1;
  }
  const std::size_t n = rows.size();
  if (n < config.min_observations)
    return make_skip(key, cutoff, SkipReason::InsufficientObservations, n,
                     fmt::format("{} observations in window, need at least {}", n,
                                 config.min_observations));
  if (n_left == 0 || n_right == 0)
    return make_skip(key, cutoff, SkipReason::NoSupportOnOneSide, n,
                     fmt::format("{} left / {} right of cutoff", n_left, n_right));

  const int p = config.polynomial_degree;
  const int k = 1 + p + (config.side_specific_polynomial ? p : 0);
  kernel::DesignMatrix x;
  x.names.reserve(static_cast<std::size_t>(k));
  x.names.emplace_back("jump");
  for (int j = 1; j <= p; ++j) x.names.push_back(fmt::format("poly{}", j));
  if (config.side_specific_polynomial)
    for (int j = 1; j <= p; ++j) x.names.push_back(fmt::format("jump_x_poly{}", j));
  x.values.resize(static_cast<kernel::Index>(n), k);
  x.weights = Eigen::VectorXd::Ones(static_cast<kernel::Index>(n));
  Eigen::VectorXd y(static_cast<kernel::Index>(n));
  std::vector<long long> county(n);

  for (std::size_t r = 0; r < n; ++r) {
    const auto i = static_cast<std::size_t>(rows[r]);
    const auto row = static_cast<kernel::Index>(r);
    const double u = (sample.score[i] - cutoff) / kScoreScale;
    const double d = sample.score[i] >= cutoff ? 1.0 : 0.0;
    x.values(row, 0) = d;
    double power = 1.0;
    for (int j = 1; j <= p; ++j) {
      power *= u;
      x.values(row, j) = power;
      if (config.side_specific_polynomial) x.values(row, p + j) = d * power;
    }
    y(row) = sample.outcome[i];
    county[r] = sample.county[i];
  }

  kernel::GroupLabels groups;
  groups.add_dimension(std::span<const long long>(county));
  const auto absorbed = kernel::absorb_fixed_effects(x, y, groups);

  kernel::FitOptions options;
  options.covariance = config.covariance;
  options.absorbed_dof = absorbed.absorbed_dof;
  if (config.covariance == kernel::CovarianceType::CR1) {
    options.clusters = kernel::ClusterSpec::from_labels(std::span<const long long>(county));
    options.absorbed_dof = 0;  // county effects are nested in county clusters
  }

  try {
    const auto fit = kernel::wls_fit(absorbed.x, absorbed.y, options);
    CutoffEstimate est;
    est.commuting_zone = key.commuting_zone;
    est.year = key.year;
    est.cutoff = cutoff;
    est.alpha = fit.coefficients(0);
    est.se = fit.standard_errors(0);
    est.t_stat = est.se > 0.0 ? est.alpha / est.se : 0.0;
    est.n_left = n_left;
    est.n_right = n_right;
    return est;
  } catch (const RankError& e) {
    return make_skip(key, cutoff, SkipReason::RankDeficient, n, e.what());
  } catch (const TooFewClustersError& e) {
    return make_skip(key, cutoff, SkipReason::InsufficientObservations, n, e.what());
  }
}

}  // namespace

// --- Configuration

std::vector<int> RdConfig::default_grid() {
  std::vector<int> grid;
  for (int c = 560; c <= 660; c += 5) grid.push_back(c);
  return grid;
}

void RdConfig::validate() const {
  if (cutoff_grid.empty()) throw ConfigError("cutoff grid is empty");
  if (!std::is_sorted(cutoff_grid.begin(), cutoff_grid.end()) ||
      std::adjacent_find(cutoff_grid.begin(), cutoff_grid.end()) != cutoff_grid.end())
    throw ConfigError("cutoff grid must be strictly increasing");
  if (cutoff_grid.front() < 560 || cutoff_grid.back() > 660)
    throw ConfigError(fmt::format("cutoff grid [{}, {}] leaves [560, 660]", cutoff_grid.front(),
                                  cutoff_grid.back()));
  if (polynomial_degree < 1) throw ConfigError("polynomial degree must be at least 1");
  if (min_observations < static_cast<std::size_t>(2 * polynomial_degree + 2))
    throw ConfigError(fmt::format("min_observations must be at least {}", 2 * polynomial_degree + 2));
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw ConfigError("alpha_level must be in (0, 1)");
  if (window_margin < 0) throw ConfigError("window_margin must be nonnegative");
  if (window_halfwidth && *window_halfwidth < 1) throw ConfigError("window_halfwidth must be positive");
}

double RdConfig::critical_value() const { return kernel::normal_critical(alpha_level); }
int RdConfig::window_low() const { return cutoff_grid.front() - window_margin; }
int RdConfig::window_high() const { return cutoff_grid.back() + window_margin; }

std::string_view to_string(SkipReason reason) {
  switch (reason) {
    case SkipReason::InsufficientObservations: return "insufficient_observations";
    case SkipReason::NoSupportOnOneSide: return "no_support_on_one_side";
    case SkipReason::RankDeficient: return "rank_deficient";
  }
  return "unknown";
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Detected: return "detected";
    case Provenance::ImputedForward: return "imputed_forward";
    case Provenance::ImputedBackward: return "imputed_backward";
  }
  return "unknown";
}

Provenance provenance_from_string(std::string_view name) {
  if (name == "detected") return Provenance::Detected;
  if (name == "imputed_forward") return Provenance::ImputedForward;
  if (name == "imputed_backward") return Provenance::ImputedBackward;
  throw DataError(fmt::format("unknown threshold provenance '{}'", name));
}

// --- Operations

double asinh_transform(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("asinh_transform: non-finite input");
  return std::asinh(v);
}

CutoffFit fit_rd_at_cutoff(std::span<const CreditRecord> records, int cutoff,
                           const RdConfig& config, const ZoneYear& key) {
  return fit_prepared(prepare(records, config), cutoff, config, key);
}

ScanResult scan_cutoffs(std::span<const CreditRecord> records, const RdConfig& config,
                        const ZoneYear& key) {
  ScanResult result;
  if (records.size() < config.min_observations) {
    result.skips.push_back(make_skip(
        key, std::nullopt, SkipReason::InsufficientObservations, records.size(),
        fmt::format("{} observations; zones need at least {} (more than 500 observations rule)",
                    records.size(), config.min_observations)));
    return result;
  }
  const auto sample = prepare(records, config);
  for (int cutoff : config.cutoff_grid) {
    auto fit = fit_prepared(sample, cutoff, config, key);
    if (auto* est = std::get_if<CutoffEstimate>(&fit)) result.estimates.push_back(std::move(*est));
    else result.skips.push_back(std::get<ScanSkip>(std::move(fit)));
  }
  return result;
}

std::vector<CutoffEstimate> suppress_contiguous(std::span<const CutoffEstimate> estimates,
                                                const RdConfig& config) {
  const double crit = config.critical_value();
  auto significant = [&](const CutoffEstimate& e) { return e.alpha > 0.0 && e.t_stat > crit; };
  std::vector<CutoffEstimate> kept;
  for (const auto& e : estimates) {
    const bool dominated = std::any_of(estimates.begin(), estimates.end(), [&](const auto& other) {
      return &other != &e && significant(other) && std::abs(other.cutoff - e.cutoff) <= config.contiguity_points &&
             (other.alpha > e.alpha || (other.alpha == e.alpha && other.cutoff < e.cutoff));
    });
    if (!dominated) kept.push_back(e);
  }
  return kept;
}

std::optional<ThresholdEstimate> select_threshold(std::span<const CutoffEstimate> estimates,
                                                  const RdConfig& config) {
  const double crit = config.critical_value();
  const auto candidates = suppress_contiguous(estimates, config);
  const CutoffEstimate* best = nullptr;
  for (const auto& e : candidates) {
    if (!(e.alpha > 0.0 && e.t_stat > crit)) continue;
    if (!best || e.alpha > best->alpha || (e.alpha == best->alpha && e.cutoff < best->cutoff))
      best = &e;
  }
  if (!best) return std::nullopt;
  return ThresholdEstimate{best->commuting_zone, best->year, best->cutoff, best->alpha,
                           best->se,             best->t_stat, Provenance::Detected, best->year};
}

std::optional<std::map<int, ThresholdEstimate>> impute_thresholds(const ThresholdSeries& series) {
  const auto first = std::find_if(series.begin(), series.end(),
                                  [](const auto& kv) { return kv.second.has_value(); });
  if (first == series.end()) return std::nullopt;

  std::map<int, ThresholdEstimate> completed;
  const ThresholdEstimate* latest = &*first->second;
  for (const auto& [year, detected] : series) {
    if (detected) {
      latest = &*detected;
      completed.emplace(year, *detected);
      continue;
    }
    ThresholdEstimate filled = *latest;
    filled.provenance = year < first->first ? Provenance::ImputedBackward : Provenance::ImputedForward;
    filled.source_year = latest->year;
    filled.year = year;
    completed.emplace(year, std::move(filled));
  }
  return completed;
}

std::optional<int> estimation_year(int year, std::span<const int> election_years,
                                   bool pool_non_election_years) {
  auto is_election = [&](int y) {
    return std::find(election_years.begin(), election_years.end(), y) != election_years.end();
  };
  if (is_election(year)) return year;
  if (pool_non_election_years && is_election(year + 1)) return year + 1;
  return std::nullopt;
}

PanelScan scan_panel(std::span<const CreditRecord> records, const RdConfig& config,
                     std::span<const int> election_years, int workers) {
  config.validate();
  std::map<ZoneYear, std::vector<CreditRecord>> buckets;
  std::map<std::string, int> zones;
  for (const auto& r : records) {
    zones.emplace(r.commuting_zone, 0);
    if (auto y = estimation_year(r.year, election_years, config.pool_non_election_years))
      buckets[ZoneYear{r.commuting_zone, *y}].push_back(r);
  }
  // Every zone seen anywhere is scanned in every election year, so empty
  // zone-years leave a skip record.
  for (const auto& [zone, unused] : zones)
    for (int y : election_years) buckets.try_emplace(ZoneYear{zone, y});

  std::vector<const std::pair<const ZoneYear, std::vector<CreditRecord>>*> tasks;
  for (const auto& kv : buckets) tasks.push_back(&kv);
  std::vector<ZoneYearScan> scans(tasks.size());
  std::vector<std::vector<ScanSkip>> skips(tasks.size());

  parallel_for(tasks.size(), workers, [&](std::size_t i) {
    const auto& [key, rows] = *tasks[i];
    auto result = scan_cutoffs(rows, config, key);
    scans[i].key = key;
    scans[i].observations = rows.size();
    scans[i].selected = select_threshold(result.estimates, config);
    scans[i].estimates = std::move(result.estimates);
    skips[i] = std::move(result.skips);
  });

  PanelScan out;
  std::map<std::string, ThresholdSeries> series;
  for (std::size_t i = 0; i < scans.size(); ++i) {
    out.regressions += scans[i].estimates.size();
    series[scans[i].key.commuting_zone][scans[i].key.year] = scans[i].selected;
    out.skips.insert(out.skips.end(), skips[i].begin(), skips[i].end());
  }
  out.zone_years = std::move(scans);
  for (const auto& [zone, s] : series) {
    auto completed = impute_thresholds(s);
    if (!completed) {
      out.dropped_zones.push_back(zone);
      continue;
    }
    for (auto& [year, t] : *completed) out.thresholds.push_back(std::move(t));
  }
  return out;
}

}  // namespace creditvote::rd
