#include "creditvote/panel/panel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "creditvote/errors.hpp"
#include "creditvote/kernel/tsls.hpp"
#include "creditvote/parallel.hpp"

namespace creditvote::panel {

namespace {

// A column whose weighted RMS after absorption is this small relative to its
// scale before absorption is treated as absorbed by the fixed effects.
constexpr double kAbsorbedTolerance = 1e-9;

bool in_subset(const PanelRow& row, Subset subset) {
  switch (subset) {
    case Subset::All: return true;
    case Subset::RepWinning: return row.winner == Party::Republican;
    case Subset::DemWinning: return row.winner == Party::Democrat;
  }
  return false;
}

std::optional<double> outcome_value(const PanelRow& row, Outcome outcome) {
  switch (outcome) {
    case Outcome::RepShare: return row.rep_share;
    case Outcome::DemShare: return row.dem_share;
    case Outcome::Nominate: return row.nominate;
  }
  return std::nullopt;
}

double weighted_rms(const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  return std::sqrt((w.array() * v.array().square()).sum() / w.sum());
}

}  // namespace

// --- Enum names

std::string_view to_string(Party p) {
  switch (p) {
    case Party::Republican: return "R";
    case Party::Democrat: return "D";
    case Party::Other: return "other";
  }
  return "other";
}

Party party_from_string(std::string_view s) {
  if (s == "R") return Party::Republican;
  if (s == "D") return Party::Democrat;
  if (s == "other" || s == "O" || s.empty()) return Party::Other;
  throw DataError(fmt::format("unknown winner party '{}'", s));
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::RepShare: return "rep";
    case Outcome::DemShare: return "dem";
    case Outcome::Nominate: return "nominate";
  }
  return "rep";
}

std::string_view to_string(Subset s) {
  switch (s) {
    case Subset::All: return "all";
    case Subset::RepWinning: return "rep_winning";
    case Subset::DemWinning: return "dem_winning";
  }
  return "all";
}

std::string_view to_string(Specification s) {
  return s == Specification::Pooled ? "pooled" : "above_below";
}

Outcome outcome_from_string(std::string_view s) {
  if (s == "rep") return Outcome::RepShare;
  if (s == "dem") return Outcome::DemShare;
  if (s == "nominate") return Outcome::Nominate;
  throw ConfigError(fmt::format("unknown outcome '{}'", s));
}

Subset subset_from_string(std::string_view s) {
  if (s == "all") return Subset::All;
  if (s == "rep_winning") return Subset::RepWinning;
  if (s == "dem_winning") return Subset::DemWinning;
  throw ConfigError(fmt::format("unknown subset '{}'", s));
}

Specification specification_from_string(std::string_view s) {
  if (s == "pooled") return Specification::Pooled;
  if (s == "above_below") return Specification::AboveBelow;
  throw ConfigError(fmt::format("unknown specification '{}'", s));
}

// --- Assembly

PanelAssembly assemble_panel(std::span<const shares::ShareRecord> shares,
                             std::span<const ElectionRecord> elections,
                             std::span<const ControlRecord> controls) {
  using Key = std::pair<std::string, int>;
  std::map<Key, const ElectionRecord*> election_of;
  for (const auto& e : elections) election_of[{e.cell_id, e.year}] = &e;
  std::map<Key, const ControlRecord*> control_of;
  for (const auto& c : controls) control_of[{c.cell_id, c.year}] = &c;

  std::map<Key, std::vector<const shares::ShareRecord*>> share_of;
  for (const auto& s : shares) share_of[{s.cell_id, s.year}].push_back(&s);

  PanelAssembly out;
  for (const auto& [key, records] : share_of) {
    const auto& [cell, year] = key;
    const bool has_null = std::any_of(records.begin(), records.end(),
                                      [](const auto* r) { return !r->share_total; });
    if (has_null) {
      out.log.push_back(fmt::format("{} {}: no threshold shares", cell, year));
      continue;
    }
    if (records.front()->cell_population == 0) {
      out.log.push_back(fmt::format("{} {}: no scored individuals", cell, year));
      continue;
    }
    auto e = election_of.find(key);
    auto c = control_of.find(key);
    if (e == election_of.end() || c == control_of.end()) {
      out.log.push_back(fmt::format("{} {}: missing {}", cell, year,
                                    e == election_of.end() ? "election record" : "control record"));
      continue;
    }
    PanelRow row;
    row.cell_id = cell;
    row.year = year;
    row.state = cell.substr(0, 2);
    const auto& er = *e->second;
    const double total_votes = er.votes_rep + er.votes_dem + er.votes_other;
    if (total_votes > 0.0) {
      row.rep_share = er.votes_rep / total_votes;
      row.dem_share = er.votes_dem / total_votes;
    }
    row.nominate = er.nominate;
    row.winner = er.winner;
    for (const auto* r : records) row.shares[r->bandwidth] = {*r->share_total, *r->share_above, *r->share_below};
    const auto& cr = *c->second;
    row.share_white = cr.share_white;
    row.share_female = cr.share_female;
    row.exposure = cr.exposure;
    row.instrument = cr.instrument;
    row.weight = static_cast<double>(records.front()->cell_population);
    out.rows.push_back(std::move(row));
  }
  return out;
}

// --- Estimation

PanelEstimate estimate(std::span<const PanelRow> panel, Outcome outcome, Subset subset,
                       Specification specification, int bandwidth,
                       const EstimationOptions& options) {
  std::vector<const PanelRow*> rows;
  for (const auto& r : panel) {
    if (!in_subset(r, subset) || r.weight <= 0.0) continue;
    if (!outcome_value(r, outcome) || !r.shares.contains(bandwidth)) continue;
    rows.push_back(&r);
  }
  if (rows.empty())
    throw EmptySampleError(fmt::format("no panel rows for outcome {} / subset {} at bandwidth {}",
                                       to_string(outcome), to_string(subset), bandwidth));

  std::set<std::string> cells;
  std::set<int> years;
  for (const auto* r : rows) {
    cells.insert(r->cell_id);
    years.insert(r->year);
  }
  if (cells.size() < 2 || years.size() < 2)
    throw EstimationError(fmt::format("panel needs at least 2 cells and 2 years, got {} and {}",
                                      cells.size(), years.size()));

  std::vector<std::string> share_names =
      specification == Specification::Pooled ? std::vector<std::string>{"share_total"}
                                             : std::vector<std::string>{"share_above", "share_below"};
  std::vector<std::string> control_names{"share_white", "share_female"};
  for (const auto& [name, value] : rows.front()->extra_controls) control_names.push_back(name);

  const auto n = static_cast<kernel::Index>(rows.size());
  const auto n_share = static_cast<kernel::Index>(share_names.size());
  const auto n_control = static_cast<kernel::Index>(control_names.size());
  // Columns: y | shares | controls | exposure | instrument
  Eigen::MatrixXd data(n, 1 + n_share + n_control + 2);
  Eigen::VectorXd w(n);
  std::vector<std::string> cell_labels, state_year_labels;
  std::vector<long long> year_labels;
  for (kernel::Index i = 0; i < n; ++i) {
    const auto& r = *rows[static_cast<std::size_t>(i)];
    const auto& s = r.shares.at(bandwidth);
    data(i, 0) = *outcome_value(r, outcome);
    if (specification == Specification::Pooled) {
      data(i, 1) = s.total;
    } else {
      data(i, 1) = s.above;
      data(i, 2) = s.below;
    }
    data(i, 1 + n_share) = r.share_white;
    data(i, 2 + n_share) = r.share_female;
    for (kernel::Index c = 2; c < n_control; ++c) {
      auto it = r.extra_controls.find(control_names[static_cast<std::size_t>(c)]);
      if (it == r.extra_controls.end())
        throw DataError(fmt::format("row {} {} lacks control {}", r.cell_id, r.year,
                                    control_names[static_cast<std::size_t>(c)]));
      data(i, 1 + n_share + c) = it->second;
    }
    data(i, 1 + n_share + n_control) = r.exposure;
    data(i, 2 + n_share + n_control) = r.instrument;
    w(i) = r.weight;
    cell_labels.push_back(r.cell_id);
    year_labels.push_back(r.year);
    if (options.absorb_state_year) state_year_labels.push_back(fmt::format("{}:{}", r.state, r.year));
  }
  if (!data.allFinite()) throw DataError("panel contains non-finite values");

  for (kernel::Index j = 1; j <= n_share; ++j) {
    const auto col = data.col(j);
    if ((col.array() == col(0)).all())
      throw RankError(fmt::format("{} is constant; its coefficient is not identified",
                                  share_names[static_cast<std::size_t>(j - 1)]),
                      {share_names[static_cast<std::size_t>(j - 1)]});
  }

  const double y_mean = w.dot(data.col(0)) / w.sum();
  const double tss = kernel::detail::weighted_total_ss(data.col(0), w);
  Eigen::VectorXd scale(data.cols());
  for (kernel::Index j = 0; j < data.cols(); ++j) {
    const double m = w.dot(data.col(j)) / w.sum();
    scale(j) = weighted_rms((data.col(j).array() - m).matrix(), w);
  }

  kernel::GroupLabels groups;
  groups.add_dimension(std::span<const std::string>(cell_labels));
  groups.add_dimension(std::span<const long long>(year_labels));
  if (options.absorb_state_year) groups.add_dimension(std::span<const std::string>(state_year_labels));
  const auto info = kernel::demean_columns(data, w, groups, options.absorb);

  auto absorbed = [&](kernel::Index j) {
    return weighted_rms(data.col(j), w) <= kAbsorbedTolerance * std::max(scale(j), 1e-300) ||
           scale(j) == 0.0;
  };

  PanelEstimate est;
  est.outcome = outcome;
  est.subset = subset;
  est.specification = specification;
  est.bandwidth = bandwidth;
  est.dep_var_mean = y_mean;
  est.total_weight = w.sum();
  est.years.assign(years.begin(), years.end());
  est.cells = cells.size();

  for (kernel::Index j = 1; j <= n_share; ++j)
    if (absorbed(j))
      throw RankError(fmt::format("{} is absorbed by the fixed effects",
                                  share_names[static_cast<std::size_t>(j - 1)]),
                      {share_names[static_cast<std::size_t>(j - 1)]});

  std::vector<kernel::Index> exog_cols;
  std::vector<std::string> exog_names;
  for (kernel::Index j = 1; j <= n_share; ++j) {
    exog_cols.push_back(j);
    exog_names.push_back(share_names[static_cast<std::size_t>(j - 1)]);
  }
  for (kernel::Index c = 0; c < n_control; ++c) {
    const auto& name = control_names[static_cast<std::size_t>(c)];
    if (absorbed(1 + n_share + c)) {
      est.omitted.push_back(name);
      continue;
    }
    exog_cols.push_back(1 + n_share + c);
    exog_names.push_back(name);
  }
  const kernel::Index exposure_col = 1 + n_share + n_control;
  const kernel::Index instrument_col = exposure_col + 1;
  const bool exposure_absorbed = absorbed(exposure_col);
  if (exposure_absorbed) est.omitted.emplace_back("china_exposure");
  const bool use_iv = options.instrument_exposure && !exposure_absorbed;
  if (!options.instrument_exposure && !exposure_absorbed) {
    exog_cols.push_back(exposure_col);
    exog_names.emplace_back("china_exposure");
  }
  if (use_iv && absorbed(instrument_col))
    throw IdentificationError("the import-exposure instrument is absorbed by the fixed effects");

  kernel::FitOptions fit;
  fit.covariance = options.covariance;
  fit.total_sum_squares = tss;
  const auto clusters = kernel::ClusterSpec::from_labels(std::span<const std::string>(cell_labels));
  if (options.covariance == kernel::CovarianceType::CR1) {
    fit.clusters = clusters;
    for (std::size_t d = 0; d < groups.dimensions(); ++d)
      if (!kernel::nested_in_clusters(groups, d, clusters)) fit.absorbed_dof += info.dof_per_dimension[d];
  } else {
    fit.absorbed_dof = info.absorbed_dof;
  }

  kernel::IvDesign design;
  design.exogenous.names = exog_names;
  design.exogenous.values = data(Eigen::all, exog_cols);
  design.exogenous.weights = w;
  if (use_iv) {
    design.endogenous = data.col(exposure_col);
    design.endogenous_names = {"china_exposure"};
    design.instruments = data.col(instrument_col);
    design.instrument_names = {"china_instrument"};
  } else {
    design.endogenous.resize(n, 0);
    design.instruments.resize(n, 0);
  }
  est.instrumented = use_iv;
  est.result = kernel::tsls_fit(data.col(0), design, fit);
  if (specification == Specification::AboveBelow)
    est.above_equals_below = kernel::wald_equal(est.result, "share_above", "share_below");
  return est;
}

PanelEstimate estimate_baseline(std::span<const PanelRow> panel, Outcome outcome, int bandwidth,
                                const EstimationOptions& options) {
  return estimate(panel, outcome, Subset::All, Specification::Pooled, bandwidth, options);
}

PanelEstimate estimate_above_below(std::span<const PanelRow> panel, Outcome outcome, int bandwidth,
                                   const EstimationOptions& options) {
  return estimate(panel, outcome, Subset::All, Specification::AboveBelow, bandwidth, options);
}

PanelEstimate estimate_nominate(std::span<const PanelRow> panel, Subset subset, int bandwidth,
                                Specification specification, const EstimationOptions& options) {
  return estimate(panel, Outcome::Nominate, subset, specification, bandwidth, options);
}

std::vector<PanelRow> restrict_years(std::span<const PanelRow> panel, std::span<const int> years) {
  std::vector<PanelRow> out;
  for (const auto& r : panel)
    if (std::find(years.begin(), years.end(), r.year) != years.end()) out.push_back(r);
  return out;
}

std::vector<PanelRow> gerrymander_window(std::span<const PanelRow> panel) {
  static constexpr int kYears[] = {2012, 2014, 2016};
  return restrict_years(panel, kYears);
}

std::vector<PanelEstimate> bandwidth_sweep(std::span<const PanelRow> panel, Outcome outcome,
                                           Subset subset, Specification specification,
                                           std::span<const int> bandwidths,
                                           const EstimationOptions& options, int workers) {
  std::vector<PanelEstimate> out(bandwidths.size());
  parallel_for(bandwidths.size(), workers, [&](std::size_t i) {
    out[i] = estimate(panel, outcome, subset, specification, bandwidths[i], options);
  });
  return out;
}

}  // namespace creditvote::panel
