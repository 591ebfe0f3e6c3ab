#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "creditvote/kernel/absorb.hpp"
#include "creditvote/kernel/regression.hpp"
#include "creditvote/shares/shares.hpp"

namespace creditvote::panel {

enum class Party { Republican, Democrat, Other };
std::string_view to_string(Party p);
Party party_from_string(std::string_view s);

struct ElectionRecord {
  std::string cell_id;
  int year = 0;
  double votes_rep = 0.0;
  double votes_dem = 0.0;
  double votes_other = 0.0;
  Party winner = Party::Other;
  std::optional<double> nominate;  // winner's first DW-NOMINATE dimension
};

struct ControlRecord {
  std::string cell_id;
  int year = 0;
  double share_white = 0.0;
  double share_female = 0.0;
  double exposure = 0.0;    // US import exposure
  double instrument = 0.0;  // comparison-country shift-share instrument
  double population = 0.0;
};

struct ShareTriple {
  double total = 0.0;
  double above = 0.0;
  double below = 0.0;
};

struct PanelRow {
  std::string cell_id;
  std::string state;
  int year = 0;
  // Party votes over all votes cast, third parties included; empty when no
  // votes were recorded.
  std::optional<double> rep_share;
  std::optional<double> dem_share;
  std::optional<double> nominate;
  Party winner = Party::Other;
  std::map<int, ShareTriple> shares;  // by bandwidth
  double share_white = 0.0;
  double share_female = 0.0;
  double exposure = 0.0;
  double instrument = 0.0;
  double weight = 0.0;  // scored individuals in the cell-year
  std::map<std::string, double> extra_controls;
};

struct PanelAssembly {
  std::vector<PanelRow> rows;  // sorted by (cell, year)
  std::vector<std::string> log;
};

// Joins shares, elections and controls on (cell, year). Cell-years with null
// shares, zero population or a missing election/control row are dropped and
// logged.
PanelAssembly assemble_panel(std::span<const shares::ShareRecord> shares,
                             std::span<const ElectionRecord> elections,
                             std::span<const ControlRecord> controls);

enum class Outcome { RepShare, DemShare, Nominate };
enum class Subset { All, RepWinning, DemWinning };
enum class Specification { Pooled, AboveBelow };

std::string_view to_string(Outcome o);
std::string_view to_string(Subset s);
std::string_view to_string(Specification s);
Outcome outcome_from_string(std::string_view s);
Subset subset_from_string(std::string_view s);
Specification specification_from_string(std::string_view s);

struct EstimationOptions {
  bool instrument_exposure = true;
  bool absorb_state_year = false;
  kernel::CovarianceType covariance = kernel::CovarianceType::CR1;
  kernel::AbsorbOptions absorb;
};

struct PanelEstimate {
  Outcome outcome = Outcome::RepShare;
  Subset subset = Subset::All;
  Specification specification = Specification::Pooled;
  int bandwidth = 15;
  bool instrumented = true;
  kernel::RegressionResult result;
  double dep_var_mean = 0.0;  // weighted
  double total_weight = 0.0;  // individuals behind the cell-years
  std::optional<kernel::WaldTest> above_equals_below;
  std::vector<std::string> omitted;  // controls absorbed by the fixed effects
  std::vector<int> years;
  std::size_t cells = 0;
};

// Outcome on threshold shares, demographic controls and the (instrumented)
// import exposure, with cell and year effects absorbed, population weights,
// and cell-clustered CR1 errors. Cell effects are nested in the clusters and
// do not count against the residual degrees of freedom.
PanelEstimate estimate(std::span<const PanelRow> panel, Outcome outcome, Subset subset,
                       Specification specification, int bandwidth,
                       const EstimationOptions& options = {});

PanelEstimate estimate_baseline(std::span<const PanelRow> panel, Outcome outcome, int bandwidth,
                                const EstimationOptions& options = {});
PanelEstimate estimate_above_below(std::span<const PanelRow> panel, Outcome outcome, int bandwidth,
                                   const EstimationOptions& options = {});
PanelEstimate estimate_nominate(std::span<const PanelRow> panel, Subset subset, int bandwidth,
                                Specification specification = Specification::Pooled,
                                const EstimationOptions& options = {});

std::vector<PanelRow> restrict_years(std::span<const PanelRow> panel, std::span<const int> years);
// Elections 2012, 2014 and 2016, drawn under unchanged district maps.
std::vector<PanelRow> gerrymander_window(std::span<const PanelRow> panel);

// One estimate per bandwidth, in the order given.
std::vector<PanelEstimate> bandwidth_sweep(std::span<const PanelRow> panel, Outcome outcome,
                                           Subset subset, Specification specification,
                                           std::span<const int> bandwidths,
                                           const EstimationOptions& options = {}, int workers = 1);

}  // namespace creditvote::panel
