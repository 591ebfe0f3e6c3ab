#include "creditvote/panel/tables.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "creditvote/kernel/result_json.hpp"

namespace creditvote::panel {

namespace {

constexpr int kLabelWidth = 28;
constexpr int kColumnWidth = 17;

std::string rule(std::size_t columns) {
  return std::string(kLabelWidth + kColumnWidth * columns, '-') + "\n";
}

// Union of term names in first-seen order.
std::vector<std::string> term_rows(std::span<const PanelEstimate> columns) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : columns)
    for (const auto& n : e.result.names)
      if (seen.insert(n).second) out.push_back(n);
  return out;
}

std::string coef_cell(const PanelEstimate& e, const std::string& term) {
  const auto& names = e.result.names;
  if (std::find(names.begin(), names.end(), term) == names.end()) return "";
  return fmt::format("{:.3f}{}", e.result.coef(term), stars(e.result.p_value(term)));
}

std::string se_cell(const PanelEstimate& e, const std::string& term) {
  const auto& names = e.result.names;
  if (std::find(names.begin(), names.end(), term) == names.end()) return "";
  return fmt::format("({:.3f})", e.result.se(term));
}

}  // namespace

std::string stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

std::string term_label(std::string_view name) {
  static const std::map<std::string_view, std::string_view> labels{
      {"share_total", "Share close thresh."},
      {"share_above", "Share close thresh. Above"},
      {"share_below", "Share close thresh. Below"},
      {"china_exposure", "Share China Import"},
      {"share_white", "Share White"},
      {"share_female", "Share Female (voting age)"},
  };
  auto it = labels.find(name);
  return std::string(it == labels.end() ? name : it->second);
}

std::string column_label(const PanelEstimate& e) {
  std::string base = e.outcome == Outcome::RepShare   ? "Rep share"
                     : e.outcome == Outcome::DemShare ? "Dem share"
                                                      : "NOMINATE";
  if (e.subset == Subset::RepWinning) base += " (R win)";
  if (e.subset == Subset::DemWinning) base += " (D win)";
  return base;
}

std::string format_regression_table(std::span<const PanelEstimate> columns,
                                    std::string_view title) {
  std::string out = fmt::format("{}\n", title);
  out += rule(columns.size());
  out += fmt::format("{:<{}}", "", kLabelWidth);
  for (std::size_t i = 0; i < columns.size(); ++i)
    out += fmt::format("{:>{}}", fmt::format("({})", i + 1), kColumnWidth);
  out += "\n";
  out += fmt::format("{:<{}}", "", kLabelWidth);
  for (const auto& e : columns) out += fmt::format("{:>{}}", column_label(e), kColumnWidth);
  out += "\n" + rule(columns.size());

  for (const auto& term : term_rows(columns)) {
    out += fmt::format("{:<{}}", term_label(term), kLabelWidth);
    for (const auto& e : columns) out += fmt::format("{:>{}}", coef_cell(e, term), kColumnWidth);
    out += "\n";
    out += fmt::format("{:<{}}", "", kLabelWidth);
    for (const auto& e : columns) out += fmt::format("{:>{}}", se_cell(e, term), kColumnWidth);
    out += "\n";
  }
  out += rule(columns.size());

  auto line = [&](std::string_view label, auto cell) {
    out += fmt::format("{:<{}}", label, kLabelWidth);
    for (const auto& e : columns) out += fmt::format("{:>{}}", cell(e), kColumnWidth);
    out += "\n";
  };
  line("Cell-years", [](const PanelEstimate& e) { return fmt::format("{}", e.result.n_obs); });
  line("Individuals", [](const PanelEstimate& e) { return fmt::format("{:.0f}", e.total_weight); });
  line("Clusters", [](const PanelEstimate& e) { return fmt::format("{}", e.result.n_clusters); });
  line("R-squared", [](const PanelEstimate& e) { return fmt::format("{:.3f}", e.result.r_squared); });
  line("Mean of dep. var.", [](const PanelEstimate& e) { return fmt::format("{:.3f}", e.dep_var_mean); });
  line("Bandwidth", [](const PanelEstimate& e) { return fmt::format("{}", e.bandwidth); });
  const bool any_wald = std::any_of(columns.begin(), columns.end(),
                                    [](const auto& e) { return e.above_equals_below.has_value(); });
  if (any_wald)
    line("p (above = below)", [](const PanelEstimate& e) {
      return e.above_equals_below ? fmt::format("{:.3f}", e.above_equals_below->p_value) : std::string();
    });
  line("First-stage F", [](const PanelEstimate& e) {
    auto it = e.result.diagnostics.find("first_stage_F");
    return it == e.result.diagnostics.end() ? std::string("-") : fmt::format("{:.1f}", it->second);
  });
  out += rule(columns.size());
  out += "Cell and year fixed effects. Population weights. CR1 SE clustered by cell.\n";
  out += "*** p<0.01, ** p<0.05, * p<0.1\n";
  return out;
}

std::string format_sweep_table(std::span<const PanelEstimate> sweep, std::string_view title) {
  std::string out = fmt::format("{}\n", title);
  out += rule(sweep.size());
  out += fmt::format("{:<{}}", "", kLabelWidth);
  for (const auto& e : sweep) out += fmt::format("{:>{}}", fmt::format("BW {}", e.bandwidth), kColumnWidth);
  out += "\n" + rule(sweep.size());
  std::vector<std::string> shares;
  for (const auto& term : term_rows(sweep))
    if (term.starts_with("share_total") || term.starts_with("share_above") || term.starts_with("share_below"))
      shares.push_back(term);
  for (const auto& term : shares) {
    out += fmt::format("{:<{}}", term_label(term), kLabelWidth);
    for (const auto& e : sweep) out += fmt::format("{:>{}}", coef_cell(e, term), kColumnWidth);
    out += "\n";
    out += fmt::format("{:<{}}", "", kLabelWidth);
    for (const auto& e : sweep) out += fmt::format("{:>{}}", se_cell(e, term), kColumnWidth);
    out += "\n";
  }
  out += fmt::format("{:<{}}", "Cell-years", kLabelWidth);
  for (const auto& e : sweep) out += fmt::format("{:>{}}", e.result.n_obs, kColumnWidth);
  out += "\n" + rule(sweep.size());
  return out;
}

nlohmann::json to_json(const PanelEstimate& e) {
  nlohmann::json j;
  j["outcome"] = std::string(to_string(e.outcome));
  j["subset"] = std::string(to_string(e.subset));
  j["specification"] = std::string(to_string(e.specification));
  j["bandwidth"] = e.bandwidth;
  j["instrumented"] = e.instrumented;
  j["result"] = kernel::to_json(e.result);
  j["dep_var_mean"] = e.dep_var_mean;
  j["total_weight"] = e.total_weight;
  j["vote_share_denominator"] = "all votes cast";
  if (e.above_equals_below) {
    const auto& w = *e.above_equals_below;
    j["wald_above_equals_below"] = {{"F", w.statistic},
                                    {"df_num", w.df_numerator},
                                    {"df_den", w.df_denominator},
                                    {"p", w.p_value}};
  }
  j["omitted"] = e.omitted;
  j["years"] = e.years;
  j["cells"] = e.cells;
  return j;
}

PanelEstimate estimate_from_json(const nlohmann::json& j) {
  PanelEstimate e;
  e.outcome = outcome_from_string(j.at("outcome").get<std::string>());
  e.subset = subset_from_string(j.at("subset").get<std::string>());
  e.specification = specification_from_string(j.at("specification").get<std::string>());
  e.bandwidth = j.at("bandwidth").get<int>();
  e.instrumented = j.at("instrumented").get<bool>();
  e.result = kernel::result_from_json(j.at("result"));
  e.dep_var_mean = j.at("dep_var_mean").get<double>();
  e.total_weight = j.value("total_weight", 0.0);
  if (j.contains("wald_above_equals_below")) {
    const auto& w = j.at("wald_above_equals_below");
    e.above_equals_below = kernel::WaldTest{w.at("F").get<double>(), w.at("df_num").get<kernel::Index>(),
                                            w.at("df_den").get<kernel::Index>(), w.at("p").get<double>()};
  }
  e.omitted = j.value("omitted", std::vector<std::string>{});
  e.years = j.value("years", std::vector<int>{});
  e.cells = j.value("cells", std::size_t{0});
  return e;
}

}  // namespace creditvote::panel
