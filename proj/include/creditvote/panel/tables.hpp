#pragma once

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <string_view>

#include "creditvote/panel/panel.hpp"

namespace creditvote::panel {

// "***" p < 0.01, "**" p < 0.05, "*" p < 0.1.
std::string stars(double p);

// Human label for a model term ("share_total" -> "Share close thresh.").
std::string term_label(std::string_view name);

// Column header for an estimate, e.g. "Rep share" or "NOMINATE (D win)".
std::string column_label(const PanelEstimate& e);

// One column per estimate: coefficient with stars, clustered SE in
// parentheses underneath, then N, individuals, R^2, dep-var mean and the
// above/below Wald p-value where present. An empty span yields the header.
std::string format_regression_table(std::span<const PanelEstimate> columns,
                                    std::string_view title);

// Bandwidth sweep: one column per bandwidth, share rows only.
std::string format_sweep_table(std::span<const PanelEstimate> sweep, std::string_view title);

nlohmann::json to_json(const PanelEstimate& e);
PanelEstimate estimate_from_json(const nlohmann::json& j);

}  // namespace creditvote::panel
