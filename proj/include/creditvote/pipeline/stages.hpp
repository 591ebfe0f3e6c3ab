#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "creditvote/panel/panel.hpp"
#include "creditvote/pipeline/config.hpp"

namespace creditvote::pipeline {

enum class Stage { Simulate, Crosswalk, Scan, Shares, Estimate, Report, Pipeline, All };

Stage stage_from_string(std::string_view name);  // throws ConfigError
std::string_view to_string(Stage s);

struct StageResult {
  std::string stage;
  std::vector<std::filesystem::path> outputs;  // manifest last
  std::vector<std::string> messages;
};

StageResult run_simulate(const PipelineConfig& config);
StageResult run_crosswalk(const PipelineConfig& config);
StageResult run_scan(const PipelineConfig& config);
StageResult run_shares(const PipelineConfig& config);
StageResult run_estimate(const PipelineConfig& config);
StageResult run_report(const PipelineConfig& config);

// Pipeline = crosswalk, scan, shares, estimate, report; All = simulate + Pipeline.
std::vector<StageResult> run_stage(Stage stage, const PipelineConfig& config);

// Every model the estimate stage fits, in a fixed order.
struct EstimateSet {
  int bandwidth = 15;
  std::vector<int> years;
  std::vector<panel::PanelEstimate> vote_models;      // rep, dem; pooled then above/below
  std::vector<panel::PanelEstimate> nominate_models;  // all, rep winning, dem winning
  std::map<std::string, std::vector<panel::PanelEstimate>> sweeps;
  std::vector<std::string> log;
};

EstimateSet estimate_all(std::span<const panel::PanelRow> rows, const PipelineConfig& config);
nlohmann::json to_json(const EstimateSet& s);
EstimateSet estimate_set_from_json(const nlohmann::json& j);

// Text tables: vote shares, nominate, sweeps. An empty set still gets
// headers.
std::string render_report(const EstimateSet& s);

}  // namespace creditvote::pipeline
