#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <string>

#include "creditvote/lab/world.hpp"
#include "creditvote/panel/panel.hpp"
#include "creditvote/rd/scanner.hpp"

namespace creditvote::lab {

// Binomial rate with its own standard error.
struct Proportion {
  std::size_t hits = 0;
  std::size_t trials = 0;

  double rate() const { return trials == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials); }
  double se() const;
  void add(bool hit) {
    ++trials;
    hits += hit ? 1 : 0;
  }
};

// Running mean and standard deviation (Welford).
struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  double sd() const;
  double se() const;
};

struct MonteCarloOptions {
  std::size_t replications = 200;
  int workers = 1;
  double level = 0.95;
  int bandwidth = 15;
  rd::RdConfig rd;
  panel::EstimationOptions estimation;
  bool estimate_nominate = true;
};

struct MonteCarloReport {
  std::size_t replications = 0;
  std::size_t failed = 0;            // replications whose estimation threw
  Proportion cutoff_recovery;        // zone-years with |detected - planted| <= 5
  Proportion cutoff_exact;
  Moments detected_alpha;            // over detected (not imputed) zone-years
  Proportion share_coverage;         // CI for the share coefficient covers the truth
  Proportion share_rejection;        // H0: share coefficient = 0 rejected
  Moments share_estimate;
  Moments share_se;
  Proportion nominate_coverage;
  Moments nominate_estimate;
  Moments first_stage_f;
};

nlohmann::json to_json(const MonteCarloReport& r);

// Each replication draws a fresh world (seed split from config.seed), scans
// it, builds shares from the detected thresholds, and fits the baseline
// vote-share and nominate models at the chosen bandwidth.
MonteCarloReport monte_carlo(const WorldConfig& config, const MonteCarloOptions& options);

}  // namespace creditvote::lab
