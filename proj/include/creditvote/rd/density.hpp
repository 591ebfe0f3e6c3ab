#pragma once

#include <cstddef>
#include <span>

#include "creditvote/rd/scanner.hpp"
#include "creditvote/records.hpp"

namespace creditvote::rd {

// Binned log-density discontinuity test at a detected threshold.
//
// Scores within half_window points of the cutoff are counted in bins of
// bin_width points (a bin starting at the cutoff is the first one above it).
// log(count) is regressed on a side-specific polynomial in the bin centre
// with count weights, the delta-method variance of a Poisson log count; the
// jump coefficient is the log-density discontinuity. Its variance is the
// Poisson one scaled up by the residual dispersion when that exceeds one.
struct DensityConfig {
  int bin_width = 1;
  int half_window = 30;
  int polynomial_degree = 2;
  double alpha_level = 0.05;
  std::size_t min_populated_bins = 20;
};

struct DensityTestResult {
  int cutoff = 0;
  double log_jump = 0.0;
  double se = 0.0;
  double t_stat = 0.0;
  bool pass = true;  // |t| below the critical value
  bool inconclusive = false;
  std::size_t populated_bins = 0;
};

DensityTestResult density_smoothness_test(std::span<const CreditRecord> records,
                                          const ThresholdEstimate& threshold, int bin_width);

DensityTestResult density_smoothness_test(std::span<const CreditRecord> records,
                                          const ThresholdEstimate& threshold,
                                          const DensityConfig& config);

// Same test on raw scores.
DensityTestResult density_smoothness_test(std::span<const int> scores, int cutoff,
                                          const DensityConfig& config);

}  // namespace creditvote::rd
