#include "creditvote/rd/density.hpp"

#include <fmt/format.h>

#include <cmath>
#include <vector>

#include "creditvote/errors.hpp"
#include "creditvote/kernel/regression.hpp"

namespace creditvote::rd {

DensityTestResult density_smoothness_test(std::span<const int> scores, int cutoff,
                                          const DensityConfig& config) {
  if (config.bin_width < 1 || config.half_window < config.bin_width)
    throw std::invalid_argument("density test needs bin_width >= 1 and half_window >= bin_width");
  DensityTestResult result;
  result.cutoff = cutoff;

  const int bins_per_side = config.half_window / config.bin_width;
  std::vector<double> counts(static_cast<std::size_t>(2 * bins_per_side), 0.0);
  for (int s : scores) {
    const int offset = s - cutoff;
    if (offset < -bins_per_side * config.bin_width || offset >= bins_per_side * config.bin_width)
      continue;
    const int k = static_cast<int>(std::floor(static_cast<double>(offset) / config.bin_width));
    counts[static_cast<std::size_t>(k + bins_per_side)] += 1.0;
  }

  const int p = config.polynomial_degree;
  std::size_t left = 0;
  std::size_t right = 0;
  for (int k = -bins_per_side; k < bins_per_side; ++k)
    if (counts[static_cast<std::size_t>(k + bins_per_side)] > 0.0) (k < 0 ? left : right) += 1;
  result.populated_bins = left + right;
  if (result.populated_bins < config.min_populated_bins ||
      left < static_cast<std::size_t>(p + 1) || right < static_cast<std::size_t>(p + 1)) {
    result.inconclusive = true;
    return result;
  }

  const auto n = static_cast<kernel::Index>(result.populated_bins);
  kernel::DesignMatrix x;
  x.names = {"intercept", "jump"};
  for (int j = 1; j <= p; ++j) x.names.push_back(fmt::format("poly{}", j));
  for (int j = 1; j <= p; ++j) x.names.push_back(fmt::format("jump_x_poly{}", j));
  x.values.resize(n, 2 + 2 * p);
  x.weights.resize(n);
  Eigen::VectorXd y(n);
  kernel::Index row = 0;
  for (int k = -bins_per_side; k < bins_per_side; ++k) {
    const double c = counts[static_cast<std::size_t>(k + bins_per_side)];
    if (c <= 0.0) continue;
    const double u = (k + 0.5) * config.bin_width / config.half_window;
    const double d = k >= 0 ? 1.0 : 0.0;
    x.values(row, 0) = 1.0;
    x.values(row, 1) = d;
    double power = 1.0;
    for (int j = 1; j <= p; ++j) {
      power *= u;
      x.values(row, 1 + j) = power;
      x.values(row, 1 + p + j) = d * power;
    }
    x.weights(row) = c;
    y(row) = std::log(c);
    ++row;
  }

  kernel::FitOptions options;
  options.covariance = kernel::CovarianceType::Classical;
  kernel::RegressionResult fit;
  try {
    fit = kernel::wls_fit(x, y, options);
  } catch (const EstimationError&) {
    result.inconclusive = true;
    return result;
  }
  const double sigma2 = fit.diagnostics.at("sigma2");
  const double poisson_var = sigma2 > 0.0 ? fit.vcov(1, 1) / sigma2 : 0.0;
  result.log_jump = fit.coefficients(1);
  result.se = std::sqrt(poisson_var * std::max(1.0, sigma2));
  result.t_stat = result.se > 0.0 ? result.log_jump / result.se : 0.0;
  result.pass = std::abs(result.t_stat) < kernel::normal_critical(config.alpha_level);
  return result;
}

DensityTestResult density_smoothness_test(std::span<const CreditRecord> records,
                                          const ThresholdEstimate& threshold,
                                          const DensityConfig& config) {
  std::vector<int> scores;
  scores.reserve(records.size());
  for (const auto& r : records) scores.push_back(r.credit_score);
  return density_smoothness_test(scores, threshold.cutoff, config);
}

DensityTestResult density_smoothness_test(std::span<const CreditRecord> records,
                                          const ThresholdEstimate& threshold, int bin_width) {
  DensityConfig config;
  config.bin_width = bin_width;
  return density_smoothness_test(records, threshold, config);
}

}  // namespace creditvote::rd
