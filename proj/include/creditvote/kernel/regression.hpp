#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace creditvote::kernel {

using Index = Eigen::Index;

// Dense design with analytic (population) weights, one per row.
struct DesignMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
  Eigen::VectorXd weights;

  static DesignMatrix unweighted(std::vector<std::string> names, Eigen::MatrixXd values);

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }

  // Throws std::invalid_argument when an invariant is violated: shape
  // mismatch, non-finite entries, negative weights, or no positive weight.
  void validate() const;
};

// Integer-coded categorical labels, one vector per grouping dimension.
class GroupLabels {
 public:
  GroupLabels() = default;

  // Arbitrary integer labels; recoded to 0..G-1 in order of first appearance.
  void add_dimension(std::span<const long long> labels);
  void add_dimension(std::span<const std::string> labels);

  std::size_t dimensions() const { return codes_.size(); }
  std::size_t rows() const { return codes_.empty() ? 0 : codes_.front().size(); }
  const std::vector<int>& codes(std::size_t dim) const { return codes_.at(dim); }
  int group_count(std::size_t dim) const { return counts_.at(dim); }

 private:
  void push(std::vector<int> codes, int count);
  std::vector<std::vector<int>> codes_;
  std::vector<int> counts_;
};

// Cluster membership per row, recoded to 0..G-1.
struct ClusterSpec {
  std::vector<int> ids;

  static ClusterSpec from_labels(std::span<const std::string> labels);
  static ClusterSpec from_labels(std::span<const long long> labels);
};

enum class CovarianceType { Classical, HC1, CR1 };

std::string_view to_string(CovarianceType type);
CovarianceType covariance_from_string(std::string_view name);

struct FitOptions {
  CovarianceType covariance = CovarianceType::HC1;
  // Required when covariance == CR1; indexed by the caller's row order.
  std::optional<ClusterSpec> clusters;
  // Parameters absorbed before fitting that count against residual degrees
  // of freedom (fixed effects not nested in the clusters).
  Index absorbed_dof = 0;
  // Total weighted sum of squares of the original outcome. Supplying it makes
  // r_squared the overall R^2 of a model whose fixed effects were absorbed.
  std::optional<double> total_sum_squares;
};

struct RegressionResult {
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd vcov;
  Eigen::VectorXd standard_errors;
  Index n_obs = 0;
  Index n_clusters = 0;
  Index dof_residual = 0;
  double r_squared = 0.0;
  CovarianceType covariance = CovarianceType::HC1;
  // Free-form scalar diagnostics, e.g. "sigma2", "first_stage_F", "ssr".
  std::map<std::string, double> diagnostics;

  Index index_of(std::string_view name) const;
  double coef(std::string_view name) const { return coefficients(index_of(name)); }
  double se(std::string_view name) const { return standard_errors(index_of(name)); }
  double t_stat(std::string_view name) const;
  // Two-sided p-value from Student t with dof_residual degrees of freedom.
  double p_value(std::string_view name) const;
  // Two-sided confidence interval at the given level.
  std::pair<double, double> confidence_interval(std::string_view name, double level = 0.95) const;
};

// Per-row pieces of a fitted linear model needed by every sandwich estimator.
// Rows with zero weight are dropped; `rows` maps back to the caller's index.
struct ScoreContext {
  Eigen::MatrixXd x;
  Eigen::VectorXd residuals;
  Eigen::VectorXd weights;
  Eigen::MatrixXd bread;  // (X'WX)^-1
  std::vector<Index> rows;
  Index absorbed_dof = 0;

  Index n() const { return x.rows(); }
  Index k() const { return x.cols(); }
};

Eigen::MatrixXd classical_vcov(const ScoreContext& ctx);
Eigen::MatrixXd hc1_vcov(const ScoreContext& ctx);

// CR1 sandwich. Scale G/(G-1) * (N-1)/(N-K), K = columns + absorbed_dof.
// Throws TooFewClustersError when fewer than two clusters carry weight.
Eigen::MatrixXd cluster_robust_vcov(const ScoreContext& ctx, const ClusterSpec& clusters);

// Weighted least squares through a column-pivoted Householder QR of
// sqrt(W) X. Columns whose pivot falls below 1e-10 of the largest pivot
// raise RankError naming them.
RegressionResult wls_fit(const DesignMatrix& x, const Eigen::VectorXd& y,
                         const FitOptions& options = {});

// Student-t / normal critical values and p-values used across the engine.
double two_sided_p(double t, double dof);
double t_critical(double level, double dof);
double normal_critical(double alpha_two_sided);

struct WaldTest {
  double statistic = 0.0;  // F form: chi2 / q
  Index df_numerator = 0;
  Index df_denominator = 0;
  double p_value = 1.0;
};

// Tests R b = r using the result's covariance; F reference distribution with
// dof_residual denominator degrees of freedom.
WaldTest wald_test(const RegressionResult& result, const Eigen::MatrixXd& restrictions,
                   const Eigen::VectorXd& values);

// H0: coefficient a equals coefficient b.
WaldTest wald_equal(const RegressionResult& result, std::string_view a, std::string_view b);

namespace detail {

// Weighted least-squares solve shared by the OLS and 2SLS paths.
struct LeastSquares {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd bread;
  Index rank = 0;
};

// Solves sqrt(w) x b = sqrt(w) y. Throws RankError listing collinear names.
LeastSquares solve_weighted(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& weights,
                            const std::vector<std::string>& names);

// Indices of rows with strictly positive weight.
std::vector<Index> positive_rows(const Eigen::VectorXd& weights);

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Index>& rows);
Eigen::VectorXd select_rows(const Eigen::VectorXd& v, const std::vector<Index>& rows);

double weighted_total_ss(const Eigen::VectorXd& y, const Eigen::VectorXd& weights);

// Fills vcov, standard errors, dof and cluster metadata from a score context.
void attach_covariance(RegressionResult& result, const ScoreContext& ctx,
                       const FitOptions& options);

}  // namespace detail

}  // namespace creditvote::kernel
