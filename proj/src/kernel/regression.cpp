#include "creditvote/kernel/regression.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "creditvote/errors.hpp"

namespace creditvote::kernel {

namespace {

constexpr double kPivotThreshold = 1e-10;

template <typename Label>
std::vector<int> recode(std::span<const Label> labels, int& count) {
  std::unordered_map<Label, int> seen;
  std::vector<int> codes;
  codes.reserve(labels.size());
  for (const auto& label : labels) {
    auto [it, inserted] = seen.try_emplace(label, static_cast<int>(seen.size()));
    codes.push_back(it->second);
  }
  count = static_cast<int>(seen.size());
  return codes;
}

}  // namespace

// --- Domain types

DesignMatrix DesignMatrix::unweighted(std::vector<std::string> names, Eigen::MatrixXd values) {
  DesignMatrix x;
  x.weights = Eigen::VectorXd::Ones(values.rows());
  x.values = std::move(values);
  x.names = std::move(names);
  return x;
}

void DesignMatrix::validate() const {
  if (values.cols() < 1) throw std::invalid_argument("design matrix has no columns");
  if (static_cast<Index>(names.size()) != values.cols())
    throw std::invalid_argument(fmt::format("design has {} columns but {} names", values.cols(),
                                            names.size()));
  if (weights.size() != values.rows())
    throw std::invalid_argument(fmt::format("design has {} rows but {} weights", values.rows(),
                                            weights.size()));
  if (!values.allFinite()) throw std::invalid_argument("design matrix contains NaN or Inf");
  if (!weights.allFinite()) throw std::invalid_argument("weights contain NaN or Inf");
  if ((weights.array() < 0.0).any()) throw std::invalid_argument("negative weight");
  if (!(weights.array() > 0.0).any()) throw std::invalid_argument("no strictly positive weight");
}

void GroupLabels::add_dimension(std::span<const long long> labels) {
  int count = 0;
  auto codes = recode(labels, count);
  push(std::move(codes), count);
}

void GroupLabels::add_dimension(std::span<const std::string> labels) {
  int count = 0;
  auto codes = recode(labels, count);
  push(std::move(codes), count);
}

void GroupLabels::push(std::vector<int> codes, int count) {
  if (!codes_.empty() && codes.size() != codes_.front().size())
    throw std::invalid_argument(
        fmt::format("group dimension has {} labels, expected {}", codes.size(), rows()));
  codes_.push_back(std::move(codes));
  counts_.push_back(count);
}

ClusterSpec ClusterSpec::from_labels(std::span<const std::string> labels) {
  int count = 0;
  return ClusterSpec{recode(labels, count)};
}

ClusterSpec ClusterSpec::from_labels(std::span<const long long> labels) {
  int count = 0;
  return ClusterSpec{recode(labels, count)};
}

std::string_view to_string(CovarianceType type) {
  switch (type) {
    case CovarianceType::Classical: return "classical";
    case CovarianceType::HC1: return "HC1";
    case CovarianceType::CR1: return "CR1";
  }
  return "unknown";
}

CovarianceType covariance_from_string(std::string_view name) {
  if (name == "classical") return CovarianceType::Classical;
  if (name == "HC1" || name == "hc1") return CovarianceType::HC1;
  if (name == "CR1" || name == "cr1") return CovarianceType::CR1;
  throw std::invalid_argument(fmt::format("unknown covariance type '{}'", name));
}

Index RegressionResult::index_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range(fmt::format("no coefficient named '{}'", name));
  return static_cast<Index>(it - names.begin());
}

double RegressionResult::t_stat(std::string_view name) const {
  const Index i = index_of(name);
  return standard_errors(i) > 0.0 ? coefficients(i) / standard_errors(i) : 0.0;
}

double RegressionResult::p_value(std::string_view name) const {
  return two_sided_p(t_stat(name), static_cast<double>(dof_residual));
}

std::pair<double, double> RegressionResult::confidence_interval(std::string_view name,
                                                                double level) const {
  const Index i = index_of(name);
  const double half = t_critical(level, static_cast<double>(dof_residual)) * standard_errors(i);
  return {coefficients(i) - half, coefficients(i) + half};
}

// --- Distributions

double two_sided_p(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  if (dof <= 0.0) return 1.0;
  boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double t_critical(double level, double dof) {
  if (dof <= 0.0) return std::numeric_limits<double>::infinity();
  boost::math::students_t dist(dof);
  return boost::math::quantile(boost::math::complement(dist, (1.0 - level) / 2.0));
}

double normal_critical(double alpha_two_sided) {
  boost::math::normal dist;
  return boost::math::quantile(boost::math::complement(dist, alpha_two_sided / 2.0));
}

// --- Sandwich estimators

Eigen::MatrixXd classical_vcov(const ScoreContext& ctx) {
  const double dof = static_cast<double>(ctx.n() - ctx.k() - ctx.absorbed_dof);
  if (dof <= 0.0) throw EstimationError("no residual degrees of freedom");
  const double sigma2 = (ctx.weights.array() * ctx.residuals.array().square()).sum() / dof;
  return sigma2 * ctx.bread;
}

Eigen::MatrixXd hc1_vcov(const ScoreContext& ctx) {
  const double n = static_cast<double>(ctx.n());
  const double dof = n - static_cast<double>(ctx.k() + ctx.absorbed_dof);
  if (dof <= 0.0) throw EstimationError("no residual degrees of freedom");
  const Eigen::VectorXd u = ctx.weights.cwiseProduct(ctx.residuals);
  const Eigen::MatrixXd scores = ctx.x.array().colwise() * u.array();
  const Eigen::MatrixXd meat = scores.transpose() * scores;
  Eigen::MatrixXd v = ctx.bread * meat * ctx.bread * (n / dof);
  return 0.5 * (v + v.transpose());
}

Eigen::MatrixXd cluster_robust_vcov(const ScoreContext& ctx, const ClusterSpec& clusters) {
  std::unordered_map<int, Index> slot;
  for (Index r = 0; r < ctx.n(); ++r) {
    const auto original = static_cast<std::size_t>(ctx.rows[static_cast<std::size_t>(r)]);
    if (original >= clusters.ids.size())
      throw std::invalid_argument("cluster labels do not cover every row");
    slot.try_emplace(clusters.ids[original], static_cast<Index>(slot.size()));
  }
  const auto groups = static_cast<Index>(slot.size());
  if (groups < 2)
    throw TooFewClustersError(
        fmt::format("cluster-robust covariance needs at least 2 clusters, got {}", groups),
        static_cast<std::size_t>(groups));

  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(groups, ctx.k());
  for (Index r = 0; r < ctx.n(); ++r) {
    const int id = clusters.ids[static_cast<std::size_t>(ctx.rows[static_cast<std::size_t>(r)])];
    sums.row(slot[id]) += (ctx.weights(r) * ctx.residuals(r)) * ctx.x.row(r);
  }
  const double g = static_cast<double>(groups);
  const double n = static_cast<double>(ctx.n());
  const double dof = n - static_cast<double>(ctx.k() + ctx.absorbed_dof);
  if (dof <= 0.0) throw EstimationError("no residual degrees of freedom");
  const double scale = g / (g - 1.0) * (n - 1.0) / dof;
  Eigen::MatrixXd v = ctx.bread * (sums.transpose() * sums) * ctx.bread * scale;
  return 0.5 * (v + v.transpose());
}

// --- Fitting

namespace detail {

std::vector<Index> positive_rows(const Eigen::VectorXd& weights) {
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(weights.size()));
  for (Index i = 0; i < weights.size(); ++i)
    if (weights(i) > 0.0) rows.push_back(i);
  return rows;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Index>& rows) {
  if (static_cast<Index>(rows.size()) == m.rows()) return m;
  return m(rows, Eigen::all);
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& v, const std::vector<Index>& rows) {
  if (static_cast<Index>(rows.size()) == v.size()) return v;
  return v(rows);
}

double weighted_total_ss(const Eigen::VectorXd& y, const Eigen::VectorXd& weights) {
  const double mean = weights.dot(y) / weights.sum();
  return (weights.array() * (y.array() - mean).square()).sum();
}

LeastSquares solve_weighted(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& weights,
                            const std::vector<std::string>& names) {
  const Eigen::VectorXd root = weights.cwiseSqrt();
  const Eigen::MatrixXd xw = x.array().colwise() * root.array();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
  qr.setThreshold(kPivotThreshold);
  const Index k = x.cols();
  const Index rank = qr.rank();
  if (rank < k || x.rows() < k) {
    std::vector<std::string> collinear;
    const auto& perm = qr.colsPermutation().indices();
    for (Index j = rank; j < k; ++j) collinear.push_back(names.at(static_cast<std::size_t>(perm(j))));
    throw RankError(fmt::format("design is rank deficient (rank {} of {}); collinear columns: {}",
                                rank, k, fmt::join(collinear, ", ")),
                    std::move(collinear));
  }
  LeastSquares out;
  out.rank = rank;
  out.coefficients = qr.solve(y.cwiseProduct(root));
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd inner = r_inv * r_inv.transpose();
  const auto& p = qr.colsPermutation();
  out.bread = p * inner * p.transpose();
  out.bread = 0.5 * (out.bread + out.bread.transpose());
  return out;
}

void attach_covariance(RegressionResult& result, const ScoreContext& ctx,
                       const FitOptions& options) {
  result.covariance = options.covariance;
  result.n_obs = ctx.n();
  const Index dof = ctx.n() - ctx.k() - ctx.absorbed_dof;
  switch (options.covariance) {
    case CovarianceType::Classical: {
      result.vcov = classical_vcov(ctx);
      result.dof_residual = dof;
      result.n_clusters = 0;
      const double sigma2 =
          (ctx.weights.array() * ctx.residuals.array().square()).sum() / static_cast<double>(dof);
      result.diagnostics["sigma2"] = sigma2;
      break;
    }
    case CovarianceType::HC1:
      result.vcov = hc1_vcov(ctx);
      result.dof_residual = dof;
      result.n_clusters = 0;
      break;
    case CovarianceType::CR1: {
      if (!options.clusters) throw std::invalid_argument("CR1 covariance requires clusters");
      result.vcov = cluster_robust_vcov(ctx, *options.clusters);
      std::unordered_map<int, int> distinct;
      for (Index r : ctx.rows) distinct.emplace(options.clusters->ids[static_cast<std::size_t>(r)], 0);
      result.n_clusters = static_cast<Index>(distinct.size());
      result.dof_residual = result.n_clusters - 1;
      break;
    }
  }
  result.standard_errors = result.vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace detail

RegressionResult wls_fit(const DesignMatrix& x, const Eigen::VectorXd& y,
                         const FitOptions& options) {
  if (x.weights.size() == x.rows() && x.rows() > 0 && x.weights.allFinite() && (x.weights.array() == 0.0).all())
    throw EmptySampleError("no rows with positive weight");
  x.validate();
  if (y.size() != x.rows())
    throw std::invalid_argument(fmt::format("design has {} rows, outcome {}", x.rows(), y.size()));
  if (!y.allFinite()) throw std::invalid_argument("outcome contains NaN or Inf");
  if (options.clusters && options.clusters->ids.size() != static_cast<std::size_t>(x.rows()))
    throw std::invalid_argument("cluster labels do not match row count");

  const auto rows = detail::positive_rows(x.weights);
  if (rows.empty()) throw EmptySampleError("no rows with positive weight");

  ScoreContext ctx;
  ctx.rows = rows;
  ctx.x = detail::select_rows(x.values, rows);
  ctx.weights = detail::select_rows(x.weights, rows);
  ctx.absorbed_dof = options.absorbed_dof;
  const Eigen::VectorXd yk = detail::select_rows(y, rows);

  auto ls = detail::solve_weighted(ctx.x, yk, ctx.weights, x.names);
  ctx.residuals = yk - ctx.x * ls.coefficients;
  ctx.bread = std::move(ls.bread);

  RegressionResult result;
  result.names = x.names;
  result.coefficients = ls.coefficients;
  detail::attach_covariance(result, ctx, options);

  const double ssr = (ctx.weights.array() * ctx.residuals.array().square()).sum();
  const double tss = options.total_sum_squares.value_or(detail::weighted_total_ss(yk, ctx.weights));
  result.r_squared = tss > 0.0 ? 1.0 - ssr / tss : 0.0;
  result.diagnostics["ssr"] = ssr;
  return result;
}

// --- Hypothesis tests

WaldTest wald_test(const RegressionResult& result, const Eigen::MatrixXd& restrictions,
                   const Eigen::VectorXd& values) {
  if (restrictions.cols() != result.coefficients.size() || restrictions.rows() != values.size())
    throw std::invalid_argument("restriction matrix shape does not match the model");
  const Eigen::VectorXd gap = restrictions * result.coefficients - values;
  const Eigen::MatrixXd middle = restrictions * result.vcov * restrictions.transpose();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(middle);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
    throw EstimationError("restriction covariance is singular");
  WaldTest test;
  test.df_numerator = restrictions.rows();
  test.df_denominator = result.dof_residual;
  test.statistic = gap.dot(ldlt.solve(gap)) / static_cast<double>(test.df_numerator);
  if (test.df_denominator > 0) {
    boost::math::fisher_f dist(static_cast<double>(test.df_numerator),
                               static_cast<double>(test.df_denominator));
    test.p_value = boost::math::cdf(boost::math::complement(dist, test.statistic));
  }
  return test;
}

WaldTest wald_equal(const RegressionResult& result, std::string_view a, std::string_view b) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(1, result.coefficients.size());
  r(0, result.index_of(a)) = 1.0;
  r(0, result.index_of(b)) = -1.0;
  return wald_test(result, r, Eigen::VectorXd::Zero(1));
}

}  // namespace creditvote::kernel
