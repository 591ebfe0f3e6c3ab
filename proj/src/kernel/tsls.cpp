#include "creditvote/kernel/tsls.hpp"

#include <fmt/format.h>

#include <stdexcept>

#include "creditvote/errors.hpp"

namespace creditvote::kernel {

namespace {

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

template <typename T>
std::vector<T> concat(std::vector<T> a, const std::vector<T>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Wald F that the excluded-instrument coefficients are jointly zero in the
// first-stage regression of one endogenous column.
double first_stage_f(const Eigen::MatrixXd& z, const std::vector<std::string>& z_names,
                     const Eigen::VectorXd& weights, const Eigen::VectorXd& endogenous,
                     Index n_exogenous, const FitOptions& options) {
  DesignMatrix design{z_names, z, weights};
  const auto fit = wls_fit(design, endogenous, options);
  const Index q = z.cols() - n_exogenous;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(q, z.cols());
  for (Index j = 0; j < q; ++j) r(j, n_exogenous + j) = 1.0;
  return wald_test(fit, r, Eigen::VectorXd::Zero(q)).statistic;
}

}  // namespace

RegressionResult tsls_fit(const Eigen::VectorXd& y, const IvDesign& design,
                          const FitOptions& options) {
  const auto& exo = design.exogenous;
  const Index n = y.size();
  const Index n_endog = design.endogenous.cols();
  const Index n_instr = design.instruments.cols();
  if (exo.rows() != n || design.endogenous.rows() != n || design.instruments.rows() != n)
    throw std::invalid_argument("IV design blocks do not share the outcome's row count");
  if (static_cast<Index>(design.endogenous_names.size()) != n_endog ||
      static_cast<Index>(design.instrument_names.size()) != n_instr)
    throw std::invalid_argument("IV design names do not match column counts");
  if (n_instr < n_endog)
    throw IdentificationError(fmt::format(
        "model is underidentified: {} instruments for {} endogenous regressors", n_instr, n_endog));
  if (!design.endogenous.allFinite() || !design.instruments.allFinite() || !y.allFinite())
    throw std::invalid_argument("IV design contains NaN or Inf");
  if (exo.cols() == 0 && n_endog == 0) throw std::invalid_argument("model has no regressors");
  if (exo.cols() > 0) exo.validate();
  if (options.clusters && options.clusters->ids.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("cluster labels do not match row count");

  const auto rows = detail::positive_rows(exo.weights);
  if (rows.empty()) throw EmptySampleError("no rows with positive weight");
  const Eigen::VectorXd w = detail::select_rows(exo.weights, rows);
  const Eigen::VectorXd yk = detail::select_rows(y, rows);
  const Eigen::MatrixXd xk = detail::select_rows(exo.values, rows);
  const Eigen::MatrixXd dk = detail::select_rows(design.endogenous, rows);
  const Eigen::MatrixXd zk = hcat(xk, detail::select_rows(design.instruments, rows));
  const auto z_names = concat(exo.names, design.instrument_names);
  const auto names = concat(exo.names, design.endogenous_names);

  // First stage: project each endogenous column on the full instrument set.
  Eigen::MatrixXd d_hat(dk.rows(), n_endog);
  if (n_endog > 0) {
    detail::LeastSquares first;
    try {
      first = detail::solve_weighted(zk, Eigen::VectorXd::Zero(zk.rows()), w, z_names);
    } catch (const RankError& e) {
      throw IdentificationError(std::string("instrument set is rank deficient: ") + e.what());
    }
    // Normal-equation solve reusing the bread from the QR: (Z'WZ)^-1 Z'W D.
    const Eigen::MatrixXd zw = zk.array().colwise() * w.array();
    d_hat = zk * (first.bread * (zw.transpose() * dk));
  }
  const Eigen::MatrixXd x_hat = hcat(xk, d_hat);
  const Eigen::MatrixXd x_full = hcat(xk, dk);

  detail::LeastSquares second;
  try {
    second = detail::solve_weighted(x_hat, yk, w, names);
  } catch (const RankError& e) {
    if (n_endog == 0) throw;
    throw IdentificationError(std::string("first stage is rank deficient: ") + e.what());
  }

  ScoreContext ctx;
  ctx.rows = rows;
  ctx.x = x_hat;
  ctx.weights = w;
  ctx.residuals = yk - x_full * second.coefficients;
  ctx.bread = std::move(second.bread);
  ctx.absorbed_dof = options.absorbed_dof;

  RegressionResult result;
  result.names = names;
  result.coefficients = second.coefficients;
  detail::attach_covariance(result, ctx, options);

  const double ssr = (w.array() * ctx.residuals.array().square()).sum();
  const double tss = options.total_sum_squares.value_or(detail::weighted_total_ss(yk, w));
  result.r_squared = tss > 0.0 ? 1.0 - ssr / tss : 0.0;
  result.diagnostics["ssr"] = ssr;

  if (n_endog > 0) {
    FitOptions first_options = options;
    first_options.total_sum_squares.reset();
    if (first_options.clusters) {
      ClusterSpec kept;
      kept.ids.reserve(rows.size());
      for (Index r : rows) kept.ids.push_back(options.clusters->ids[static_cast<std::size_t>(r)]);
      first_options.clusters = std::move(kept);
    }
    for (Index j = 0; j < n_endog; ++j) {
      const double f = first_stage_f(zk, z_names, w, dk.col(j), xk.cols(), first_options);
      const std::string key = n_endog == 1
                                  ? std::string("first_stage_F")
                                  : "first_stage_F:" + design.endogenous_names[static_cast<std::size_t>(j)];
      result.diagnostics[key] = f;
    }
  }
  return result;
}

}  // namespace creditvote::kernel
