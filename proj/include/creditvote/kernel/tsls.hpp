#pragma once

#include "creditvote/kernel/regression.hpp"

namespace creditvote::kernel {

// Structural equation y = [exogenous, endogenous] b + e, with the
// endogenous block instrumented by [exogenous, instruments]. Weights are
// taken from `exogenous`.
struct IvDesign {
  DesignMatrix exogenous;
  Eigen::MatrixXd endogenous;
  std::vector<std::string> endogenous_names;
  Eigen::MatrixXd instruments;
  std::vector<std::string> instrument_names;
};

// Two-stage least squares. Coefficients are ordered exogenous then
// endogenous. Residuals for the covariance use the actual endogenous values.
// Reports "first_stage_F" (one endogenous regressor) or
// "first_stage_F:<name>" per regressor, computed as the Wald F of the
// excluded instruments under the same covariance type.
RegressionResult tsls_fit(const Eigen::VectorXd& y, const IvDesign& design,
                          const FitOptions& options = {});

}  // namespace creditvote::kernel
