#pragma once

#include <nlohmann/json.hpp>

#include "creditvote/kernel/regression.hpp"

namespace creditvote::kernel {

// Keys: coefficients, se, vcov, n_obs, n_clusters, r2, plus dof_residual,
// covariance and diagnostics. Coefficient order is kept in "names".
nlohmann::json to_json(const RegressionResult& result);
RegressionResult result_from_json(const nlohmann::json& j);

}  // namespace creditvote::kernel
