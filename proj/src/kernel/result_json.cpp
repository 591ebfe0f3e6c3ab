#include "creditvote/kernel/result_json.hpp"

namespace creditvote::kernel {

nlohmann::json to_json(const RegressionResult& result) {
  nlohmann::json j;
  j["names"] = result.names;
  nlohmann::json coefficients = nlohmann::json::object();
  nlohmann::json se = nlohmann::json::object();
  nlohmann::json vcov = nlohmann::json::array();
  for (Index i = 0; i < result.coefficients.size(); ++i) {
    const auto& name = result.names[static_cast<std::size_t>(i)];
    coefficients[name] = result.coefficients(i);
    se[name] = result.standard_errors(i);
    nlohmann::json row = nlohmann::json::array();
    for (Index k = 0; k < result.vcov.cols(); ++k) row.push_back(result.vcov(i, k));
    vcov.push_back(std::move(row));
  }
  j["coefficients"] = std::move(coefficients);
  j["se"] = std::move(se);
  j["vcov"] = std::move(vcov);
  j["n_obs"] = result.n_obs;
  j["n_clusters"] = result.n_clusters;
  j["r2"] = result.r_squared;
  j["dof_residual"] = result.dof_residual;
  j["covariance"] = std::string(to_string(result.covariance));
  j["diagnostics"] = result.diagnostics;
  return j;
}

RegressionResult result_from_json(const nlohmann::json& j) {
  RegressionResult result;
  result.names = j.at("names").get<std::vector<std::string>>();
  const auto k = static_cast<Index>(result.names.size());
  result.coefficients.resize(k);
  result.standard_errors.resize(k);
  result.vcov.resize(k, k);
  for (Index i = 0; i < k; ++i) {
    const auto& name = result.names[static_cast<std::size_t>(i)];
    result.coefficients(i) = j.at("coefficients").at(name).get<double>();
    result.standard_errors(i) = j.at("se").at(name).get<double>();
    for (Index c = 0; c < k; ++c)
      result.vcov(i, c) = j.at("vcov").at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c)).get<double>();
  }
  result.n_obs = j.at("n_obs").get<Index>();
  result.n_clusters = j.at("n_clusters").get<Index>();
  result.r_squared = j.at("r2").get<double>();
  result.dof_residual = j.value("dof_residual", Index{0});
  result.covariance = covariance_from_string(j.value("covariance", std::string("HC1")));
  if (j.contains("diagnostics"))
    result.diagnostics = j.at("diagnostics").get<std::map<std::string, double>>();
  return result;
}

}  // namespace creditvote::kernel
