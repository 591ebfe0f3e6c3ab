#include "creditvote/kernel/absorb.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "creditvote/errors.hpp"

namespace creditvote::kernel {

namespace {

// Subtracts weighted group means of one dimension from every column and
// returns the largest absolute mean removed.
double sweep_dimension(Eigen::MatrixXd& data, const Eigen::VectorXd& weights,
                       const std::vector<int>& codes, int groups) {
  std::vector<double> wsum(static_cast<std::size_t>(groups), 0.0);
  for (std::size_t i = 0; i < codes.size(); ++i) wsum[static_cast<std::size_t>(codes[i])] += weights(static_cast<Index>(i));

  double largest = 0.0;
  std::vector<double> sums(static_cast<std::size_t>(groups));
  for (Index c = 0; c < data.cols(); ++c) {
    double* col = data.col(c).data();
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < codes.size(); ++i)
      sums[static_cast<std::size_t>(codes[i])] += weights(static_cast<Index>(i)) * col[i];
    for (std::size_t g = 0; g < sums.size(); ++g) {
      sums[g] = wsum[g] > 0.0 ? sums[g] / wsum[g] : 0.0;
      largest = std::max(largest, std::abs(sums[g]));
    }
    for (std::size_t i = 0; i < codes.size(); ++i) col[i] -= sums[static_cast<std::size_t>(codes[i])];
  }
  return largest;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace

std::vector<Index> implied_dummy_columns(const GroupLabels& groups,
                                         const Eigen::VectorXd& weights) {
  const std::size_t dims = groups.dimensions();
  std::vector<Index> active(dims, 0);
  std::vector<std::vector<char>> used(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    used[d].assign(static_cast<std::size_t>(groups.group_count(d)), 0);
    const auto& codes = groups.codes(d);
    for (std::size_t i = 0; i < codes.size(); ++i)
      if (weights(static_cast<Index>(i)) > 0.0) used[d][static_cast<std::size_t>(codes[i])] = 1;
    active[d] = std::count(used[d].begin(), used[d].end(), 1);
  }
  if (dims <= 1) return active;

  if (dims == 2) {
    const int g1 = groups.group_count(0);
    UnionFind uf(g1 + groups.group_count(1));
    const auto& a = groups.codes(0);
    const auto& b = groups.codes(1);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (weights(static_cast<Index>(i)) > 0.0) uf.unite(a[i], g1 + b[i]);
    Index components = 0;
    for (int node = 0; node < g1 + groups.group_count(1); ++node) {
      const bool live = node < g1 ? used[0][static_cast<std::size_t>(node)]
                                  : used[1][static_cast<std::size_t>(node - g1)];
      if (live && uf.find(node) == node) ++components;
    }
    // Each component beyond the first ties one more dummy of dimension 2.
    return {active[0], active[1] - components};
  }

  for (std::size_t d = 1; d < dims; ++d) active[d] -= 1;
  return active;
}

bool nested_in_clusters(const GroupLabels& groups, std::size_t dim, const ClusterSpec& clusters) {
  const auto& codes = groups.codes(dim);
  if (codes.size() != clusters.ids.size())
    throw std::invalid_argument("cluster labels do not match group labels");
  std::vector<int> owner(static_cast<std::size_t>(groups.group_count(dim)), -1);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    int& o = owner[static_cast<std::size_t>(codes[i])];
    if (o == -1) o = clusters.ids[i];
    else if (o != clusters.ids[i]) return false;
  }
  return true;
}

DemeanInfo demean_columns(Eigen::MatrixXd& data, const Eigen::VectorXd& weights,
                          const GroupLabels& groups, const AbsorbOptions& options) {
  if (weights.size() != data.rows())
    throw std::invalid_argument("weights do not match data rows");
  for (std::size_t d = 0; d < groups.dimensions(); ++d)
    if (groups.codes(d).size() != static_cast<std::size_t>(data.rows()))
      throw std::invalid_argument(fmt::format("group dimension {} has {} labels for {} rows", d,
                                              groups.codes(d).size(), data.rows()));

  DemeanInfo info;
  info.dof_per_dimension = implied_dummy_columns(groups, weights);
  info.absorbed_dof =
      std::accumulate(info.dof_per_dimension.begin(), info.dof_per_dimension.end(), Index{0});
  if (groups.dimensions() == 0) return info;

  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double largest = 0.0;
    for (std::size_t d = 0; d < groups.dimensions(); ++d)
      largest = std::max(largest, sweep_dimension(data, weights, groups.codes(d), groups.group_count(d)));
    info.sweeps = sweep;
    info.max_group_mean = largest;
    if (largest <= options.tolerance) return info;
  }
  throw ConvergenceError(
      fmt::format("fixed-effect absorption did not converge in {} sweeps (max group mean {:.3e})",
                  options.max_sweeps, info.max_group_mean),
      info.max_group_mean, options.max_sweeps);
}

AbsorbedData absorb_fixed_effects(const DesignMatrix& x, const Eigen::VectorXd& y,
                                  const GroupLabels& groups, const AbsorbOptions& options) {
  x.validate();
  if (y.size() != x.rows()) throw std::invalid_argument("outcome length does not match design");
  if (groups.dimensions() > 0 && groups.rows() != static_cast<std::size_t>(x.rows()))
    throw std::invalid_argument("group labels do not match design rows");

  Eigen::MatrixXd joint(x.rows(), x.cols() + 1);
  joint.col(0) = y;
  joint.rightCols(x.cols()) = x.values;
  AbsorbedData out;
  out.info = demean_columns(joint, x.weights, groups, options);
  out.absorbed_dof = out.info.absorbed_dof;
  out.y = joint.col(0);
  out.x.names = x.names;
  out.x.values = joint.rightCols(x.cols());
  out.x.weights = x.weights;
  return out;
}

}  // namespace creditvote::kernel
