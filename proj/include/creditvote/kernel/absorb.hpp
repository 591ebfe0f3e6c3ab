#pragma once

#include "creditvote/kernel/regression.hpp"

namespace creditvote::kernel {

struct AbsorbOptions {
  int max_sweeps = 10000;
  // Stop once the largest absolute weighted group mean, over every
  // dimension and column, is at or below this value.
  double tolerance = 1e-10;
};

struct DemeanInfo {
  int sweeps = 0;
  double max_group_mean = 0.0;
  // Number of dummy columns each dimension would have contributed, after
  // removing redundancies between dimensions.
  std::vector<Index> dof_per_dimension;
  Index absorbed_dof = 0;
};

// In-place weighted within-transformation of every column of `data` by
// alternating projections over the grouping dimensions. Throws
// ConvergenceError carrying the achieved max group mean.
DemeanInfo demean_columns(Eigen::MatrixXd& data, const Eigen::VectorXd& weights,
                          const GroupLabels& groups, const AbsorbOptions& options = {});

struct AbsorbedData {
  DesignMatrix x;
  Eigen::VectorXd y;
  Index absorbed_dof = 0;
  DemeanInfo info;
};

AbsorbedData absorb_fixed_effects(const DesignMatrix& x, const Eigen::VectorXd& y,
                                  const GroupLabels& groups,
                                  const AbsorbOptions& options = {});

// Dummy columns implied by the fixed effects. One dimension: its group
// count. Two: G1 + G2 minus connected components of the bipartite graph.
// More: sum of counts minus (D - 1), a lower bound on the redundancy.
std::vector<Index> implied_dummy_columns(const GroupLabels& groups,
                                         const Eigen::VectorXd& weights);

// True when every group of `dim` lies inside a single cluster.
bool nested_in_clusters(const GroupLabels& groups, std::size_t dim,
                        const ClusterSpec& clusters);

}  // namespace creditvote::kernel
