#pragma once

#include <Eigen/Core>
#include <vector>

#include "senstir/core.hpp"
#include "senstir/fair_metric.hpp"

namespace senstir {

using CostMatrix = Eigen::MatrixXd;

struct AssignmentResult {
  std::vector<int> assignment;  // column matched to each row
  double value = 0.0;           // raw min-sum cost
  // Dual potentials: cost(i, j) >= row_potential[i] + col_potential[j] for all
  // pairs, with equality on matched edges.  An edge lies in some optimal
  // matching iff its reduced cost is zero.
  std::vector<double> row_potential;
  std::vector<double> col_potential;
};

// Exact minimum-cost perfect matching on a square cost matrix (shortest
// augmenting paths with potentials, O(n^3)).  Scanning is in ascending column
// order with strict improvement, so ties resolve to the lowest index.
AssignmentResult solve_assignment(const CostMatrix& cost);

struct TransportPlan {
  Eigen::MatrixXd coupling;     // n x n, (1/n) * permutation matrix
  std::vector<int> assignment;  // assignment[i] = item of q2 matched to item i of q
  double value = 0.0;           // (1/n) * min-sum item distance
};

// Optimal-transport distance between equal-size queries under uniform item
// weights; the cost of pairing items is the fair item metric.
TransportPlan query_distance(const FairItemMetric& m, const Query& q, const Query& q2);

// Gradient of the transport value in the features of q2, one vector per item:
// grad[j] = sum_i coupling(i, j) * d/dx2 item_distance(x_i, x2_j).
// The plan must carry uniform marginals matching the query sizes.
std::vector<FeatureVector> query_distance_grad(const FairItemMetric& m, const Query& q,
                                               const Query& q2, const TransportPlan& plan);

}  // namespace senstir
