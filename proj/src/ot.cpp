#include "senstir/ot.hpp"

#include <cmath>
#include <limits>

#include "senstir/errors.hpp"

namespace senstir {

AssignmentResult solve_assignment(const CostMatrix& cost) {
  const int n = static_cast<int>(cost.rows());
  require(n >= 1, ErrorCode::too_short, "empty cost matrix");
  require(cost.cols() == n, ErrorCode::shape_mismatch, "cost matrix must be square");
  require(cost.allFinite(), ErrorCode::invalid_config, "cost matrix has non-finite entries");

  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based with column 0 as the staging slot for the row being inserted.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  AssignmentResult out;
  out.assignment.assign(n, -1);
  for (int j = 1; j <= n; ++j) out.assignment[match[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) out.value += cost(i, out.assignment[i]);
  out.row_potential.assign(u.begin() + 1, u.end());
  out.col_potential.assign(v.begin() + 1, v.end());
  return out;
}

TransportPlan query_distance(const FairItemMetric& m, const Query& q, const Query& q2) {
  const int n = static_cast<int>(q.size());
  require(n == static_cast<int>(q2.size()), ErrorCode::size_mismatch,
          "queries must have the same number of items");

  CostMatrix cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cost(i, j) = item_distance(m, q.items[i].features, q2.items[j].features);

  AssignmentResult match = solve_assignment(cost);
  TransportPlan plan;
  plan.assignment = std::move(match.assignment);
  plan.value = match.value / n;
  plan.coupling = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) plan.coupling(i, plan.assignment[i]) = 1.0 / n;
  return plan;
}

std::vector<FeatureVector> query_distance_grad(const FairItemMetric& m, const Query& q,
                                               const Query& q2, const TransportPlan& plan) {
  const int n = static_cast<int>(q.size());
  require(n == static_cast<int>(q2.size()), ErrorCode::size_mismatch,
          "queries must have the same number of items");
  require(plan.coupling.rows() == n && plan.coupling.cols() == n, ErrorCode::stale_plan,
          "transport plan does not match the query sizes");
  constexpr double kMarginalTol = 1e-12;
  for (int i = 0; i < n; ++i) {
    const bool ok = std::abs(plan.coupling.row(i).sum() - 1.0 / n) < kMarginalTol &&
                    std::abs(plan.coupling.col(i).sum() - 1.0 / n) < kMarginalTol;
    require(ok, ErrorCode::stale_plan, "transport plan marginals are not uniform");
  }

  std::vector<FeatureVector> grad(n, FeatureVector::Zero(q.feature_dim()));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double mass = plan.coupling(i, j);
      if (mass == 0.0) continue;
      grad[j] += mass * item_distance_grad2(m, q.items[i].features, q2.items[j].features);
    }
  return grad;
}

}  // namespace senstir
