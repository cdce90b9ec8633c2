#include "senstir/eval.hpp"

#include <cmath>
#include <limits>

#include "senstir/errors.hpp"
#include "senstir/ot.hpp"
#include "senstir/parallel.hpp"
#include "senstir/plackett_luce.hpp"

namespace senstir {

namespace {

Query flipped_query(const Query& q, int column) {
  Query out = q;
  for (Item& item : out.items) item.features[column] = 1.0 - item.features[column];
  return out;
}

// Ranking of q2's items re-indexed onto q's items through the transport
// assignment, so the two rankings are comparable position by position.
Ranking pull_back_ranking(const Ranking& r2, const std::vector<int>& assignment) {
  const int n = r2.size();
  std::vector<int> item_at_rank(n);
  for (int i = 0; i < n; ++i) item_at_rank[r2.rank_of_item(assignment[i]) - 1] = i;
  return Ranking::from_item_at_rank(std::move(item_at_rank));
}

// The cheapest matching under the fair metric is often non-unique (in one
// effective dimension any non-crossing regrouping ties exactly), and an
// arbitrary optimum injects spurious discordant pairs into the rank
// comparison.  Among the matchings attaining the optimal cost — the edges
// with zero reduced cost under the dual potentials — pick the one minimizing
// total squared fair distance, which is strictly convex and so selects the
// geometrically closest (monotone) pairing.
std::vector<int> canonical_alignment(const FairItemMetric& m, const Query& q, const Query& q2) {
  const int n = static_cast<int>(q.size());
  CostMatrix primary(n, n), squared(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d = item_distance(m, q.items[i].features, q2.items[j].features);
      primary(i, j) = d;
      squared(i, j) = m.mode() == MetricMode::squared ? d : d * d;
    }
  const AssignmentResult first = solve_assignment(primary);
  const double tol = 1e-9 * (1.0 + primary.maxCoeff());
  const double blocked = n * (squared.maxCoeff() + 1.0) + 1.0;
  CostMatrix tie(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double reduced = primary(i, j) - first.row_potential[i] - first.col_potential[j];
      tie(i, j) = reduced <= tol ? squared(i, j) : blocked;
    }
  const AssignmentResult second = solve_assignment(tie);
  double check = 0.0;
  for (int i = 0; i < n; ++i) check += primary(i, second.assignment[i]);
  return check <= first.value + n * tol ? second.assignment : first.assignment;
}

}  // namespace

EvalSummary evaluate(const LinearPolicy& policy, const Dataset& data,
                     const FairItemMetric* metric, const EvalOptions& opt) {
  require(!data.queries.empty(), ErrorCode::invalid_config, "empty dataset");
  require(policy.theta.size() == data.feature_dim, ErrorCode::dimension_mismatch,
          "policy dimension does not match the dataset");
  require(opt.pl_samples >= 1, ErrorCode::invalid_config, "pl_samples must be >= 1");
  if (opt.hypothetical == HypotheticalMode::group_flip)
    require(opt.flip_column >= 0 && opt.flip_column < data.feature_dim,
            ErrorCode::invalid_config, "flip_column out of range");
  if (opt.hypothetical == HypotheticalMode::nearest_fair_neighbor) {
    require(metric != nullptr, ErrorCode::invalid_config,
            "nearest_fair_neighbor needs a fair metric");
    require(metric->dim() == data.feature_dim, ErrorCode::dimension_mismatch,
            "metric dimension does not match the dataset");
  }
  if (opt.exposure)
    require(data.has_groups, ErrorCode::missing_groups,
            "exposure disparity needs group annotations");

  const int num_queries = static_cast<int>(data.queries.size());
  RandomStream root(opt.seed);
  RandomStream eval_stream = root.sub("eval");

  EvalSummary summary;
  summary.per_query.resize(num_queries);
  parallel_for(num_queries, [&](int qi) {
    const Query& q = data.queries[qi];
    QueryEval& row = summary.per_query[qi];
    row.query_id = q.id;

    const Eigen::VectorXd scores = policy.scores(q);
    const std::vector<double> rels = q.relevances();
    RandomStream rng = eval_stream.sub(q.id);
    std::vector<Ranking> samples;
    samples.reserve(opt.pl_samples);
    double ndcg_sum = 0.0;
    for (int s = 0; s < opt.pl_samples; ++s) {
      samples.push_back(pl_sample(scores, rng));
      ndcg_sum += ndcg(samples.back(), rels);
    }
    row.ndcg_stochastic = ndcg_sum / opt.pl_samples;
    if (opt.exposure) row.exposure_disparity = group_exposure_disparity(samples, q);

    if (opt.hypothetical == HypotheticalMode::none) return;
    const Ranking base = ranking_from_scores(scores);
    if (opt.hypothetical == HypotheticalMode::group_flip) {
      const Query q2 = flipped_query(q, opt.flip_column);
      const Ranking other = ranking_from_scores(policy.scores(q2));
      row.kendall_tau = kendall_tau(base, other);
      row.kendall_tau_weighted = weighted_kendall_tau(base, other, opt.tau_weighting);
      return;
    }

    // Nearest fair neighbor: the closest other equal-size query under d_Q.
    int best = -1;
    double best_dq = std::numeric_limits<double>::infinity();
    for (int other = 0; other < num_queries; ++other) {
      if (other == qi || data.queries[other].size() != q.size()) continue;
      const double dq = query_distance(*metric, q, data.queries[other]).value;
      if (dq < best_dq) {
        best_dq = dq;
        best = other;
      }
    }
    if (best < 0) return;  // no comparable query; tau stays unset
    const Query& q2 = data.queries[best];
    const std::vector<int> alignment = canonical_alignment(*metric, q, q2);
    const Ranking other = pull_back_ranking(ranking_from_scores(policy.scores(q2)), alignment);
    row.kendall_tau = kendall_tau(base, other);
    row.kendall_tau_weighted = weighted_kendall_tau(base, other, opt.tau_weighting);
  });

  double ndcg_total = 0.0, tau_total = 0.0, wtau_total = 0.0, disp_total = 0.0;
  int tau_count = 0;
  for (const QueryEval& row : summary.per_query) {
    ndcg_total += row.ndcg_stochastic;
    if (row.exposure_disparity) disp_total += *row.exposure_disparity;
    if (row.kendall_tau) {
      tau_total += *row.kendall_tau;
      wtau_total += *row.kendall_tau_weighted;
      ++tau_count;
    }
  }
  summary.ndcg_stochastic = ndcg_total / num_queries;
  if (opt.exposure) summary.exposure_disparity = disp_total / num_queries;
  if (tau_count > 0) {
    summary.kendall_tau = tau_total / tau_count;
    summary.kendall_tau_weighted = wtau_total / tau_count;
  }
  return summary;
}

double sensitive_weight_ratio(const LinearPolicy& policy, const SensitiveSubspace& subspace) {
  require(policy.theta.size() == subspace.dim(), ErrorCode::dimension_mismatch,
          "policy dimension does not match the subspace");
  const Eigen::VectorXd in_subspace = subspace.basis.transpose() * policy.theta;
  const double complement_norm = (policy.theta - subspace.basis * in_subspace).norm();
  return in_subspace.norm() / complement_norm;
}

}  // namespace senstir
