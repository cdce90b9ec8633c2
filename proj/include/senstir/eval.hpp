#pragma once

#include <optional>
#include <string>
#include <vector>

#include "senstir/core.hpp"
#include "senstir/fair_metric.hpp"
#include "senstir/policy_gradient.hpp"
#include "senstir/ranking_metrics.hpp"

namespace senstir {

// Counterfactual used for the ranking-stability comparison: none, flip one
// binary feature column (x -> 1 - x), or the closest other query under the
// fair query distance with items aligned by its transport assignment.
enum class HypotheticalMode { none, group_flip, nearest_fair_neighbor };

struct EvalOptions {
  int pl_samples = 25;  // Plackett-Luce draws per query
  HypotheticalMode hypothetical = HypotheticalMode::none;
  int flip_column = -1;  // feature column flipped in group_flip mode
  bool exposure = false;
  TauWeighting tau_weighting = TauWeighting::rank_in_reference;
  std::uint64_t seed = 0;
};

struct QueryEval {
  std::string query_id;
  double ndcg_stochastic = 0.0;
  std::optional<double> kendall_tau;
  std::optional<double> kendall_tau_weighted;
  std::optional<double> exposure_disparity;
};

struct EvalSummary {
  double ndcg_stochastic = 0.0;
  std::optional<double> kendall_tau;           // mean over queries with a hypothetical
  std::optional<double> kendall_tau_weighted;
  std::optional<double> exposure_disparity;    // mean over queries, when requested
  std::vector<QueryEval> per_query;
};

// Evaluates the policy query by query: stochastic NDCG (and, if requested,
// group-exposure disparity) over pl_samples sampled rankings, plus the
// deterministic Kendall agreement between each query's ranking and its
// hypothetical's. `metric` is required only for nearest_fair_neighbor.
// Sampling streams are derived per query id from the seed, so results do not
// depend on query order.
EvalSummary evaluate(const LinearPolicy& policy, const Dataset& data,
                     const FairItemMetric* metric, const EvalOptions& opt);

// ||B^T theta|| / ||(I - B B^T) theta||: how much of the policy weight lives
// in the sensitive subspace relative to its complement.
double sensitive_weight_ratio(const LinearPolicy& policy, const SensitiveSubspace& subspace);

}  // namespace senstir
