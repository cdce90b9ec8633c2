#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "senstir/core.hpp"
#include "senstir/policy_gradient.hpp"
#include "senstir/rng.hpp"

namespace senstir {

// Position bias at a 1-based rank: 1 / log2(1 + rank).
double position_bias(int rank);

// Discounted cumulative gain with (2^rel - 1) gains and log2(rank + 1) discounts.
double dcg(const Ranking& r, const std::vector<double>& relevances);

// DCG normalized by the relevance-sorted ideal; defined as 1 when every
// relevance is zero.
double ndcg(const Ranking& r, const std::vector<double>& relevances);

// Mean NDCG over rankings sampled from the Plackett-Luce policy at `scores`.
double stochastic_ndcg(const Eigen::VectorXd& scores, const std::vector<double>& relevances,
                       int n_samples, RandomStream& rng);
double stochastic_ndcg(const LinearPolicy& policy, const Query& q, int n_samples,
                       RandomStream& rng);

// Pairwise rank agreement in [-1, 1]: mean over item pairs of the product of
// order signs in the two rankings.
double kendall_tau(const Ranking& a, const Ranking& b);

// Which (i, j) the pair weight 1/i + 1/j refers to.  rank_in_reference reads
// them as the pair's ranks (top ranks weigh most), item_index as the 1-based
// item identifiers.  Both variants are symmetrized over the two rankings and
// normalized by the total pair weight, so the diagonal value is exactly 1.
enum class TauWeighting { rank_in_reference, item_index };

double weighted_kendall_tau(const Ranking& a, const Ranking& b,
                            TauWeighting weighting = TauWeighting::rank_in_reference);

struct ExposureSpec {
  std::function<double(int)> position_bias_fn;  // of 1-based rank
  std::function<double(double)> merit_fn;       // of relevance

  static ExposureSpec defaults();
};

// Disparity of group exposure for N sampled rankings of one query: with each
// group's merit the mean merit_fn(rel) over its items and its exposure the
// mean position bias over items and rankings, the advantaged group is the one
// with higher mean merit and the result is max{0, advantaged exposure/merit
// ratio - disadvantaged ratio}; 0 whenever either group is empty or has zero
// merit.
double group_exposure_disparity(const std::vector<Ranking>& rankings, const Query& q,
                                const ExposureSpec& spec = ExposureSpec::defaults());

}  // namespace senstir
