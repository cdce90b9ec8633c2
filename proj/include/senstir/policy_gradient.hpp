#pragma once

#include <Eigen/Core>
#include <vector>

#include "senstir/core.hpp"
#include "senstir/rng.hpp"

namespace senstir {

// Linear scoring function h(x) = theta . x applied per item.
struct LinearPolicy {
  Eigen::VectorXd theta;

  Eigen::VectorXd scores(const Query& q) const;
};

enum class UtilityMetric { ndcg };

struct UtilitySpec {
  UtilityMetric metric = UtilityMetric::ndcg;
  int mc_samples = 10;
  bool use_baseline = true;
};

// Score-space REINFORCE estimate of the expected utility gradient.
struct GradEstimate {
  Eigen::VectorXd grad;     // d utility / d scores
  double mean_utility = 0;  // plain Monte-Carlo mean of the utility samples
};

// (1/N) sum_k (U(r_k) - b) grad log pi(r_k); the baseline b is the in-batch
// Monte-Carlo mean of the N utilities. Centering introduces O(1/N) bias but
// cuts variance; the no-baseline path is exactly unbiased.
GradEstimate utility_grad_estimate(const Eigen::VectorXd& scores,
                                   const std::vector<double>& relevances,
                                   const UtilitySpec& spec, RandomStream& rng);

// Exact expected utility and its score gradient by enumerating every ranking;
// guarded to small item counts.
double utility_exact(const Eigen::VectorXd& scores, const std::vector<double>& relevances);
Eigen::VectorXd utility_grad_exact(const Eigen::VectorXd& scores,
                                   const std::vector<double>& relevances);

// Chain rule through the linear policy: grad_theta = X^T grad_scores.
struct PolicyGradEstimate {
  Eigen::VectorXd grad_theta;
  double mean_utility = 0;
};

PolicyGradEstimate policy_utility_grad(const LinearPolicy& policy, const Query& q,
                                       const UtilitySpec& spec, RandomStream& rng);

}  // namespace senstir
