#include "senstir/policy_gradient.hpp"

#include <cmath>

#include "senstir/errors.hpp"
#include "senstir/plackett_luce.hpp"
#include "senstir/ranking_metrics.hpp"

namespace senstir {

Eigen::VectorXd LinearPolicy::scores(const Query& q) const {
  require(theta.size() == q.feature_dim(), ErrorCode::dimension_mismatch,
          "policy dimension does not match query features");
  Eigen::VectorXd s(q.size());
  for (size_t d = 0; d < q.size(); ++d) s(d) = theta.dot(q.items[d].features);
  require(s.allFinite(), ErrorCode::non_finite_score, "policy produced non-finite scores");
  return s;
}

GradEstimate utility_grad_estimate(const Eigen::VectorXd& scores,
                                   const std::vector<double>& relevances,
                                   const UtilitySpec& spec, RandomStream& rng) {
  require(spec.mc_samples >= 1, ErrorCode::invalid_config, "need at least one sample");
  require(!spec.use_baseline || spec.mc_samples >= 2, ErrorCode::baseline_needs_samples,
          "leave-one-out baseline needs at least two samples");
  require(static_cast<size_t>(scores.size()) == relevances.size(), ErrorCode::length_mismatch,
          "scores and relevances differ in length");

  const int N = spec.mc_samples;
  std::vector<double> utility(N);
  std::vector<Eigen::VectorXd> logp_grad(N);
  double total = 0.0;
  for (int k = 0; k < N; ++k) {
    const Ranking r = pl_sample(scores, rng);
    utility[k] = ndcg(r, relevances);
    logp_grad[k] = pl_log_prob_grad_scores(scores, r);
    total += utility[k];
  }

  GradEstimate out;
  out.mean_utility = total / N;
  const double baseline = spec.use_baseline ? out.mean_utility : 0.0;
  out.grad = Eigen::VectorXd::Zero(scores.size());
  for (int k = 0; k < N; ++k) out.grad += (utility[k] - baseline) * logp_grad[k];
  out.grad /= N;
  return out;
}

double utility_exact(const Eigen::VectorXd& scores, const std::vector<double>& relevances) {
  require(static_cast<size_t>(scores.size()) == relevances.size(), ErrorCode::length_mismatch,
          "scores and relevances differ in length");
  double expected = 0.0;
  for (const auto& [r, prob] : pl_enumerate(scores)) expected += prob * ndcg(r, relevances);
  return expected;
}

Eigen::VectorXd utility_grad_exact(const Eigen::VectorXd& scores,
                                   const std::vector<double>& relevances) {
  require(static_cast<size_t>(scores.size()) == relevances.size(), ErrorCode::length_mismatch,
          "scores and relevances differ in length");
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(scores.size());
  for (const auto& [r, prob] : pl_enumerate(scores))
    grad += prob * ndcg(r, relevances) * pl_log_prob_grad_scores(scores, r);
  return grad;
}

PolicyGradEstimate policy_utility_grad(const LinearPolicy& policy, const Query& q,
                                       const UtilitySpec& spec, RandomStream& rng) {
  const GradEstimate est = utility_grad_estimate(policy.scores(q), q.relevances(), spec, rng);
  PolicyGradEstimate out;
  out.mean_utility = est.mean_utility;
  out.grad_theta = Eigen::VectorXd::Zero(policy.theta.size());
  for (size_t d = 0; d < q.size(); ++d) out.grad_theta += est.grad(d) * q.items[d].features;
  return out;
}

}  // namespace senstir
