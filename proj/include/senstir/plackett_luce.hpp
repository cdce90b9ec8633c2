#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "senstir/core.hpp"
#include "senstir/rng.hpp"

namespace senstir {

// Log-probability of ranking r under the Plackett-Luce model with the given
// item scores: sum over stages of (score of chosen item - logsumexp of the
// remaining pool). Always <= 0.
double pl_log_prob(const Eigen::VectorXd& scores, const Ranking& r);

// Gradient of pl_log_prob in the scores. Entries sum to zero.
Eigen::VectorXd pl_log_prob_grad_scores(const Eigen::VectorXd& scores, const Ranking& r);

// Sequential softmax sampling without replacement. Consumes exactly one
// uniform variate per stage (n draws for n items).
Ranking pl_sample(const Eigen::VectorXd& scores, RandomStream& rng);

// All n! rankings with exact probabilities; guard at n <= 8. Test oracle.
std::vector<std::pair<Ranking, double>> pl_enumerate(const Eigen::VectorXd& scores);

}  // namespace senstir
