#include "senstir/plackett_luce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace senstir {

namespace {

void check_lengths(const Eigen::VectorXd& scores, const Ranking& r) {
  require(static_cast<int>(scores.size()) == r.size(), ErrorCode::length_mismatch,
          "scores and ranking disagree on n");
  require(scores.allFinite(), ErrorCode::non_finite_score, "scores must be finite");
}

}  // namespace

double pl_log_prob(const Eigen::VectorXd& scores, const Ranking& r) {
  check_lengths(scores, r);
  const int n = r.size();
  // Accumulate logsumexp of the pool from the last stage backwards; the pool
  // at stage j is the set of items ranked >= j.
  double max_s = -std::numeric_limits<double>::infinity();
  double sum_exp = 0.0;
  double log_prob = 0.0;
  for (int j = n; j >= 1; --j) {
    const double s = scores[r.item_at_rank(j)];
    if (s > max_s) {
      sum_exp = sum_exp * std::exp(max_s - s) + 1.0;
      max_s = s;
    } else {
      sum_exp += std::exp(s - max_s);
    }
    log_prob += s - (max_s + std::log(sum_exp));
  }
  return log_prob;
}

Eigen::VectorXd pl_log_prob_grad_scores(const Eigen::VectorXd& scores, const Ranking& r) {
  check_lengths(scores, r);
  const int n = r.size();
  Eigen::VectorXd grad = Eigen::VectorXd::Ones(n);
  // Item d takes part in stages 1..rank(d); at each stage it loses its
  // softmax weight within the surviving pool.
  for (int j = 1; j <= n; ++j) {
    double max_s = -std::numeric_limits<double>::infinity();
    for (int k = j; k <= n; ++k) max_s = std::max(max_s, scores[r.item_at_rank(k)]);
    double denom = 0.0;
    for (int k = j; k <= n; ++k) denom += std::exp(scores[r.item_at_rank(k)] - max_s);
    for (int k = j; k <= n; ++k) {
      const int item = r.item_at_rank(k);
      grad[item] -= std::exp(scores[item] - max_s) / denom;
    }
  }
  return grad;
}

Ranking pl_sample(const Eigen::VectorXd& scores, RandomStream& rng) {
  require(scores.allFinite(), ErrorCode::non_finite_score, "scores must be finite");
  const int n = static_cast<int>(scores.size());
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> order;
  order.reserve(n);
  for (int stage = 0; stage < n; ++stage) {
    const double u = rng.uniform01();
    double max_s = -std::numeric_limits<double>::infinity();
    for (int item : pool) max_s = std::max(max_s, scores[item]);
    double total = 0.0;
    for (int item : pool) total += std::exp(scores[item] - max_s);
    // inverse CDF walk in pool (ascending item index) order
    const double threshold = u * total;
    double acc = 0.0;
    std::size_t chosen = pool.size() - 1;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      acc += std::exp(scores[pool[k]] - max_s);
      if (acc > threshold) {
        chosen = k;
        break;
      }
    }
    order.push_back(pool[chosen]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(chosen));
  }
  return Ranking::from_item_at_rank(std::move(order));
}

std::vector<std::pair<Ranking, double>> pl_enumerate(const Eigen::VectorXd& scores) {
  const int n = static_cast<int>(scores.size());
  require(n >= 1 && n <= 8, ErrorCode::too_large, "enumeration guarded at n <= 8");
  require(scores.allFinite(), ErrorCode::non_finite_score, "scores must be finite");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::pair<Ranking, double>> out;
  do {
    Ranking r = Ranking::from_item_at_rank(order);
    out.emplace_back(r, std::exp(pl_log_prob(scores, r)));
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

}  // namespace senstir
