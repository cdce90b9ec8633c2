#include "senstir/ranking_metrics.hpp"

#include <cmath>

#include "senstir/errors.hpp"
#include "senstir/plackett_luce.hpp"

namespace senstir {

double position_bias(int rank) {
  require(rank >= 1, ErrorCode::invalid_config, "ranks are 1-based");
  return 1.0 / std::log2(1.0 + rank);
}

double dcg(const Ranking& r, const std::vector<double>& relevances) {
  require(relevances.size() == static_cast<size_t>(r.size()), ErrorCode::length_mismatch,
          "relevance list does not match ranking size");
  double total = 0.0;
  for (int rank = 1; rank <= r.size(); ++rank) {
    const double rel = relevances[r.item_at_rank(rank)];
    require(rel >= 0.0, ErrorCode::negative_relevance, "negative relevance");
    total += (std::exp2(rel) - 1.0) / std::log2(rank + 1.0);
  }
  return total;
}

double ndcg(const Ranking& r, const std::vector<double>& relevances) {
  const double ideal = dcg(ideal_ranking(relevances), relevances);
  if (ideal == 0.0) return 1.0;
  return dcg(r, relevances) / ideal;
}

double stochastic_ndcg(const Eigen::VectorXd& scores, const std::vector<double>& relevances,
                       int n_samples, RandomStream& rng) {
  require(n_samples >= 1, ErrorCode::invalid_config, "need at least one sample");
  require(static_cast<size_t>(scores.size()) == relevances.size(), ErrorCode::length_mismatch,
          "scores and relevances differ in length");
  double total = 0.0;
  for (int s = 0; s < n_samples; ++s) total += ndcg(pl_sample(scores, rng), relevances);
  return total / n_samples;
}

double stochastic_ndcg(const LinearPolicy& policy, const Query& q, int n_samples,
                       RandomStream& rng) {
  return stochastic_ndcg(policy.scores(q), q.relevances(), n_samples, rng);
}

namespace {

double sign_of(int delta) { return delta > 0 ? 1.0 : (delta < 0 ? -1.0 : 0.0); }

// One direction of the weighted tau; `ref` supplies the pair weights when
// weighting by rank.
double weighted_tau_one_sided(const Ranking& ref, const Ranking& other, TauWeighting weighting) {
  const int n = ref.size();
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double w = weighting == TauWeighting::rank_in_reference
                           ? 1.0 / ref.rank_of_item(i) + 1.0 / ref.rank_of_item(j)
                           : 1.0 / (i + 1) + 1.0 / (j + 1);
      num += w * sign_of(ref.rank_of_item(i) - ref.rank_of_item(j)) *
             sign_of(other.rank_of_item(i) - other.rank_of_item(j));
      den += w;
    }
  return num / den;
}

void check_tau_args(const Ranking& a, const Ranking& b) {
  require(a.size() == b.size(), ErrorCode::size_mismatch, "rankings differ in length");
  require(a.size() >= 2, ErrorCode::too_short, "tau needs at least two items");
}

}  // namespace

double kendall_tau(const Ranking& a, const Ranking& b) {
  check_tau_args(a, b);
  const int n = a.size();
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      total += sign_of(a.rank_of_item(i) - a.rank_of_item(j)) *
               sign_of(b.rank_of_item(i) - b.rank_of_item(j));
  return total / (0.5 * n * (n - 1));
}

double weighted_kendall_tau(const Ranking& a, const Ranking& b, TauWeighting weighting) {
  check_tau_args(a, b);
  return 0.5 * (weighted_tau_one_sided(a, b, weighting) + weighted_tau_one_sided(b, a, weighting));
}

ExposureSpec ExposureSpec::defaults() {
  ExposureSpec spec;
  spec.position_bias_fn = [](int rank) { return position_bias(rank); };
  spec.merit_fn = [](double rel) { return rel; };
  return spec;
}

double group_exposure_disparity(const std::vector<Ranking>& rankings, const Query& q,
                                const ExposureSpec& spec) {
  require(!rankings.empty(), ErrorCode::too_short, "need at least one ranking");
  for (const Ranking& r : rankings)
    require(r.size() == q.size(), ErrorCode::size_mismatch, "ranking does not match query size");

  int count[2] = {0, 0};
  double merit[2] = {0.0, 0.0};
  double expo[2] = {0.0, 0.0};
  for (int d = 0; d < q.size(); ++d) {
    const Item& item = q.items[d];
    require(item.group.has_value(), ErrorCode::missing_groups, "item without group attribute");
    require(*item.group == 0 || *item.group == 1, ErrorCode::invalid_config,
            "group attributes must be 0 or 1");
    const int g = *item.group;
    ++count[g];
    merit[g] += spec.merit_fn(item.relevance);
    for (const Ranking& r : rankings) expo[g] += spec.position_bias_fn(r.rank_of_item(d));
  }
  if (count[0] == 0 || count[1] == 0) return 0.0;
  const double mean_merit[2] = {merit[0] / count[0], merit[1] / count[1]};
  if (mean_merit[0] == 0.0 || mean_merit[1] == 0.0) return 0.0;
  const double ratio[2] = {
      expo[0] / (rankings.size() * count[0]) / mean_merit[0],
      expo[1] / (rankings.size() * count[1]) / mean_merit[1],
  };
  // The advantaged group is the one with higher mean merit; a tie counts
  // group 0 as advantaged.
  const int adv = mean_merit[0] >= mean_merit[1] ? 0 : 1;
  return std::max(0.0, ratio[adv] - ratio[1 - adv]);
}

}  // namespace senstir
