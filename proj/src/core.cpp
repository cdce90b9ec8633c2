#include "senstir/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace senstir {

std::vector<double> Query::relevances() const {
  std::vector<double> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) out[i] = items[i].relevance;
  return out;
}

Ranking Ranking::from_item_at_rank(std::vector<int> item_at_rank) {
  const int n = static_cast<int>(item_at_rank.size());
  require(n >= 1, ErrorCode::invalid_config, "ranking needs at least one item");
  std::vector<int> ranks(n, 0);
  for (int j = 0; j < n; ++j) {
    const int item = item_at_rank[j];
    require(item >= 0 && item < n, ErrorCode::invalid_config, "item index out of range");
    require(ranks[item] == 0, ErrorCode::invalid_config, "item appears twice in ranking");
    ranks[item] = j + 1;
  }
  Ranking r;
  r.order_ = std::move(item_at_rank);
  r.ranks_ = std::move(ranks);
  return r;
}

Ranking Ranking::identity(int n) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  return from_item_at_rank(std::move(order));
}

void validate_query(const Query& q) {
  require(!q.items.empty(), ErrorCode::invalid_config, "query '" + q.id + "' has no items");
  const auto p = q.items[0].features.size();
  for (std::size_t i = 0; i < q.items.size(); ++i) {
    const Item& it = q.items[i];
    require(it.features.size() == p, ErrorCode::dimension_mismatch,
            "query '" + q.id + "': item " + std::to_string(i) + " has dimension " +
                std::to_string(it.features.size()) + ", expected " + std::to_string(p));
    require(it.features.allFinite(), ErrorCode::non_finite_feature,
            "query '" + q.id + "': item " + std::to_string(i) + " has a non-finite feature");
    require(std::isfinite(it.relevance) && it.relevance >= 0.0, ErrorCode::negative_relevance,
            "query '" + q.id + "': item " + std::to_string(i) + " has invalid relevance");
  }
}

Dataset make_dataset(std::vector<Query> queries) {
  require(!queries.empty(), ErrorCode::invalid_config, "dataset is empty");
  Dataset ds;
  ds.feature_dim = queries[0].feature_dim();
  const bool groups = queries[0].items[0].group.has_value();
  for (const Query& q : queries) {
    validate_query(q);
    require(q.feature_dim() == ds.feature_dim, ErrorCode::dimension_mismatch,
            "query '" + q.id + "' has inconsistent feature dimension");
    for (const Item& it : q.items)
      require(it.group.has_value() == groups, ErrorCode::invalid_config,
              "query '" + q.id + "': group labels must be present on all items or none");
  }
  ds.has_groups = groups;
  ds.queries = std::move(queries);
  return ds;
}

Ranking ranking_from_scores(const Eigen::VectorXd& scores) {
  require(scores.allFinite(), ErrorCode::non_finite_score, "scores must be finite");
  const int n = static_cast<int>(scores.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return Ranking::from_item_at_rank(std::move(order));
}

Ranking ideal_ranking(const Query& q) {
  validate_query(q);
  return ideal_ranking(q.relevances());
}

Ranking ideal_ranking(const std::vector<double>& relevances) {
  const int n = static_cast<int>(relevances.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return relevances[a] > relevances[b]; });
  return Ranking::from_item_at_rank(std::move(order));
}

}  // namespace senstir
