#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "senstir/errors.hpp"

namespace senstir {

using FeatureVector = Eigen::VectorXd;

struct Item {
  FeatureVector features;
  double relevance = 0.0;
  std::optional<int> group;  // {0,1}; present iff the dataset declares groups
};

// A candidate set of items under one query id; the unit of ranking.
struct Query {
  std::string id;
  std::vector<Item> items;

  int size() const { return static_cast<int>(items.size()); }
  int feature_dim() const { return items.empty() ? 0 : static_cast<int>(items[0].features.size()); }
  std::vector<double> relevances() const;
};

// A permutation of a query's items. Ranks are 1-based; item indices 0-based.
// rank_of_item and item_at_rank are mutually inverse views.
class Ranking {
 public:
  static Ranking from_item_at_rank(std::vector<int> item_at_rank);
  static Ranking identity(int n);

  int size() const { return static_cast<int>(order_.size()); }
  // rank (1..n) of item index `item`
  int rank_of_item(int item) const { return ranks_[item]; }
  // item index occupying rank `rank` (1..n)
  int item_at_rank(int rank) const { return order_[rank - 1]; }

  const std::vector<int>& ranks() const { return ranks_; }
  const std::vector<int>& order() const { return order_; }

  bool operator==(const Ranking&) const = default;

 private:
  std::vector<int> ranks_;  // ranks_[item] in 1..n
  std::vector<int> order_;  // order_[j] = item at rank j+1
};

struct Dataset {
  std::vector<Query> queries;
  int feature_dim = 0;
  bool has_groups = false;

  std::size_t size() const { return queries.size(); }
};

void validate_query(const Query& q);

// Validates every query, infers feature_dim / has_groups, enforces consistency.
Dataset make_dataset(std::vector<Query> queries);

// Deterministic ranking: descending score, ties broken by ascending item index.
Ranking ranking_from_scores(const Eigen::VectorXd& scores);

// Relevance-descending ranking; attains the maximum DCG for monotone gains.
Ranking ideal_ranking(const Query& q);
Ranking ideal_ranking(const std::vector<double>& relevances);

}  // namespace senstir
