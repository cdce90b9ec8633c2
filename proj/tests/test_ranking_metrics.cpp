#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "senstir/plackett_luce.hpp"
#include "senstir/policy_gradient.hpp"
#include "senstir/ranking_metrics.hpp"
#include "senstir/rng.hpp"

using namespace senstir;
using test::item;
using test::query;
using test::thrown_code;

TEST_CASE("dcg evaluates the gain-discount sum") {
  CHECK(dcg(Ranking::identity(2), {1.0, 0.0}) == doctest::Approx(1.0));
  CHECK(dcg(Ranking::identity(3), {0.0, 0.0, 0.0}) == 0.0);
  CHECK(dcg(Ranking::identity(2), {0.0, 1.0}) ==
        doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-12));
  CHECK(thrown_code([] { dcg(Ranking::identity(2), {1.0}); }) == ErrorCode::length_mismatch);
}

TEST_CASE("ndcg is 1 on the ideal ranking and on constant relevances") {
  RandomStream rng(401);
  const Query q = test::random_query(rng, 5, 2);
  CHECK(ndcg(ideal_ranking(q), q.relevances()) == doctest::Approx(1.0).epsilon(1e-12));
  for (const Ranking& r : test::all_rankings(3)) {
    CHECK(ndcg(r, {2.0, 2.0, 2.0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ndcg(r, {0.0, 0.0, 0.0}) == 1.0);  // vacuous query counts as perfectly ranked
  }
}

TEST_CASE("ndcg of the worst two-item ranking") {
  const Ranking worst = Ranking::from_item_at_rank({1, 0});
  CHECK(ndcg(worst, {1.0, 0.0}) == doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-9));
}

TEST_CASE("ndcg lies in [0,1] and the ideal ranking dominates") {
  RandomStream rng(409);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(5));
    const Query q = test::random_query(rng, n, 2);
    const std::vector<double> rels = q.relevances();
    for (const Ranking& r : test::all_rankings(n)) {
      const double v = ndcg(r, rels);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
      CHECK(dcg(r, rels) <= dcg(ideal_ranking(rels), rels) + 1e-12);
    }
  }
}

TEST_CASE("stochastic_ndcg is exactly 1 on constant relevances") {
  RandomStream rng(419);
  const Eigen::VectorXd s =
      Eigen::VectorXd::NullaryExpr(4, [&](Eigen::Index) { return rng.uniform(-1, 1); });
  CHECK(stochastic_ndcg(s, {1.0, 1.0, 1.0, 1.0}, 50, rng) == 1.0);
}

TEST_CASE("stochastic_ndcg is deterministic for a fixed stream") {
  const Eigen::VectorXd s = (Eigen::VectorXd(3) << 0.5, -0.1, 0.2).finished();
  RandomStream a(421), b(421);
  CHECK(stochastic_ndcg(s, {1.0, 0.0, 2.0}, 100, a) ==
        stochastic_ndcg(s, {1.0, 0.0, 2.0}, 100, b));
}

TEST_CASE("stochastic_ndcg converges to the enumerated expectation") {
  const Eigen::VectorXd s = (Eigen::VectorXd(4) << 0.3, -0.5, 0.8, 0.0).finished();
  const std::vector<double> rels{2.0, 0.0, 1.0, 3.0};
  const double exact = utility_exact(s, rels);
  RandomStream rng(431);
  CHECK(stochastic_ndcg(s, rels, 20000, rng) == doctest::Approx(exact).epsilon(0.01));
}

TEST_CASE("kendall_tau on identical, reversed, and near rankings") {
  const Ranking r = Ranking::identity(3);
  CHECK(kendall_tau(r, r) == 1.0);
  CHECK(kendall_tau(r, Ranking::from_item_at_rank({2, 1, 0})) == -1.0);
  // swapping the ranks of the first two items flips one of three pairs
  CHECK(kendall_tau(r, Ranking::from_item_at_rank({1, 0, 2})) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("kendall_tau requires at least two items and equal sizes") {
  CHECK(thrown_code([] { kendall_tau(Ranking::identity(1), Ranking::identity(1)); }) ==
        ErrorCode::too_short);
  CHECK(thrown_code([] { kendall_tau(Ranking::identity(3), Ranking::identity(2)); }) ==
        ErrorCode::size_mismatch);
}

TEST_CASE("both tau variants are symmetric and 1 on the diagonal") {
  RandomStream rng(433);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(6));
    const auto shuffle = [&] {
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      for (int i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_index(static_cast<std::size_t>(i) + 1)]);
      return Ranking::from_item_at_rank(order);
    };
    const Ranking a = shuffle(), b = shuffle();
    CHECK(kendall_tau(a, b) == doctest::Approx(kendall_tau(b, a)).epsilon(1e-12));
    CHECK(kendall_tau(a, a) == 1.0);
    for (TauWeighting w : {TauWeighting::rank_in_reference, TauWeighting::item_index}) {
      CHECK(weighted_kendall_tau(a, b, w) ==
            doctest::Approx(weighted_kendall_tau(b, a, w)).epsilon(1e-12));
      CHECK(weighted_kendall_tau(a, a, w) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(weighted_kendall_tau(a, b, w)) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("weighted_kendall_tau reverses to -1") {
  const Ranking r = Ranking::identity(5);
  const Ranking rev = Ranking::from_item_at_rank({4, 3, 2, 1, 0});
  CHECK(weighted_kendall_tau(r, rev) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("weighted_kendall_tau penalizes top swaps more than bottom swaps") {
  const Ranking base = Ranking::identity(5);
  const Ranking top_swap = Ranking::from_item_at_rank({1, 0, 2, 3, 4});
  const Ranking bottom_swap = Ranking::from_item_at_rank({0, 1, 2, 4, 3});
  CHECK(weighted_kendall_tau(base, top_swap) < weighted_kendall_tau(base, bottom_swap));
  // the unweighted tau cannot tell the two swaps apart
  CHECK(kendall_tau(base, top_swap) == doctest::Approx(kendall_tau(base, bottom_swap)));
}

TEST_CASE("group_exposure_disparity is zero when a group has no merit") {
  const Query q = query("q", {item({0.0}, 0.0, 0), item({0.0}, 1.0, 1)});
  CHECK(group_exposure_disparity({Ranking::identity(2)}, q) == 0.0);
}

TEST_CASE("group_exposure_disparity on the two-item single-ranking case") {
  // equal merits: group 0 counts as advantaged, and it sits at rank 1
  const Query q = query("q", {item({0.0}, 1.0, 0), item({0.0}, 1.0, 1)});
  const double expected = 1.0 - 1.0 / std::log2(3.0);
  CHECK(group_exposure_disparity({Ranking::identity(2)}, q) ==
        doctest::Approx(expected).epsilon(1e-9));
  // the same items ranked the other way favor group 1: clamped to zero
  CHECK(group_exposure_disparity({Ranking::from_item_at_rank({1, 0})}, q) == 0.0);
}

TEST_CASE("group_exposure_disparity vanishes under symmetric exposure") {
  const Query q = query("q", {item({0.0}, 1.0, 0), item({0.0}, 1.0, 1)});
  const std::vector<Ranking> both{Ranking::identity(2), Ranking::from_item_at_rank({1, 0})};
  CHECK(group_exposure_disparity(both, q) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("group_exposure_disparity is invariant to swapping group labels") {
  RandomStream rng(439);
  for (int trial = 0; trial < 20; ++trial) {
    Query q = test::random_query(rng, 6, 2);
    for (Item& it : q.items) it.group = rng.bernoulli(0.5) ? 1 : 0;
    bool has0 = false, has1 = false;
    for (const Item& it : q.items) (*it.group == 0 ? has0 : has1) = true;
    if (!has0 || !has1) continue;

    std::vector<Ranking> rankings;
    RandomStream sampler = rng.sub(trial);
    const Eigen::VectorXd s =
        Eigen::VectorXd::NullaryExpr(6, [&](Eigen::Index) { return rng.uniform(-1, 1); });
    for (int k = 0; k < 5; ++k) rankings.push_back(pl_sample(s, sampler));

    Query flipped = q;
    for (Item& it : flipped.items) it.group = 1 - *it.group;
    CHECK(group_exposure_disparity(rankings, q) ==
          doctest::Approx(group_exposure_disparity(rankings, flipped)).epsilon(1e-12));
  }
}

TEST_CASE("group_exposure_disparity requires group labels") {
  const Query q = query("q", {item({0.0}, 1.0), item({0.0}, 1.0)});
  CHECK(thrown_code([&] { group_exposure_disparity({Ranking::identity(2)}, q); }) ==
        ErrorCode::missing_groups);
}

TEST_CASE("position_bias follows the DCG discount") {
  CHECK(position_bias(1) == doctest::Approx(1.0));
  CHECK(position_bias(3) == doctest::Approx(0.5));
  CHECK(thrown_code([] { position_bias(0); }) == ErrorCode::invalid_config);
}
