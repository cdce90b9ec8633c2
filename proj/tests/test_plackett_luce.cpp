#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <map>
#include <vector>

#include "oracles.hpp"
#include "senstir/plackett_luce.hpp"
#include "senstir/rng.hpp"

using namespace senstir;
using test::thrown_code;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  return Eigen::Map<const Eigen::VectorXd>(xs.begin(), static_cast<Eigen::Index>(xs.size()));
}

}  // namespace

TEST_CASE("pl_log_prob is uniform over rankings at equal scores") {
  const Eigen::VectorXd s = Eigen::VectorXd::Zero(3);
  for (const Ranking& r : test::all_rankings(3))
    CHECK(pl_log_prob(s, r) == doctest::Approx(std::log(1.0 / 6.0)).epsilon(1e-12));
}

TEST_CASE("pl_log_prob two-item softmax") {
  const Eigen::VectorXd s = vec({std::log(2.0), 0.0});
  CHECK(pl_log_prob(s, Ranking::identity(2)) ==
        doctest::Approx(std::log(2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("pl_log_prob normalizes over all rankings") {
  RandomStream rng(211);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd s =
        Eigen::VectorXd::NullaryExpr(4, [&](Eigen::Index) { return rng.uniform(-2, 2); });
    double total = 0.0;
    for (const Ranking& r : test::all_rankings(4)) total += std::exp(pl_log_prob(s, r));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("pl_log_prob is shift invariant") {
  RandomStream rng(223);
  const Eigen::VectorXd s =
      Eigen::VectorXd::NullaryExpr(5, [&](Eigen::Index) { return rng.uniform(-3, 3); });
  const Ranking r = test::all_rankings(5)[37];
  const double base = pl_log_prob(s, r);
  for (double c : {-500.0, -1.0, 0.25, 1000.0})
    CHECK(pl_log_prob(s.array() + c, r) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("pl_log_prob stays finite at large score magnitudes") {
  const Eigen::VectorXd s = vec({1000.0, -1000.0, 500.0});
  for (const Ranking& r : test::all_rankings(3)) {
    const double lp = pl_log_prob(s, r);
    CHECK(std::isfinite(lp));
    CHECK(lp <= 0.0);
  }
}

TEST_CASE("pl_log_prob rejects mismatched lengths") {
  CHECK(thrown_code([] { pl_log_prob(Eigen::VectorXd::Zero(3), Ranking::identity(2)); }) ==
        ErrorCode::length_mismatch);
}

TEST_CASE("pl_sample on one item returns the unique ranking") {
  RandomStream rng(227);
  CHECK(pl_sample(vec({3.0}), rng) == Ranking::identity(1));
}

TEST_CASE("pl_sample puts a dominant item first") {
  RandomStream rng(229);
  const Eigen::VectorXd s = vec({1e6, 0.0, 0.0});
  int hits = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i)
    if (pl_sample(s, rng).item_at_rank(1) == 0) ++hits;
  CHECK(static_cast<double>(hits) / draws >= 0.9999);
}

TEST_CASE("pl_sample frequencies match enumeration in total variation") {
  RandomStream rng(233);
  const Eigen::VectorXd s = vec({0.4, -0.3, 0.9});
  std::map<std::vector<int>, int> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[pl_sample(s, rng).order()];
  double tv = 0.0;
  for (const auto& [r, prob] : pl_enumerate(s)) {
    const auto it = counts.find(r.order());
    const double freq = it == counts.end() ? 0.0 : static_cast<double>(it->second) / draws;
    tv += std::abs(freq - prob);
  }
  CHECK(tv / 2.0 < 0.01);
}

TEST_CASE("pl_sample consumes exactly one uniform per stage") {
  const Eigen::VectorXd s = vec({0.1, 0.7, -0.2, 0.4});
  RandomStream a(777), b(777);
  pl_sample(s, a);
  for (int i = 0; i < 4; ++i) b.uniform01();
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("pl_log_prob_grad_scores on two equal-score items") {
  const Eigen::VectorXd g = pl_log_prob_grad_scores(Eigen::VectorXd::Zero(2), Ranking::identity(2));
  CHECK(g[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("pl_log_prob_grad_scores entries sum to zero") {
  RandomStream rng(239);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(5));
    const Eigen::VectorXd s =
        Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return rng.uniform(-2, 2); });
    RandomStream sampler = rng.sub(trial);
    const Ranking r = pl_sample(s, sampler);
    CHECK(pl_log_prob_grad_scores(s, r).sum() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("pl_log_prob_grad_scores matches finite differences") {
  RandomStream rng(241);
  const Eigen::VectorXd s =
      Eigen::VectorXd::NullaryExpr(5, [&](Eigen::Index) { return rng.uniform(-2, 2); });
  const Ranking r = test::all_rankings(5)[67];
  const Eigen::VectorXd g = pl_log_prob_grad_scores(s, r);
  for (int i = 0; i < 5; ++i) {
    const double fd = test::central_diff(
        [&](const Eigen::VectorXd& z) { return pl_log_prob(z, r); }, s, i);
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("pl_enumerate lists exact probabilities") {
  const auto both = pl_enumerate(Eigen::VectorXd::Zero(2));
  REQUIRE(both.size() == 2);
  CHECK(both[0].second == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(both[1].second == doctest::Approx(0.5).epsilon(1e-12));

  const auto six = pl_enumerate(Eigen::VectorXd::Zero(3));
  REQUIRE(six.size() == 6);
  for (const auto& [r, prob] : six) CHECK(prob == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("the most probable ranking is the deterministic score sort") {
  RandomStream rng(251);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd s =
        Eigen::VectorXd::NullaryExpr(3, [&](Eigen::Index) { return rng.uniform(-2, 2); });
    const auto table = pl_enumerate(s);
    const auto best = std::max_element(
        table.begin(), table.end(),
        [](const auto& a, const auto& b) { return a.second < b.second; });
    CHECK(best->first == ranking_from_scores(s));
  }
}

TEST_CASE("pl_enumerate is guarded against factorial blowup") {
  CHECK(thrown_code([] { pl_enumerate(Eigen::VectorXd::Zero(9)); }) == ErrorCode::too_large);
}
