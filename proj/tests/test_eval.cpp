#include <doctest.h>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "senstir/eval.hpp"
#include "senstir/rng.hpp"

using namespace senstir;
using test::thrown_code;

namespace {

Eigen::VectorXd unit(int p, int coord) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
  e[coord] = 1.0;
  return e;
}

Dataset random_dataset(std::uint64_t seed, int queries, int n, int p) {
  RandomStream rng(seed);
  std::vector<Query> qs;
  qs.reserve(queries);
  for (int i = 0; i < queries; ++i) {
    Query q = test::random_query(rng, n, p);
    q.id = "q" + std::to_string(i);
    qs.push_back(std::move(q));
  }
  return make_dataset(std::move(qs));
}

}  // namespace

TEST_CASE("evaluate reports per-query rows in input order with exact ndcg on flat relevance") {
  std::vector<Query> qs{
      test::query("first", {test::item({1.0, 0.0}, 2.0), test::item({0.0, 1.0}, 2.0)}),
      test::query("second", {test::item({0.5, 0.5}, 1.0), test::item({0.2, 0.8}, 1.0)})};
  const Dataset data = make_dataset(std::move(qs));
  const LinearPolicy policy{Eigen::Vector2d(0.3, -0.4)};
  EvalOptions opt;
  opt.pl_samples = 7;
  const EvalSummary summary = evaluate(policy, data, nullptr, opt);

  REQUIRE(summary.per_query.size() == 2);
  CHECK(summary.per_query[0].query_id == "first");
  CHECK(summary.per_query[1].query_id == "second");
  // equal relevance inside a query makes every ranking ideal
  CHECK(summary.per_query[0].ndcg_stochastic == 1.0);
  CHECK(summary.per_query[1].ndcg_stochastic == 1.0);
  CHECK(summary.ndcg_stochastic == 1.0);
  CHECK(!summary.kendall_tau.has_value());
  CHECK(!summary.exposure_disparity.has_value());
}

TEST_CASE("evaluate is deterministic in the seed and independent of query order") {
  const Dataset data = random_dataset(911, 6, 5, 3);
  const LinearPolicy policy{Eigen::Vector3d(0.8, -0.2, 0.5)};
  EvalOptions opt;
  opt.pl_samples = 9;
  opt.seed = 4;

  const EvalSummary a = evaluate(policy, data, nullptr, opt);
  const EvalSummary b = evaluate(policy, data, nullptr, opt);
  CHECK(a.ndcg_stochastic == b.ndcg_stochastic);
  for (std::size_t i = 0; i < a.per_query.size(); ++i)
    CHECK(a.per_query[i].ndcg_stochastic == b.per_query[i].ndcg_stochastic);

  std::vector<Query> reversed(data.queries.rbegin(), data.queries.rend());
  const EvalSummary c = evaluate(policy, make_dataset(std::move(reversed)), nullptr, opt);
  CHECK(c.ndcg_stochastic == a.ndcg_stochastic);
  for (const QueryEval& row : c.per_query) {
    const auto match = std::find_if(a.per_query.begin(), a.per_query.end(),
                                    [&](const QueryEval& r) { return r.query_id == row.query_id; });
    REQUIRE(match != a.per_query.end());
    CHECK(row.ndcg_stochastic == match->ndcg_stochastic);
  }

  EvalOptions other_seed = opt;
  other_seed.seed = 5;
  CHECK(evaluate(policy, data, nullptr, other_seed).ndcg_stochastic != a.ndcg_stochastic);
}

TEST_CASE("evaluate validates its inputs") {
  const Dataset data = random_dataset(919, 2, 3, 2);
  const LinearPolicy policy{Eigen::Vector2d(1.0, 0.0)};
  EvalOptions opt;

  CHECK(thrown_code([&] { evaluate(policy, Dataset{}, nullptr, opt); }) ==
        ErrorCode::invalid_config);
  CHECK(thrown_code([&] {
          evaluate(LinearPolicy{Eigen::Vector3d::Ones()}, data, nullptr, opt);
        }) == ErrorCode::dimension_mismatch);
  EvalOptions bad = opt;
  bad.pl_samples = 0;
  CHECK(thrown_code([&] { evaluate(policy, data, nullptr, bad); }) == ErrorCode::invalid_config);
  bad = opt;
  bad.hypothetical = HypotheticalMode::group_flip;  // flip_column left at -1
  CHECK(thrown_code([&] { evaluate(policy, data, nullptr, bad); }) == ErrorCode::invalid_config);
  bad.flip_column = 2;
  CHECK(thrown_code([&] { evaluate(policy, data, nullptr, bad); }) == ErrorCode::invalid_config);
  bad = opt;
  bad.hypothetical = HypotheticalMode::nearest_fair_neighbor;
  CHECK(thrown_code([&] { evaluate(policy, data, nullptr, bad); }) == ErrorCode::invalid_config);
  const FairItemMetric wrong_dim(make_subspace({unit(3, 2)}));
  CHECK(thrown_code([&] { evaluate(policy, data, &wrong_dim, bad); }) ==
        ErrorCode::dimension_mismatch);
  bad = opt;
  bad.exposure = true;  // random_dataset carries no group annotations
  CHECK(thrown_code([&] { evaluate(policy, data, nullptr, bad); }) == ErrorCode::missing_groups);
}

TEST_CASE("group_flip agreement is exact when the policy ignores the flipped column") {
  std::vector<Query> qs{test::query("q0", {test::item({0.2, 1.0}, 1.0),
                                           test::item({0.9, 0.0}, 0.0),
                                           test::item({0.5, 1.0}, 2.0)})};
  const Dataset data = make_dataset(std::move(qs));
  EvalOptions opt;
  opt.hypothetical = HypotheticalMode::group_flip;
  opt.flip_column = 1;

  const EvalSummary blind = evaluate(LinearPolicy{Eigen::Vector2d(1.0, 0.0)}, data, nullptr, opt);
  REQUIRE(blind.kendall_tau.has_value());
  CHECK(*blind.kendall_tau == 1.0);
  CHECK(*blind.kendall_tau_weighted == 1.0);

  // a policy scoring only the flipped indicator reverses under the flip
  std::vector<Query> qs2{test::query("q0", {test::item({0.0, 1.0}, 1.0),
                                            test::item({0.0, 0.0}, 0.0)})};
  const EvalSummary sensitive =
      evaluate(LinearPolicy{Eigen::Vector2d(0.0, 1.0)}, make_dataset(std::move(qs2)), nullptr, opt);
  CHECK(*sensitive.kendall_tau == -1.0);
}

TEST_CASE("nearest-fair-neighbor tau is exact for a subspace-blind policy") {
  // queries differ only inside the sensitive span, so d_Q = 0 between them and
  // a policy with no sensitive component scores them identically
  RandomStream rng(929);
  std::vector<Query> qs;
  for (int i = 0; i < 4; ++i) {
    Query q = test::random_query(rng, 5, 3);
    q.id = "q" + std::to_string(i);
    qs.push_back(q);
  }
  for (int i = 1; i < 4; ++i)
    for (int j = 0; j < 5; ++j) {
      qs[i].items[j].features = qs[0].items[j].features;
      qs[i].items[j].features[2] += rng.uniform(-3.0, 3.0);  // sensitive shift
    }
  const Dataset data = make_dataset(std::move(qs));
  const FairItemMetric metric(make_subspace({unit(3, 2)}));
  EvalOptions opt;
  opt.hypothetical = HypotheticalMode::nearest_fair_neighbor;

  const EvalSummary summary =
      evaluate(LinearPolicy{Eigen::Vector3d(1.0, -0.5, 0.0)}, data, &metric, opt);
  REQUIRE(summary.kendall_tau.has_value());
  CHECK(*summary.kendall_tau == 1.0);
  for (const QueryEval& row : summary.per_query) {
    REQUIRE(row.kendall_tau.has_value());
    CHECK(*row.kendall_tau == 1.0);
  }
}

TEST_CASE("nearest-fair-neighbor picks the closest query and aligns items through it") {
  // fair geometry lives in coordinate 0; coordinate 1 is sensitive noise
  std::vector<Query> qs{
      test::query("base", {test::item({0.0, 9.0}, 1.0), test::item({1.0, -4.0}, 0.0)}),
      test::query("near", {test::item({0.1, 5.0}, 1.0), test::item({0.9, -3.0}, 0.0)}),
      test::query("far", {test::item({40.0, 0.0}, 1.0), test::item({50.0, 0.0}, 0.0)})};
  const Dataset data = make_dataset(std::move(qs));
  const FairItemMetric metric(make_subspace({unit(2, 1)}));
  EvalOptions opt;
  opt.hypothetical = HypotheticalMode::nearest_fair_neighbor;

  // scores follow coordinate 0: base ranks its second item first, and so does
  // the aligned neighbor, so agreement is perfect
  const EvalSummary agree = evaluate(LinearPolicy{Eigen::Vector2d(1.0, 0.0)}, data, &metric, opt);
  CHECK(*agree.per_query[0].kendall_tau == 1.0);

  // a policy leaking the sensitive coordinate flips base (9 vs -4) against its
  // neighbor's pulled-back ranking (5 vs -3 on matched items -> same order),
  // keeping tau at 1; leaking it with opposite sign on the neighbor breaks it
  std::vector<Query> qs2{
      test::query("base", {test::item({0.0, 1.0}, 1.0), test::item({1.0, 0.0}, 0.0)}),
      test::query("near", {test::item({0.1, 0.0}, 1.0), test::item({0.9, 1.0}, 0.0)})};
  const EvalSummary leak =
      evaluate(LinearPolicy{Eigen::Vector2d(0.1, 5.0)}, make_dataset(std::move(qs2)), &metric, opt);
  CHECK(*leak.per_query[0].kendall_tau == -1.0);
}

TEST_CASE("a lone query or a size-mismatched pool leaves tau unset") {
  std::vector<Query> qs{
      test::query("solo", {test::item({0.1, 0.2}, 1.0), test::item({0.3, 0.4}, 0.0)}),
      test::query("bigger", {test::item({0.5, 0.1}, 1.0), test::item({0.2, 0.2}, 0.0),
                             test::item({0.9, 0.3}, 2.0)})};
  const Dataset data = make_dataset(std::move(qs));
  const FairItemMetric metric(make_subspace({unit(2, 1)}));
  EvalOptions opt;
  opt.hypothetical = HypotheticalMode::nearest_fair_neighbor;
  const EvalSummary summary =
      evaluate(LinearPolicy{Eigen::Vector2d(1.0, 0.0)}, data, &metric, opt);
  CHECK(!summary.per_query[0].kendall_tau.has_value());
  CHECK(!summary.per_query[1].kendall_tau.has_value());
  CHECK(!summary.kendall_tau.has_value());
  CHECK(summary.ndcg_stochastic > 0.0);
}

TEST_CASE("tied transport optima resolve to the geometrically closest alignment") {
  // every matching between {0,1,2} and {10,11,12} on the fair coordinate has
  // the same total cost, so the assignment alone cannot break the tie; the
  // evaluation must still align monotonically or tau flips sign
  std::vector<Query> qs{
      test::query("left", {test::item({0.0, 7.0}, 1.0), test::item({1.0, -2.0}, 0.0),
                           test::item({2.0, 3.0}, 2.0)}),
      test::query("right", {test::item({10.0, 1.0}, 1.0), test::item({11.0, 8.0}, 0.0),
                            test::item({12.0, -5.0}, 2.0)})};
  const Dataset data = make_dataset(std::move(qs));
  const FairItemMetric metric(make_subspace({unit(2, 1)}));
  EvalOptions opt;
  opt.hypothetical = HypotheticalMode::nearest_fair_neighbor;
  const EvalSummary summary =
      evaluate(LinearPolicy{Eigen::Vector2d(1.0, 0.0)}, data, &metric, opt);
  REQUIRE(summary.kendall_tau.has_value());
  CHECK(*summary.per_query[0].kendall_tau == 1.0);
  CHECK(*summary.per_query[1].kendall_tau == 1.0);
  CHECK(*summary.kendall_tau == 1.0);
}

TEST_CASE("exposure disparity flows through evaluation on grouped data") {
  // a decisive score gap makes every sampled ranking identical, so the
  // disparity equals its deterministic single-ranking value
  std::vector<Query> qs{test::query("q0", {test::item({1.0}, 1.0, 0),
                                           test::item({0.0}, 1.0, 1)})};
  const Dataset data = make_dataset(std::move(qs));
  EvalOptions opt;
  opt.exposure = true;
  opt.pl_samples = 25;
  const EvalSummary ahead =
      evaluate(LinearPolicy{Eigen::VectorXd::Constant(1, 50.0)}, data, nullptr, opt);
  REQUIRE(ahead.exposure_disparity.has_value());
  CHECK(*ahead.exposure_disparity == doctest::Approx(1.0 - 1.0 / std::log2(3.0)).epsilon(1e-12));

  const EvalSummary behind =
      evaluate(LinearPolicy{Eigen::VectorXd::Constant(1, -50.0)}, data, nullptr, opt);
  CHECK(*behind.exposure_disparity == 0.0);
}

TEST_CASE("sensitive_weight_ratio splits the policy norm across the subspace") {
  const SensitiveSubspace sub = make_subspace({unit(2, 1)});
  CHECK(sensitive_weight_ratio(LinearPolicy{Eigen::Vector2d(3.0, 4.0)}, sub) ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(sensitive_weight_ratio(LinearPolicy{Eigen::Vector2d(2.0, 0.0)}, sub) == 0.0);
  CHECK(thrown_code([&] {
          sensitive_weight_ratio(LinearPolicy{Eigen::Vector3d::Ones()}, sub);
        }) == ErrorCode::dimension_mismatch);
}
