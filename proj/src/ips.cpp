#include "senstir/ips.hpp"

#include <cmath>

#include "senstir/errors.hpp"

namespace senstir {

double PropensityModel::examine_prob(int rank) const {
  require(rank >= 1, ErrorCode::invalid_config, "ranks are 1-based");
  require(eta >= 0.0 && floor > 0.0 && floor <= 1.0, ErrorCode::invalid_config,
          "propensity needs eta >= 0 and floor in (0, 1]");
  return std::max(std::pow(static_cast<double>(rank), -eta), floor);
}

double weigh(WeighingFunction f, int rank) {
  require(rank >= 1, ErrorCode::invalid_config, "ranks are 1-based");
  switch (f) {
    case WeighingFunction::dcg_log: return 1.0 / std::log2(1.0 + rank);
  }
  fail(ErrorCode::invalid_config, "unknown weighing function");
}

namespace {

void check_clicks(const Ranking& r, const ClickVector& clicks) {
  require(clicks.size() == static_cast<size_t>(r.size()), ErrorCode::length_mismatch,
          "click vector does not match ranking size");
  for (int c : clicks)
    require(c == 0 || c == 1, ErrorCode::invalid_config, "clicks must be 0 or 1");
}

void check_binary(const std::vector<double>& relevances) {
  for (double rel : relevances)
    require(rel == 0.0 || rel == 1.0, ErrorCode::non_binary_relevance,
            "binary relevance required");
}

}  // namespace

double basic_delta(const Ranking& evaluated, const ClickVector& clicks, WeighingFunction f) {
  check_clicks(evaluated, clicks);
  double total = 0.0;
  for (size_t d = 0; d < clicks.size(); ++d)
    if (clicks[d]) total += weigh(f, evaluated.rank_of_item(static_cast<int>(d)));
  return total;
}

double ips_delta(const Ranking& evaluated, const ClickVector& clicks, const Ranking& logged,
                 const PropensityModel& propensity, WeighingFunction f) {
  check_clicks(evaluated, clicks);
  require(logged.size() == evaluated.size(), ErrorCode::size_mismatch,
          "logged and evaluated rankings differ in length");
  double total = 0.0;
  for (size_t d = 0; d < clicks.size(); ++d) {
    if (!clicks[d]) continue;
    const double v = propensity.examine_prob(logged.rank_of_item(static_cast<int>(d)));
    total += weigh(f, evaluated.rank_of_item(static_cast<int>(d))) / v;
  }
  return total;
}

ClickVector simulate_clicks(const std::vector<double>& relevances, const Ranking& logged,
                            const PropensityModel& propensity, RandomStream& rng) {
  require(relevances.size() == static_cast<size_t>(logged.size()), ErrorCode::length_mismatch,
          "relevance list does not match ranking size");
  check_binary(relevances);
  ClickVector clicks(relevances.size(), 0);
  for (size_t d = 0; d < relevances.size(); ++d) {
    const bool examined =
        rng.bernoulli(propensity.examine_prob(logged.rank_of_item(static_cast<int>(d))));
    clicks[d] = examined && relevances[d] == 1.0 ? 1 : 0;
  }
  return clicks;
}

ClickVector simulate_clicks(const Query& q, const Ranking& logged,
                            const PropensityModel& propensity, RandomStream& rng) {
  return simulate_clicks(q.relevances(), logged, propensity, rng);
}

double expected_ips_delta(const Ranking& evaluated, const std::vector<double>& relevances,
                          WeighingFunction f) {
  require(relevances.size() == static_cast<size_t>(evaluated.size()), ErrorCode::length_mismatch,
          "relevance list does not match ranking size");
  check_binary(relevances);
  double total = 0.0;
  for (size_t d = 0; d < relevances.size(); ++d)
    total += weigh(f, evaluated.rank_of_item(static_cast<int>(d))) * relevances[d];
  return total;
}

double expected_ips_delta(const Query& q, const Ranking& evaluated, const Ranking& logged,
                          const PropensityModel& propensity, WeighingFunction f) {
  require(logged.size() == evaluated.size(), ErrorCode::size_mismatch,
          "logged and evaluated rankings differ in length");
  // Sanity-check the model is valid even though the expectation is free of it.
  (void)propensity.examine_prob(1);
  return expected_ips_delta(evaluated, q.relevances(), f);
}

}  // namespace senstir
