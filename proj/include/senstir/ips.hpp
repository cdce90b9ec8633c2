#pragma once

#include <vector>

#include "senstir/core.hpp"
#include "senstir/rng.hpp"

namespace senstir {

using ClickVector = std::vector<int>;  // one 0/1 entry per item

enum class PropensityKind { rank_power };

// Position-based examination model: probability of looking at the item shown
// at 1-based rank k is max(k^-eta, floor); the floor keeps propensities
// bounded away from zero so inverse weights stay finite.
struct PropensityModel {
  PropensityKind kind = PropensityKind::rank_power;
  double eta = 1.0;
  double floor = 1e-6;

  double examine_prob(int rank) const;
};

// Rank weighting applied to the evaluated ranking; dcg_log is 1/log2(1+rank).
enum class WeighingFunction { dcg_log };

double weigh(WeighingFunction f, int rank);

// Naive click-through value of `evaluated`: sum of f(rank) over clicked items.
double basic_delta(const Ranking& evaluated, const ClickVector& clicks,
                   WeighingFunction f = WeighingFunction::dcg_log);

// Inverse-propensity-scored value: clicks are divided by the examination
// probability of the rank they were *logged* at, removing position bias.
double ips_delta(const Ranking& evaluated, const ClickVector& clicks, const Ranking& logged,
                 const PropensityModel& propensity, WeighingFunction f = WeighingFunction::dcg_log);

// Click simulation: independent Bernoulli examination at the logged rank,
// clicked iff examined and relevant.  Relevances must be binary.
ClickVector simulate_clicks(const Query& q, const Ranking& logged,
                            const PropensityModel& propensity, RandomStream& rng);
ClickVector simulate_clicks(const std::vector<double>& relevances, const Ranking& logged,
                            const PropensityModel& propensity, RandomStream& rng);

// Closed form of E[ips_delta] under the click model above: the examination
// probabilities cancel, leaving sum_d f(rank(d)) * rel(d) whatever the logged
// ranking and propensity were.
double expected_ips_delta(const Query& q, const Ranking& evaluated, const Ranking& logged,
                          const PropensityModel& propensity,
                          WeighingFunction f = WeighingFunction::dcg_log);
double expected_ips_delta(const Ranking& evaluated, const std::vector<double>& relevances,
                          WeighingFunction f = WeighingFunction::dcg_log);

}  // namespace senstir
