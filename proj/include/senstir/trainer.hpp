#pragma once

#include <Eigen/Core>
#include <vector>

#include "senstir/core.hpp"
#include "senstir/fair_metric.hpp"
#include "senstir/policy_gradient.hpp"
#include "senstir/rng.hpp"

namespace senstir {

enum class TrainVariant { senstir, baseline, project, random };
enum class OptimizerKind { adam, sgd };

struct TrainConfig {
  int epochs = 2000;                  // E: number of minibatch updates
  int batch_size = 1;                 // B
  int mc_samples = 10;                // MC draws per query for the utility gradient
  double rho = 0.0;                   // fair regularization strength
  double epsilon = 0.001;             // transport budget in the dual update
  double lambda_init = 2.0;
  double lambda_step = 1.0;           // alpha
  double theta_step = 0.001;          // eta, the score-function learning rate
  int attack_subspace_steps = 20;     // ae
  double attack_subspace_lr = 0.001;  // as
  int attack_full_steps = 20;         // fe
  double attack_full_lr = 0.001;      // fs (gamma)
  double fair_start_frac = 0.0;       // frs: fraction of epochs trained with rho = 0 first
  double l2 = 0.0;                    // weight decay on theta
  double weight_init_range = 1e-4;    // theta init is uniform in +-this
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::adam;
  // Reuse each batch slot's subspace perturbation (and its optimizer moments)
  // across epochs instead of restarting the attack from scratch every batch.
  bool warm_start_attacks = true;

  void validate() const;
};

struct TrainHistory {
  std::vector<double> mean_utility;  // batch mean of the Monte-Carlo utility
  std::vector<double> mean_dq;       // batch mean d_Q(q, q') of the attacks
  std::vector<double> lambda;        // dual variable after the epoch's update
  std::vector<double> regularizer;   // batch mean of 0.5 * ||h(q') - h(q)||^2

  bool operator==(const TrainHistory&) const = default;
};

// Adam-style moment state over a flat parameter vector; in sgd mode the step
// is plain lr * grad and the moments stay untouched.
struct AdamState {
  Eigen::VectorXd m, v;
  long t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  explicit AdamState(Eigen::Index n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

  // Ascent increment for the given gradient.
  Eigen::VectorXd step(const Eigen::VectorXd& grad, double lr, OptimizerKind kind);
};

// Phase one of the adversarial query generation: perturb items only inside
// the sensitive subspace (x'_j = x_j + A delta_j), ascending on the score
// divergence 0.5 * ||h(q') - h(q)||^2. The output is at fair distance zero
// from q. If given, objective_trace records the divergence at the start and
// after every step.
Query subspace_attack(const LinearPolicy& policy, const Query& q, const FairItemMetric& metric,
                      int steps, double lr, std::vector<double>* objective_trace = nullptr);

// Persistent-perturbation variant: delta and its optimizer moments live in
// `state` and carry over between calls, so repeated attacks keep deepening
// the same perturbation.
struct SubspaceAttackState {
  Eigen::MatrixXd delta;  // k x n
  AdamState opt;

  SubspaceAttackState(int k, int n) : delta(Eigen::MatrixXd::Zero(k, n)), opt(k * n) {}
};

Query subspace_attack_warm(const LinearPolicy& policy, const Query& q,
                           const FairItemMetric& metric, int steps, double lr,
                           SubspaceAttackState& state);

// Phase two: unconstrained ascent on 0.5 * ||h(q') - h(q)||^2 - lambda *
// d_Q(q, q'), started from q_init (normally the subspace attack output). The
// transport plan is recomputed at every step and the best iterate seen
// (including the start) is returned, so a huge lambda pins the result to the
// zero-distance set.
Query full_attack(const LinearPolicy& policy, const Query& q, const Query& q_init,
                  const FairItemMetric& metric, double lambda, int steps, double lr,
                  std::vector<double>* objective_trace = nullptr);

// Dual ascent on the transport budget: max{0, lambda + alpha * rho * (epsilon
// - mean_dq)}.
double lambda_update(double lambda, double alpha, double rho, double epsilon, double mean_dq);

// One optimizer step on theta: batch-averaged REINFORCE utility gradient
// minus rho times the invariance penalty gradient sum_j (x'_j - x_j) *
// (theta . (x'_j - x_j)) minus l2 * theta. Per-query sampling streams are
// derived from `rng` by query id, so results do not depend on batch order or
// worker count.
LinearPolicy theta_update(const LinearPolicy& policy, const std::vector<Query>& batch,
                          const std::vector<Query>& adv, const TrainConfig& cfg, AdamState& opt,
                          const RandomStream& rng, double* mean_utility_out = nullptr);

struct TrainResult {
  LinearPolicy policy;
  TrainHistory history;
};

// Train a linear policy on the dataset.
//   senstir:  per batch, subspace attack -> full attack -> lambda update ->
//             theta update; the first floor(frs * E) epochs run with rho = 0.
//   baseline: the same loop with rho = 0 and no attacks.
//   project:  baseline on the complement-projected dataset.
//   random:   theta drawn from a standard normal, no training (empty history).
// `metric` may be null for baseline and random.
TrainResult train(const TrainConfig& cfg, const Dataset& data, const FairItemMetric* metric,
                  TrainVariant variant);

}  // namespace senstir
