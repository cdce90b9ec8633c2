#include "senstir/trainer.hpp"

#include <cmath>
#include <memory>

#include "senstir/errors.hpp"
#include "senstir/ot.hpp"
#include "senstir/parallel.hpp"

namespace senstir {

namespace {

// Symmetry-break applied when an attack starts at an exact stationary point
// of its objective (gradient identically zero); small enough to be washed out
// by the first optimizer step.
constexpr double kSaddleKick = 1e-8;

double score_divergence(const LinearPolicy& policy, const Query& q, const Query& q2) {
  double div = 0.0;
  for (int j = 0; j < q.size(); ++j) {
    const double c = policy.theta.dot(q2.items[j].features - q.items[j].features);
    div += c * c;
  }
  return 0.5 * div;
}

void check_attack_args(const LinearPolicy& policy, const Query& q, const FairItemMetric& metric,
                       int steps, double lr) {
  require(policy.theta.size() == q.feature_dim(), ErrorCode::dimension_mismatch,
          "policy dimension does not match query features");
  require(metric.dim() == q.feature_dim(), ErrorCode::dimension_mismatch,
          "metric dimension does not match query features");
  require(steps >= 0, ErrorCode::invalid_config, "negative step count");
  require(lr > 0.0, ErrorCode::invalid_config, "attack learning rate must be positive");
}

// Adam ascent on 0.5 * sum_j (g_dir . delta_j)^2 where g_dir = A^T theta; the
// objective is the score divergence of the in-subspace perturbation x_j + A
// delta_j for a linear policy.
void run_subspace_ascent(const Eigen::VectorXd& g_dir, int steps, double lr,
                         OptimizerKind optimizer, Eigen::MatrixXd& delta, AdamState& opt,
                         std::vector<double>* trace) {
  const auto k = delta.rows();
  const auto n = delta.cols();
  Eigen::VectorXd c = delta.transpose() * g_dir;  // per-item divergence coefficient
  if (c.isZero(0.0) && !g_dir.isZero(0.0)) {
    delta.colwise() += (kSaddleKick / g_dir.norm()) * g_dir;
    c = delta.transpose() * g_dir;
  }
  if (trace) trace->push_back(0.5 * c.squaredNorm());
  for (int step = 0; step < steps; ++step) {
    const Eigen::MatrixXd grad = g_dir * c.transpose();  // k x n
    Eigen::Map<Eigen::VectorXd> flat(delta.data(), k * n);
    flat += opt.step(Eigen::Map<const Eigen::VectorXd>(grad.data(), k * n), lr, optimizer);
    c = delta.transpose() * g_dir;
    if (trace) trace->push_back(0.5 * c.squaredNorm());
  }
}

Query apply_subspace_delta(const Query& q, const Eigen::MatrixXd& basis,
                           const Eigen::MatrixXd& delta) {
  Query out = q;
  for (int j = 0; j < q.size(); ++j) out.items[j].features += basis * delta.col(j);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  require(epochs >= 1, ErrorCode::invalid_config, "epochs must be >= 1");
  require(batch_size >= 1, ErrorCode::invalid_config, "batch_size must be >= 1");
  require(mc_samples >= 2, ErrorCode::invalid_config,
          "mc_samples must be >= 2 (baseline needs a mean)");
  require(std::isfinite(rho) && rho >= 0.0, ErrorCode::invalid_config, "rho must be >= 0");
  require(epsilon > 0.0, ErrorCode::invalid_config, "epsilon must be > 0");
  require(lambda_init >= 0.0, ErrorCode::invalid_config, "lambda_init must be >= 0");
  require(lambda_step > 0.0, ErrorCode::invalid_config, "lambda_step must be > 0");
  require(theta_step > 0.0, ErrorCode::invalid_config, "theta_step must be > 0");
  require(attack_subspace_steps >= 1, ErrorCode::invalid_config,
          "attack_subspace_steps must be >= 1");
  require(attack_full_steps >= 1, ErrorCode::invalid_config, "attack_full_steps must be >= 1");
  require(attack_subspace_lr > 0.0, ErrorCode::invalid_config,
          "attack_subspace_lr must be > 0");
  require(attack_full_lr > 0.0, ErrorCode::invalid_config, "attack_full_lr must be > 0");
  require(fair_start_frac >= 0.0 && fair_start_frac <= 1.0, ErrorCode::invalid_config,
          "fair_start_frac must lie in [0, 1]");
  require(l2 >= 0.0, ErrorCode::invalid_config, "l2 must be >= 0");
  require(weight_init_range > 0.0, ErrorCode::invalid_config,
          "weight_init_range must be > 0");
}

Eigen::VectorXd AdamState::step(const Eigen::VectorXd& grad, double lr, OptimizerKind kind) {
  if (kind == OptimizerKind::sgd) return lr * grad;
  require(grad.size() == m.size(), ErrorCode::shape_mismatch,
          "gradient does not match optimizer state");
  ++t;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double m_corr = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double v_corr = 1.0 - std::pow(beta2, static_cast<double>(t));
  return (lr / m_corr) * m.cwiseQuotient(((v / v_corr).cwiseSqrt().array() + eps).matrix());
}

Query subspace_attack(const LinearPolicy& policy, const Query& q, const FairItemMetric& metric,
                      int steps, double lr, std::vector<double>* objective_trace) {
  check_attack_args(policy, q, metric, steps, lr);
  const Eigen::MatrixXd& A = metric.subspace().basis;
  SubspaceAttackState state(static_cast<int>(A.cols()), q.size());
  run_subspace_ascent(A.transpose() * policy.theta, steps, lr, OptimizerKind::adam, state.delta,
                      state.opt, objective_trace);
  return apply_subspace_delta(q, A, state.delta);
}

Query subspace_attack_warm(const LinearPolicy& policy, const Query& q,
                           const FairItemMetric& metric, int steps, double lr,
                           SubspaceAttackState& state) {
  check_attack_args(policy, q, metric, steps, lr);
  const Eigen::MatrixXd& A = metric.subspace().basis;
  require(state.delta.rows() == A.cols() && state.delta.cols() == q.size(),
          ErrorCode::shape_mismatch, "attack state does not match subspace rank and query size");
  run_subspace_ascent(A.transpose() * policy.theta, steps, lr, OptimizerKind::adam, state.delta,
                      state.opt, nullptr);
  return apply_subspace_delta(q, A, state.delta);
}

Query full_attack(const LinearPolicy& policy, const Query& q, const Query& q_init,
                  const FairItemMetric& metric, double lambda, int steps, double lr,
                  std::vector<double>* objective_trace) {
  check_attack_args(policy, q, metric, steps, lr);
  require(q_init.size() == q.size() && q_init.feature_dim() == q.feature_dim(),
          ErrorCode::shape_mismatch, "attack start does not match the query shape");
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorCode::invalid_config,
          "lambda must be finite and >= 0");

  const int n = q.size();
  const auto p = policy.theta.size();
  const auto objective = [&](const Query& cur) {
    double value = score_divergence(policy, q, cur);
    if (lambda > 0.0) value -= lambda * query_distance(metric, q, cur).value;
    return value;
  };

  Query cur = q_init;
  Query best = q_init;
  double best_obj = objective(q_init);
  if (objective_trace) objective_trace->push_back(best_obj);

  const auto gradient = [&](const Query& at) {
    Eigen::MatrixXd grad(p, n);
    for (int j = 0; j < n; ++j) {
      const double c = policy.theta.dot(at.items[j].features - q.items[j].features);
      grad.col(j) = c * policy.theta;
    }
    if (lambda > 0.0) {
      const TransportPlan plan = query_distance(metric, q, at);
      const auto dq_grad = query_distance_grad(metric, q, at, plan);
      for (int j = 0; j < n; ++j) grad.col(j) -= lambda * dq_grad[j];
    }
    return grad;
  };

  Eigen::MatrixXd grad = gradient(cur);
  if (grad.isZero(0.0) && !policy.theta.isZero(0.0)) {
    const Eigen::VectorXd kick = (kSaddleKick / policy.theta.norm()) * policy.theta;
    for (int j = 0; j < n; ++j) cur.items[j].features += kick;
    grad = gradient(cur);
  }

  AdamState opt(p * n);
  for (int step = 0; step < steps; ++step) {
    Eigen::MatrixXd flat_update(p, n);
    Eigen::Map<Eigen::VectorXd>(flat_update.data(), p * n) =
        opt.step(Eigen::Map<const Eigen::VectorXd>(grad.data(), p * n), lr,
                 OptimizerKind::adam);
    for (int j = 0; j < n; ++j) cur.items[j].features += flat_update.col(j);
    const double obj = objective(cur);
    if (objective_trace) objective_trace->push_back(obj);
    if (obj > best_obj) {
      best_obj = obj;
      best = cur;
    }
    if (step + 1 < steps) grad = gradient(cur);
  }
  return best;
}

double lambda_update(double lambda, double alpha, double rho, double epsilon, double mean_dq) {
  require(std::isfinite(lambda) && std::isfinite(mean_dq) && std::isfinite(epsilon),
          ErrorCode::invalid_config, "lambda update inputs must be finite");
  require(alpha > 0.0 && rho > 0.0, ErrorCode::invalid_config,
          "lambda update needs alpha > 0 and rho > 0");
  return std::max(0.0, lambda + alpha * rho * (epsilon - mean_dq));
}

LinearPolicy theta_update(const LinearPolicy& policy, const std::vector<Query>& batch,
                          const std::vector<Query>& adv, const TrainConfig& cfg, AdamState& opt,
                          const RandomStream& rng, double* mean_utility_out) {
  const int B = static_cast<int>(batch.size());
  require(B >= 1, ErrorCode::invalid_config, "empty batch");
  require(adv.size() == batch.size(), ErrorCode::shape_mismatch,
          "batch and adversarial batch differ in length");
  for (int b = 0; b < B; ++b)
    require(adv[b].size() == batch[b].size() && adv[b].feature_dim() == batch[b].feature_dim(),
            ErrorCode::shape_mismatch, "adversarial query does not match its original");

  const auto p = policy.theta.size();
  std::vector<Eigen::VectorXd> grads(B);
  std::vector<double> utilities(B);
  parallel_for(B, [&](int b) {
    const Query& q = batch[b];
    RandomStream qrng = rng.sub(q.id);
    UtilitySpec spec;
    spec.mc_samples = cfg.mc_samples;
    spec.use_baseline = true;
    const PolicyGradEstimate est = policy_utility_grad(policy, q, spec, qrng);
    Eigen::VectorXd penalty = Eigen::VectorXd::Zero(p);
    for (int j = 0; j < q.size(); ++j) {
      const Eigen::VectorXd diff = adv[b].items[j].features - q.items[j].features;
      penalty += diff * policy.theta.dot(diff);
    }
    grads[b] = est.grad_theta - cfg.rho * penalty;
    utilities[b] = est.mean_utility;
  });

  Eigen::VectorXd total = Eigen::VectorXd::Zero(p);
  double mean_utility = 0.0;
  for (int b = 0; b < B; ++b) {
    total += grads[b];
    mean_utility += utilities[b];
  }
  total /= B;
  mean_utility /= B;
  if (cfg.l2 > 0.0) total -= cfg.l2 * policy.theta;

  if (mean_utility_out) *mean_utility_out = mean_utility;
  LinearPolicy out = policy;
  out.theta += opt.step(total, cfg.theta_step, cfg.optimizer);
  return out;
}

TrainResult train(const TrainConfig& cfg, const Dataset& data, const FairItemMetric* metric,
                  TrainVariant variant) {
  require(!data.queries.empty(), ErrorCode::invalid_config, "empty dataset");
  const int p = data.feature_dim;
  RandomStream root(cfg.seed);
  RandomStream init_rng = root.sub("init");

  if (variant == TrainVariant::random) {
    LinearPolicy policy;
    policy.theta = Eigen::VectorXd(p);
    for (int i = 0; i < p; ++i) policy.theta[i] = init_rng.normal();
    return {std::move(policy), TrainHistory{}};
  }

  cfg.validate();
  const bool needs_metric = variant == TrainVariant::project ||
                            (variant == TrainVariant::senstir && cfg.rho > 0.0);
  require(metric != nullptr || !needs_metric, ErrorCode::invalid_config,
          "this variant requires a fair metric");
  if (metric)
    require(metric->dim() == p, ErrorCode::dimension_mismatch,
            "metric dimension does not match the dataset");

  const Dataset* train_data = &data;
  Dataset projected;
  if (variant == TrainVariant::project) {
    projected = project_complement(*metric, data);
    train_data = &projected;
  }

  LinearPolicy policy;
  policy.theta = Eigen::VectorXd(p);
  for (int i = 0; i < p; ++i)
    policy.theta[i] = init_rng.uniform(-cfg.weight_init_range, cfg.weight_init_range);

  double lambda = cfg.lambda_init;
  AdamState opt(p);
  RandomStream sampling = root.sub("sampling");
  RandomStream batches = sampling.sub("batch");

  const bool can_attack = variant == TrainVariant::senstir && cfg.rho > 0.0;
  const int fair_start_epochs =
      static_cast<int>(std::floor(cfg.fair_start_frac * cfg.epochs));
  const int B = cfg.batch_size;
  const int Q = static_cast<int>(train_data->queries.size());
  // One persistent perturbation per batch slot; re-created when the slot's
  // query shape changes.
  std::vector<std::unique_ptr<SubspaceAttackState>> warm(can_attack ? B : 0);

  TrainHistory hist;
  hist.mean_utility.reserve(cfg.epochs);
  hist.mean_dq.reserve(cfg.epochs);
  hist.lambda.reserve(cfg.epochs);
  hist.regularizer.reserve(cfg.epochs);

  for (int t = 0; t < cfg.epochs; ++t) {
    RandomStream batch_rng = batches.sub(static_cast<std::uint64_t>(t));
    std::vector<Query> batch(B);
    for (int b = 0; b < B; ++b)
      batch[b] = train_data->queries[batch_rng.uniform_index(Q)];

    const bool attacking = can_attack && t >= fair_start_epochs;
    std::vector<Query> adv = batch;
    double mean_dq = 0.0;
    double mean_div = 0.0;
    if (attacking) {
      std::vector<double> dqs(B), divs(B);
      parallel_for(B, [&](int b) {
        const Query& q = batch[b];
        Query q_sub;
        if (cfg.warm_start_attacks) {
          const int k = metric->subspace().rank();
          if (!warm[b] || warm[b]->delta.rows() != k || warm[b]->delta.cols() != q.size())
            warm[b] = std::make_unique<SubspaceAttackState>(k, q.size());
          q_sub = subspace_attack_warm(policy, q, *metric, cfg.attack_subspace_steps,
                                       cfg.attack_subspace_lr, *warm[b]);
        } else {
          q_sub = subspace_attack(policy, q, *metric, cfg.attack_subspace_steps,
                                  cfg.attack_subspace_lr);
        }
        Query q_adv = full_attack(policy, q, q_sub, *metric, lambda, cfg.attack_full_steps,
                                  cfg.attack_full_lr);
        dqs[b] = query_distance(*metric, q, q_adv).value;
        divs[b] = score_divergence(policy, q, q_adv);
        adv[b] = std::move(q_adv);
      });
      for (int b = 0; b < B; ++b) {
        mean_dq += dqs[b];
        mean_div += divs[b];
      }
      mean_dq /= B;
      mean_div /= B;
      lambda = lambda_update(lambda, cfg.lambda_step, cfg.rho, cfg.epsilon, mean_dq);
    }

    TrainConfig effective = cfg;
    if (!attacking) effective.rho = 0.0;
    double mean_utility = 0.0;
    policy = theta_update(policy, batch, adv, effective, opt,
                          sampling.sub(static_cast<std::uint64_t>(t)), &mean_utility);

    hist.mean_utility.push_back(mean_utility);
    hist.mean_dq.push_back(mean_dq);
    hist.lambda.push_back(lambda);
    hist.regularizer.push_back(mean_div);
  }
  return {std::move(policy), std::move(hist)};
}

}  // namespace senstir
