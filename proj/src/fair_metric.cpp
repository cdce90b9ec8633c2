#include "senstir/fair_metric.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "senstir/errors.hpp"

namespace senstir {

namespace {

constexpr double kSpanDropTol = 1e-10;
constexpr double kSingularTol = 1e-12;
constexpr double kOrthoTol = 1e-10;

}  // namespace

SensitiveSubspace make_subspace(const std::vector<Eigen::VectorXd>& spanning_vectors) {
  require(!spanning_vectors.empty(), ErrorCode::degenerate_span, "no spanning vectors given");
  const auto p = spanning_vectors.front().size();
  require(p > 0, ErrorCode::degenerate_span, "zero-dimensional spanning vectors");
  for (const auto& v : spanning_vectors)
    require(v.size() == p, ErrorCode::dimension_mismatch, "spanning vectors differ in length");

  Eigen::MatrixXd basis(p, spanning_vectors.size());
  int k = 0;
  for (const auto& v : spanning_vectors) {
    Eigen::VectorXd u = v;
    for (int j = 0; j < k; ++j) u -= basis.col(j).dot(u) * basis.col(j);
    const double norm = u.norm();
    if (norm < kSpanDropTol) continue;  // linearly dependent (or zero) direction
    basis.col(k++) = u / norm;
  }
  require(k >= 1, ErrorCode::degenerate_span, "spanning vectors are numerically zero");
  require(k < p, ErrorCode::degenerate_span, "sensitive subspace covers the whole feature space");
  basis.conservativeResize(Eigen::NoChange, k);
  return SensitiveSubspace{std::move(basis)};
}

FairItemMetric::FairItemMetric(SensitiveSubspace subspace, MetricMode mode)
    : subspace_(std::move(subspace)), mode_(mode) {
  const auto& B = subspace_.basis;
  require(B.cols() >= 1 && B.cols() < B.rows(), ErrorCode::degenerate_span,
          "subspace rank must satisfy 1 <= k < p");
  Eigen::MatrixXd gram = B.transpose() * B;
  gram.diagonal().array() -= 1.0;
  require(gram.cwiseAbs().maxCoeff() < kOrthoTol, ErrorCode::invalid_config,
          "subspace basis is not orthonormal");
  projector_ = Eigen::MatrixXd::Identity(B.rows(), B.rows()) - B * B.transpose();
}

RidgeFit fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const RidgeFitOptions& opt) {
  const auto n = X.rows();
  const auto d = X.cols();
  require(n >= 2, ErrorCode::too_short, "ridge fit needs at least two rows");
  require(y.size() == n, ErrorCode::length_mismatch, "ridge fit: X rows and y length differ");
  require(!opt.ridge_strengths.empty(), ErrorCode::invalid_config, "empty ridge strength grid");
  for (double a : opt.ridge_strengths)
    require(std::isfinite(a) && a > 0.0, ErrorCode::invalid_config,
            "ridge strengths must be positive");
  if (opt.embed_dim > 0) {
    require(d == opt.embed_dim - 1, ErrorCode::dimension_mismatch,
            "design width must be embed_dim - 1");
    require(opt.target_coordinate >= 0 && opt.target_coordinate < opt.embed_dim,
            ErrorCode::invalid_config, "target coordinate out of range");
  } else {
    require(opt.target_coordinate < 0, ErrorCode::invalid_config,
            "target coordinate given without embed_dim");
  }

  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y.mean();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  const Eigen::VectorXd uty = svd.matrixU().transpose() * yc;

  // Generalized cross-validation: n * RSS(alpha) / (n - tr H(alpha))^2 with
  // H = X (X^T X + alpha I)^{-1} X^T.  Ties pick the first strength in the grid.
  double best_gcv = std::numeric_limits<double>::infinity();
  double best_alpha = opt.ridge_strengths.front();
  for (double alpha : opt.ridge_strengths) {
    const Eigen::ArrayXd shrink = s.array().square() / (s.array().square() + alpha);
    const double tr_h = shrink.sum();
    const double rss = yc.squaredNorm() - uty.array().square().matrix().dot(
                                              (shrink * (2.0 - shrink)).matrix());
    const double denom = static_cast<double>(n) - tr_h;
    require(denom > kSingularTol, ErrorCode::singular_system, "GCV denominator vanished");
    const double gcv = static_cast<double>(n) * rss / (denom * denom);
    if (gcv < best_gcv) {
      best_gcv = gcv;
      best_alpha = alpha;
    }
  }

  const Eigen::ArrayXd filt = s.array() / (s.array().square() + best_alpha);
  Eigen::VectorXd w = svd.matrixV() * (filt * uty.array()).matrix();

  if (opt.embed_dim > 0) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(opt.embed_dim);
    int src = 0;
    for (int j = 0; j < opt.embed_dim; ++j)
      if (j != opt.target_coordinate) full(j) = w(src++);
    w = std::move(full);
  }
  return RidgeFit{std::move(w), best_alpha};
}

SensitiveSubspace fit_subspace_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const RidgeFitOptions& opt) {
  std::vector<Eigen::VectorXd> span{fit_ridge(X, y, opt).coefficient};
  span.insert(span.end(), opt.extra_basis.begin(), opt.extra_basis.end());
  return make_subspace(span);
}

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                         const LogisticFitOptions& opt) {
  const auto n = X.rows();
  const auto p = X.cols();
  require(static_cast<Eigen::Index>(labels.size()) == n, ErrorCode::length_mismatch,
          "logistic fit: X rows and label count differ");
  require(n >= 2, ErrorCode::too_short, "logistic fit needs at least two rows");
  require(opt.l2_strength > 0.0, ErrorCode::invalid_config, "l2 strength must be positive");

  Eigen::VectorXd sign(n);
  bool saw0 = false, saw1 = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    require(labels[i] == 0 || labels[i] == 1, ErrorCode::invalid_config,
            "logistic labels must be 0/1");
    sign(i) = labels[i] == 1 ? 1.0 : -1.0;
    (labels[i] == 1 ? saw1 : saw0) = true;
  }
  require(saw0 && saw1, ErrorCode::single_class, "logistic fit saw only one class");

  // Fixed-step gradient descent; the step is 1 over an upper bound of the
  // Hessian spectral norm, so the iteration is a contraction on this loss.
  const double lip = X.squaredNorm() / (4.0 * static_cast<double>(n)) + 0.25 + opt.l2_strength;
  const double step = 1.0 / lip;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  double b = 0.0;
  int it = 0;
  bool converged = false;
  for (; it < opt.max_iters; ++it) {
    const Eigen::ArrayXd margin = -(sign.array() * ((X * w).array() + b));
    // sigmoid(margin) without overflow on either tail
    const Eigen::ArrayXd sig =
        (margin > 0.0)
            .select(1.0 / (1.0 + (-margin).exp()), margin.exp() / (1.0 + margin.exp()));
    const Eigen::VectorXd resid = -(sign.array() * sig).matrix() / static_cast<double>(n);
    const Eigen::VectorXd gw = X.transpose() * resid + opt.l2_strength * w;
    const double gb = resid.sum();
    if (std::sqrt(gw.squaredNorm() + gb * gb) < opt.tol) {
      converged = true;
      break;
    }
    w -= step * gw;
    b -= step * gb;
  }
  require(converged, ErrorCode::no_convergence, "logistic fit did not reach tolerance");
  return LogisticFit{std::move(w), b, it};
}

SensitiveSubspace fit_subspace_logistic(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                                        const LogisticFitOptions& opt) {
  return make_subspace({fit_logistic(X, labels, opt).weights});
}

double item_distance(const FairItemMetric& m, const FeatureVector& x, const FeatureVector& x2) {
  require(x.size() == m.dim() && x2.size() == m.dim(), ErrorCode::dimension_mismatch,
          "item dimension does not match metric");
  const double sq = (m.complement_projector() * (x - x2)).squaredNorm();
  return m.mode() == MetricMode::squared ? sq : std::sqrt(sq);
}

FeatureVector item_distance_grad2(const FairItemMetric& m, const FeatureVector& x,
                                  const FeatureVector& x2) {
  require(x.size() == m.dim() && x2.size() == m.dim(), ErrorCode::dimension_mismatch,
          "item dimension does not match metric");
  const FeatureVector proj = m.complement_projector() * (x2 - x);
  if (m.mode() == MetricMode::squared) return 2.0 * proj;
  const double dist = proj.norm();
  if (dist < kSingularTol) return FeatureVector::Zero(x.size());
  return proj / dist;
}

Dataset project_complement(const FairItemMetric& m, const Dataset& data) {
  require(data.feature_dim == m.dim(), ErrorCode::dimension_mismatch,
          "dataset dimension does not match metric");
  Dataset out = data;
  for (auto& q : out.queries)
    for (auto& item : q.items) item.features = m.complement_projector() * item.features;
  return out;
}

}  // namespace senstir
