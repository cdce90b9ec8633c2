#pragma once

#include <Eigen/Core>
#include <vector>

#include "senstir/core.hpp"

namespace senstir {

// Orthonormal basis of the sensitive directions in feature space.
struct SensitiveSubspace {
  Eigen::MatrixXd basis;  // p x k, orthonormal columns, 1 <= k < p

  int dim() const { return static_cast<int>(basis.rows()); }
  int rank() const { return static_cast<int>(basis.cols()); }
};

// Modified Gram-Schmidt over the given spanning vectors; directions whose
// residual norm falls below 1e-10 are dropped (k reduced, not an error).
SensitiveSubspace make_subspace(const std::vector<Eigen::VectorXd>& spanning_vectors);

enum class MetricMode { euclidean, squared };

// Distance between items that ignores the sensitive subspace: Euclidean norm
// (or its square) of the difference projected onto the orthogonal complement.
class FairItemMetric {
 public:
  explicit FairItemMetric(SensitiveSubspace subspace, MetricMode mode = MetricMode::euclidean);

  const SensitiveSubspace& subspace() const { return subspace_; }
  const Eigen::MatrixXd& complement_projector() const { return projector_; }
  MetricMode mode() const { return mode_; }
  int dim() const { return subspace_.dim(); }

 private:
  SensitiveSubspace subspace_;
  Eigen::MatrixXd projector_;  // I - B B^T
  MetricMode mode_;
};

struct RidgeFitOptions {
  std::vector<double> ridge_strengths{0.1, 1.0, 10.0};  // all > 0; picked by GCV
  std::vector<Eigen::VectorXd> extra_basis;             // appended to the coefficient span
  // When X omits the target coordinate, embed_dim is the full feature dimension
  // and target_coordinate is the index that receives a zero coefficient.
  int embed_dim = 0;
  int target_coordinate = -1;
};

// Closed-form ridge on centered data, strength chosen by generalized
// cross-validation over the grid; coefficient embedded to full dimension when
// the target coordinate was excluded from the design.
struct RidgeFit {
  Eigen::VectorXd coefficient;
  double alpha = 0.0;  // selected strength
};

RidgeFit fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const RidgeFitOptions& opt);

SensitiveSubspace fit_subspace_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const RidgeFitOptions& opt);

struct LogisticFitOptions {
  double l2_strength = 0.01;
  int max_iters = 200000;
  double tol = 1e-7;  // gradient-norm stopping rule
};

// Full-batch gradient descent on the L2-regularized logistic loss (bias
// unregularized) to gradient-norm tolerance.
struct LogisticFit {
  Eigen::VectorXd weights;
  double bias = 0.0;
  int iterations = 0;
};

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                         const LogisticFitOptions& opt);

SensitiveSubspace fit_subspace_logistic(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                                        const LogisticFitOptions& opt);

double item_distance(const FairItemMetric& m, const FeatureVector& x, const FeatureVector& x2);

// Derivative of item_distance in its second argument. At the singular point of
// the euclidean mode (coinciding projections) returns the zero subgradient.
FeatureVector item_distance_grad2(const FairItemMetric& m, const FeatureVector& x,
                                  const FeatureVector& x2);

// Every item's features replaced by their complement projection; relevances
// and groups unchanged.
Dataset project_complement(const FairItemMetric& m, const Dataset& data);

}  // namespace senstir
