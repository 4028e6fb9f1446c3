#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "genemix/data_model.hpp"
#include "genemix/dp_mixture.hpp"
#include "genemix/types.hpp"

namespace genemix {

/// Interaction layer of the model. Positive-definite matrices are carried as
/// lower-triangular Cholesky factors with positive diagonals.
///
///   lambda      J x N, genes by individuals (controls then cases)
///   a_chol      J x J, A = a_chol a_chol'       (gene-gene covariance)
///   sigma_chol  N x N, Sigma = sigma_chol sigma_chol'
///   mu          J x 2, column k = case status
///   beta        D matrices of J x 2, one per environmental coordinate
///   u, v        length max L_j, shared across genes
///   b, phi      kernel smoothness and environment weight
///   c_alpha, d_alpha, c_beta, d_beta
///               factors of the row/column covariances of mu and beta
struct InteractionState {
  MatrixXd lambda;
  MatrixXd a_chol;
  MatrixXd sigma_chol;
  MatrixXd mu;
  std::vector<MatrixXd> beta;
  VectorXd u, v;
  double b = 1.0;
  double phi = 1.0;
  MatrixXd c_alpha, d_alpha, c_beta, d_beta;

  /// Prior means: zeros for Gaussian blocks, identity factors, b = phi = 1.
  static InteractionState at_prior_means(const ModelDims& dims);

  MatrixXd a() const { return a_chol * a_chol.transpose(); }
  MatrixXd sigma() const { return sigma_chol * sigma_chol.transpose(); }

  /// Throws std::invalid_argument when block shapes do not match dims.
  void check_dims(const ModelDims& dims) const;
};

/// Environment kernel E_ij = exp(-b ||E_i - E_j||^2).
struct KernelMatrix {
  MatrixXd values;
};

template <typename Derived>
MatrixXd squared_distances(const Eigen::MatrixBase<Derived>& points) {
  const Index n = points.rows();
  MatrixXd d2(n, n);
  for (Index i = 0; i < n; ++i) {
    d2(i, i) = 0.0;
    for (Index j = 0; j < i; ++j) d2(i, j) = d2(j, i) = (points.row(i) - points.row(j)).squaredNorm();
  }
  return d2;
}

KernelMatrix kernel_from_squared_distances(const MatrixXd& d2, double b);
KernelMatrix compute_kernel(const EnvCovariates& env, double b);

/// Sigma~ = Sigma + phi * E.
MatrixXd effective_right_cov(const MatrixXd& sigma_chol, double phi, const KernelMatrix& kernel);

/// Link-function exponents are clamped to this range; `clamped` reports it.
inline constexpr double kMaxLinkExponent = 30.0;

struct BetaShapes {
  double nu1 = 1.0;
  double nu2 = 1.0;
  bool clamped = false;
};

/// nu1 = exp(u + lambda + mu + beta'E), nu2 = exp(v + lambda + mu + beta'E).
BetaShapes beta_shapes(double u, double v, double lambda, double mu, double beta_dot_env);

template <typename DB, typename DE>
BetaShapes beta_shapes(double u, double v, double lambda, double mu,
                       const Eigen::MatrixBase<DB>& beta, const Eigen::MatrixBase<DE>& env) {
  return beta_shapes(u, v, lambda, mu, beta.dot(env));
}

/// Matrix-normal log-density with the row covariance and column covariance
/// given by lower Cholesky factors. `centered` is Lambda - xi.
template <typename DX, typename DA, typename DS>
typename DX::Scalar matrix_normal_logpdf_chol(const Eigen::MatrixBase<DX>& centered,
                                              const Eigen::MatrixBase<DA>& row_chol,
                                              const Eigen::MatrixBase<DS>& col_chol) {
  using Scalar = typename DX::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index J = centered.rows();
  const Index N = centered.cols();
  const Scalar logdet_row = 2 * row_chol.diagonal().array().log().sum();
  const Scalar logdet_col = 2 * col_chol.diagonal().array().log().sum();
  const Mat y = row_chol.template triangularView<Eigen::Lower>().solve(centered);
  const Mat w = col_chol.template triangularView<Eigen::Lower>().solve(y.transpose());
  return -Scalar(0.5) * J * N * std::log(2 * std::numbers::pi_v<Scalar>) -
         Scalar(0.5) * N * logdet_row - Scalar(0.5) * J * logdet_col -
         Scalar(0.5) * w.squaredNorm();
}

/// Matrix-normal log-density of Lambda with mean xi, row covariance A and
/// column covariance Sigma~. Throws std::domain_error if either covariance
/// is not positive definite.
template <typename DL, typename DM, typename DA, typename DS>
typename DL::Scalar matrix_normal_logpdf(const Eigen::MatrixBase<DL>& lambda,
                                         const Eigen::MatrixBase<DM>& xi,
                                         const Eigen::MatrixBase<DA>& row_cov,
                                         const Eigen::MatrixBase<DS>& col_cov) {
  using Scalar = typename DL::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::LLT<Mat> la(row_cov.eval());
  Eigen::LLT<Mat> ls(col_cov.eval());
  if (la.info() != Eigen::Success || ls.info() != Eigen::Success)
    throw std::domain_error("matrix_normal_logpdf: covariance is not positive definite");
  const Mat centered = lambda - xi;
  return matrix_normal_logpdf_chol(centered, Mat(la.matrixL()), Mat(ls.matrixL()));
}

double gamma_logpdf(double x, double shape, double rate);
double normal_logpdf(double x, double mean, double sd);
double lognormal_logpdf(double x, double log_mean, double log_sd);

// Hyperprior settings.
inline constexpr double kCholDiagShape = 0.01;
inline constexpr double kCholDiagRate = 0.01;
inline constexpr double kCholOffDiagSd = 10.0;
inline constexpr double kLogNormalSd = 10.0;

/// Log prior of everything except Lambda: Cholesky factors, u, v, mu, beta,
/// b and phi. Returns -inf outside the support.
double log_prior_hyper(const InteractionState& state);

/// Sufficient statistics of a triplet's distinct frequencies for the
/// base-measure terms: tau and per-locus sums of log p and log(1-p).
struct G0Stats {
  Index tau = 0;
  VectorXd sum_log_p;
  VectorXd sum_log_q;
};

G0Stats g0_stats(const MixtureState& state);

/// Dimensions, covariates and triplet indexing shared by the likelihood
/// evaluations. Triplet t = g * J + j, where g is the global individual
/// index (controls first), so controls' triplets precede cases'.
class ModelContext {
 public:
  ModelContext(ModelDims dims, MatrixXd env_values);
  ModelContext(const GenotypeDataset& data, const EnvCovariates& env);

  const ModelDims& dims() const { return dims_; }
  const MatrixXd& env() const { return env_; }
  Index n_triplets() const { return dims_.n_individuals() * dims_.n_genes(); }
  Index triplet(Index individual, Index gene) const { return individual * dims_.n_genes() + gene; }
  Index individual_of(Index t) const { return t / dims_.n_genes(); }
  Index gene_of(Index t) const { return t % dims_.n_genes(); }
  int status_of(Index t) const { return individual_of(t) < dims_.n_controls ? kControl : kCase; }

  /// Kernel at smoothness b. Caches the last value; not safe to call
  /// concurrently.
  const KernelMatrix& kernel(double b) const;

  /// Base-measure shapes for triplet t under `state`. `clamped` is set when
  /// any link exponent left [-30, 30].
  BetaHyper triplet_hyper(const InteractionState& state, Index t, bool* clamped = nullptr) const;

 private:
  ModelDims dims_;
  MatrixXd env_;
  MatrixXd sq_dist_;
  mutable double cached_b_ = std::numeric_limits<double>::quiet_NaN();
  mutable KernelMatrix cached_kernel_;
};

/// Sum over triplets of the Beta log-densities of every distinct frequency.
double log_base_measure(const InteractionState& state, std::span<const G0Stats> stats,
                        const ModelContext& ctx);

/// Log of the interaction-parameter full conditional, up to a constant:
/// log_prior_hyper + matrix-normal(Lambda) + base-measure terms. Returns
/// -inf for clamped shapes or a non-positive-definite Sigma~.
double log_joint(const InteractionState& state, std::span<const G0Stats> stats,
                 const ModelContext& ctx);
double log_joint(const InteractionState& state, std::span<const MixtureState> mixtures,
                 const ModelContext& ctx);

/// Flat layout of the TMCMC block. Only the lower triangles of the Cholesky
/// factors are included.
class ParameterLayout {
 public:
  explicit ParameterLayout(const ModelDims& dims);

  Index size() const { return size_; }
  VectorXd pack(const InteractionState& state) const;
  InteractionState unpack(const Eigen::Ref<const VectorXd>& theta) const;
  /// True for coordinates constrained positive (Cholesky diagonals, b, phi).
  const std::vector<bool>& positive() const { return positive_; }
  /// Name of the block a coordinate belongs to.
  const std::string& block_of(Index i) const;

 private:
  struct Block {
    std::string name;
    Index offset;
    Index size;
  };
  ModelDims dims_;
  Index size_ = 0;
  std::vector<Block> blocks_;
  std::vector<bool> positive_;
};

}  // namespace genemix
