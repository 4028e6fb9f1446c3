#include "genemix/interaction_prior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace genemix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double chol_factor_log_prior(const MatrixXd& f) {
  double s = 0.0;
  for (Index c = 0; c < f.cols(); ++c) {
    const double d = f(c, c);
    if (!(d > 0.0)) return kNegInf;
    s += gamma_logpdf(d, kCholDiagShape, kCholDiagRate);
    for (Index r = c + 1; r < f.rows(); ++r) s += normal_logpdf(f(r, c), 0.0, kCholOffDiagSd);
  }
  return s;
}

Index tri_size(Index n) { return n * (n + 1) / 2; }

void pack_lower(const MatrixXd& f, VectorXd& theta, Index& pos) {
  for (Index c = 0; c < f.cols(); ++c)
    for (Index r = c; r < f.rows(); ++r) theta[pos++] = f(r, c);
}

MatrixXd unpack_lower(Index n, const Eigen::Ref<const VectorXd>& theta, Index& pos) {
  MatrixXd f = MatrixXd::Zero(n, n);
  for (Index c = 0; c < n; ++c)
    for (Index r = c; r < n; ++r) f(r, c) = theta[pos++];
  return f;
}

void require_shape(const MatrixXd& m, Index rows, Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols)
    throw std::invalid_argument(std::string("InteractionState: ") + name + " has wrong shape");
}

}  // namespace

InteractionState InteractionState::at_prior_means(const ModelDims& dims) {
  const Index J = dims.n_genes();
  const Index N = dims.n_individuals();
  const Index L = dims.max_loci();
  InteractionState s;
  s.lambda = MatrixXd::Zero(J, N);
  s.a_chol = MatrixXd::Identity(J, J);
  s.sigma_chol = MatrixXd::Identity(N, N);
  s.mu = MatrixXd::Zero(J, 2);
  s.beta.assign(dims.env_dim, MatrixXd::Zero(J, 2));
  s.u = VectorXd::Zero(L);
  s.v = VectorXd::Zero(L);
  s.b = 1.0;
  s.phi = 1.0;
  s.c_alpha = MatrixXd::Identity(J, J);
  s.d_alpha = MatrixXd::Identity(2, 2);
  s.c_beta = MatrixXd::Identity(J, J);
  s.d_beta = MatrixXd::Identity(2, 2);
  return s;
}

void InteractionState::check_dims(const ModelDims& dims) const {
  const Index J = dims.n_genes();
  const Index N = dims.n_individuals();
  require_shape(lambda, J, N, "lambda");
  require_shape(a_chol, J, J, "a_chol");
  require_shape(sigma_chol, N, N, "sigma_chol");
  require_shape(mu, J, 2, "mu");
  if (static_cast<Index>(beta.size()) != dims.env_dim)
    throw std::invalid_argument("InteractionState: beta count differs from env_dim");
  for (const auto& bl : beta) require_shape(bl, J, 2, "beta");
  if (u.size() != dims.max_loci() || v.size() != dims.max_loci())
    throw std::invalid_argument("InteractionState: u/v length differs from max loci");
  require_shape(c_alpha, J, J, "c_alpha");
  require_shape(d_alpha, 2, 2, "d_alpha");
  require_shape(c_beta, J, J, "c_beta");
  require_shape(d_beta, 2, 2, "d_beta");
}

KernelMatrix kernel_from_squared_distances(const MatrixXd& d2, double b) {
  if (!(b > 0.0)) throw std::domain_error("compute_kernel: b must be positive");
  return {(-b * d2.array()).exp().matrix()};
}

KernelMatrix compute_kernel(const EnvCovariates& env, double b) {
  return kernel_from_squared_distances(squared_distances(env.values), b);
}

MatrixXd effective_right_cov(const MatrixXd& sigma_chol, double phi, const KernelMatrix& kernel) {
  if (phi < 0.0) throw std::domain_error("effective_right_cov: phi must be nonnegative");
  MatrixXd s = sigma_chol.triangularView<Eigen::Lower>() * sigma_chol.transpose();
  s.noalias() += phi * kernel.values;
  return s;
}

BetaShapes beta_shapes(double u, double v, double lambda, double mu, double beta_dot_env) {
  const double common = lambda + mu + beta_dot_env;
  const double a1 = u + common;
  const double a2 = v + common;
  BetaShapes out;
  out.clamped = !(std::abs(a1) <= kMaxLinkExponent) || !(std::abs(a2) <= kMaxLinkExponent);
  out.nu1 = std::exp(std::clamp(a1, -kMaxLinkExponent, kMaxLinkExponent));
  out.nu2 = std::exp(std::clamp(a2, -kMaxLinkExponent, kMaxLinkExponent));
  return out;
}

double gamma_logpdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sd) - 0.5 * z * z;
}

double lognormal_logpdf(double x, double log_mean, double log_sd) {
  if (!(x > 0.0)) return kNegInf;
  return normal_logpdf(std::log(x), log_mean, log_sd) - std::log(x);
}

double log_prior_hyper(const InteractionState& s) {
  double lp = 0.0;
  for (const MatrixXd* f : {&s.a_chol, &s.sigma_chol, &s.c_alpha, &s.d_alpha, &s.c_beta, &s.d_beta}) {
    lp += chol_factor_log_prior(*f);
    if (lp == kNegInf) return lp;
  }
  for (Index r = 0; r < s.u.size(); ++r)
    lp += normal_logpdf(s.u[r], 0.0, 1.0) + normal_logpdf(s.v[r], 0.0, 1.0);
  lp += matrix_normal_logpdf_chol(s.mu, s.c_alpha, s.d_alpha);
  for (const auto& bl : s.beta) lp += matrix_normal_logpdf_chol(bl, s.c_beta, s.d_beta);
  lp += lognormal_logpdf(s.b, 0.0, kLogNormalSd);
  lp += lognormal_logpdf(s.phi, 0.0, kLogNormalSd);
  return lp;
}

G0Stats g0_stats(const MixtureState& state) {
  G0Stats g;
  g.tau = state.n_distinct();
  g.sum_log_p = state.distinct.array().log().colwise().sum().transpose();
  g.sum_log_q = (1.0 - state.distinct.array()).log().colwise().sum().transpose();
  return g;
}

ModelContext::ModelContext(ModelDims dims, MatrixXd env_values)
    : dims_(std::move(dims)), env_(std::move(env_values)) {
  if (env_.rows() != dims_.n_individuals() || env_.cols() != dims_.env_dim)
    throw std::invalid_argument("ModelContext: environment shape differs from dims");
  sq_dist_ = squared_distances(env_);
}

ModelContext::ModelContext(const GenotypeDataset& data, const EnvCovariates& env)
    : ModelContext(dims_of(data, env), env.values) {}

const KernelMatrix& ModelContext::kernel(double b) const {
  if (b != cached_b_) {
    cached_kernel_ = kernel_from_squared_distances(sq_dist_, b);
    cached_b_ = b;
  }
  return cached_kernel_;
}

BetaHyper ModelContext::triplet_hyper(const InteractionState& state, Index t, bool* clamped) const {
  const Index g = individual_of(t);
  const Index j = gene_of(t);
  const int k = status_of(t);
  double beta_dot_env = 0.0;
  for (Index l = 0; l < dims_.env_dim; ++l) beta_dot_env += state.beta[l](j, k) * env_(g, l);
  const Index L = dims_.loci[j];
  BetaHyper h{VectorXd(L), VectorXd(L)};
  bool any = false;
  for (Index r = 0; r < L; ++r) {
    const BetaShapes bs =
        beta_shapes(state.u[r], state.v[r], state.lambda(j, g), state.mu(j, k), beta_dot_env);
    h.nu1[r] = bs.nu1;
    h.nu2[r] = bs.nu2;
    any = any || bs.clamped;
  }
  if (clamped) *clamped = any;
  return h;
}

double log_base_measure(const InteractionState& state, std::span<const G0Stats> stats,
                        const ModelContext& ctx) {
  if (static_cast<Index>(stats.size()) != ctx.n_triplets())
    throw std::invalid_argument("log_base_measure: one G0Stats per triplet is required");
  double total = 0.0;
  for (Index t = 0; t < ctx.n_triplets(); ++t) {
    bool clamped = false;
    const BetaHyper h = ctx.triplet_hyper(state, t, &clamped);
    if (clamped) return kNegInf;
    const G0Stats& g = stats[t];
    for (Index r = 0; r < h.loci(); ++r) {
      total += (h.nu1[r] - 1.0) * g.sum_log_p[r] + (h.nu2[r] - 1.0) * g.sum_log_q[r] -
               static_cast<double>(g.tau) * log_beta_fn(h.nu1[r], h.nu2[r]);
    }
  }
  return total;
}

double log_joint(const InteractionState& state, std::span<const G0Stats> stats,
                 const ModelContext& ctx) {
  const double prior = log_prior_hyper(state);
  if (prior == kNegInf) return kNegInf;
  const MatrixXd right = effective_right_cov(state.sigma_chol, state.phi, ctx.kernel(state.b));
  Eigen::LLT<MatrixXd> llt(right);
  if (llt.info() != Eigen::Success) return kNegInf;
  const MatrixXd right_chol = llt.matrixL();
  const double mn = matrix_normal_logpdf_chol(state.lambda, state.a_chol, right_chol);
  const double base = log_base_measure(state, stats, ctx);
  const double total = prior + mn + base;
  return std::isnan(total) ? kNegInf : total;
}

double log_joint(const InteractionState& state, std::span<const MixtureState> mixtures,
                 const ModelContext& ctx) {
  std::vector<G0Stats> stats;
  stats.reserve(mixtures.size());
  for (const auto& m : mixtures) stats.push_back(g0_stats(m));
  return log_joint(state, stats, ctx);
}

ParameterLayout::ParameterLayout(const ModelDims& dims) : dims_(dims) {
  const Index J = dims.n_genes();
  const Index N = dims.n_individuals();
  const Index L = dims.max_loci();
  auto add = [&](std::string name, Index size) {
    blocks_.push_back({std::move(name), size_, size});
    size_ += size;
  };
  add("lambda", J * N);
  add("a_chol", tri_size(J));
  add("sigma_chol", tri_size(N));
  add("mu", J * 2);
  add("beta", dims.env_dim * J * 2);
  add("u", L);
  add("v", L);
  add("b", 1);
  add("phi", 1);
  add("c_alpha", tri_size(J));
  add("d_alpha", tri_size(2));
  add("c_beta", tri_size(J));
  add("d_beta", tri_size(2));

  positive_.assign(size_, false);
  for (const auto& bl : blocks_) {
    if (bl.name == "b" || bl.name == "phi") {
      positive_[bl.offset] = true;
    } else if (bl.name == "a_chol" || bl.name == "sigma_chol" || bl.name == "c_alpha" ||
               bl.name == "d_alpha" || bl.name == "c_beta" || bl.name == "d_beta") {
      const Index n = (bl.name == "d_alpha" || bl.name == "d_beta") ? 2
                      : bl.name == "sigma_chol"                     ? N
                                                                    : J;
      Index pos = bl.offset;
      for (Index c = 0; c < n; ++c) {
        positive_[pos] = true;  // diagonal opens each packed column
        pos += n - c;
      }
    }
  }
}

VectorXd ParameterLayout::pack(const InteractionState& s) const {
  s.check_dims(dims_);
  VectorXd theta(size_);
  Index pos = 0;
  theta.segment(pos, s.lambda.size()) = s.lambda.reshaped();
  pos += s.lambda.size();
  pack_lower(s.a_chol, theta, pos);
  pack_lower(s.sigma_chol, theta, pos);
  theta.segment(pos, s.mu.size()) = s.mu.reshaped();
  pos += s.mu.size();
  for (const auto& bl : s.beta) {
    theta.segment(pos, bl.size()) = bl.reshaped();
    pos += bl.size();
  }
  theta.segment(pos, s.u.size()) = s.u;
  pos += s.u.size();
  theta.segment(pos, s.v.size()) = s.v;
  pos += s.v.size();
  theta[pos++] = s.b;
  theta[pos++] = s.phi;
  pack_lower(s.c_alpha, theta, pos);
  pack_lower(s.d_alpha, theta, pos);
  pack_lower(s.c_beta, theta, pos);
  pack_lower(s.d_beta, theta, pos);
  return theta;
}

InteractionState ParameterLayout::unpack(const Eigen::Ref<const VectorXd>& theta) const {
  if (theta.size() != size_) throw std::invalid_argument("ParameterLayout: wrong vector length");
  const Index J = dims_.n_genes();
  const Index N = dims_.n_individuals();
  const Index L = dims_.max_loci();
  InteractionState s;
  Index pos = 0;
  s.lambda = theta.segment(pos, J * N).reshaped(J, N);
  pos += J * N;
  s.a_chol = unpack_lower(J, theta, pos);
  s.sigma_chol = unpack_lower(N, theta, pos);
  s.mu = theta.segment(pos, J * 2).reshaped(J, 2);
  pos += J * 2;
  for (Index l = 0; l < dims_.env_dim; ++l) {
    s.beta.push_back(theta.segment(pos, J * 2).reshaped(J, 2));
    pos += J * 2;
  }
  s.u = theta.segment(pos, L);
  pos += L;
  s.v = theta.segment(pos, L);
  pos += L;
  s.b = theta[pos++];
  s.phi = theta[pos++];
  s.c_alpha = unpack_lower(J, theta, pos);
  s.d_alpha = unpack_lower(2, theta, pos);
  s.c_beta = unpack_lower(J, theta, pos);
  s.d_beta = unpack_lower(2, theta, pos);
  return s;
}

const std::string& ParameterLayout::block_of(Index i) const {
  for (const auto& bl : blocks_)
    if (i >= bl.offset && i < bl.offset + bl.size) return bl.name;
  throw std::out_of_range("ParameterLayout: coordinate out of range");
}

}  // namespace genemix
