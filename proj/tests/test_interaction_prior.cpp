#include <cmath>
#include <numbers>

#include <boost/math/distributions/beta.hpp>

#include "doctest.h"
#include "genemix/interaction_prior.hpp"
#include "oracles.hpp"

using namespace genemix;

namespace {

MatrixXd random_pd(Index n, CounterRng& rng) {
  MatrixXd g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = sample_normal(rng);
  return g * g.transpose() + 0.1 * MatrixXd::Identity(n, n);
}

MatrixXd random_matrix(Index r, Index c, CounterRng& rng) {
  MatrixXd m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = sample_normal(rng);
  return m;
}

MatrixXd random_chol(Index n, CounterRng& rng) {
  MatrixXd f = MatrixXd::Zero(n, n);
  for (Index c = 0; c < n; ++c) {
    f(c, c) = 0.5 + rng.uniform();
    for (Index r = c + 1; r < n; ++r) f(r, c) = 0.3 * sample_normal(rng);
  }
  return f;
}

InteractionState random_state(const ModelDims& dims, CounterRng& rng) {
  InteractionState s = InteractionState::at_prior_means(dims);
  const Index J = dims.n_genes(), N = dims.n_individuals(), L = dims.max_loci();
  s.lambda = 0.3 * random_matrix(J, N, rng);
  s.a_chol = random_chol(J, rng);
  s.sigma_chol = random_chol(N, rng);
  s.mu = 0.3 * random_matrix(J, 2, rng);
  for (auto& b : s.beta) b = 0.3 * random_matrix(J, 2, rng);
  s.u = 0.3 * random_matrix(L, 1, rng);
  s.v = 0.3 * random_matrix(L, 1, rng);
  s.b = 0.5 + rng.uniform();
  s.phi = 0.5 + rng.uniform();
  s.c_alpha = random_chol(J, rng);
  s.d_alpha = random_chol(2, rng);
  s.c_beta = random_chol(J, rng);
  s.d_beta = random_chol(2, rng);
  return s;
}

std::vector<MixtureState> random_mixtures(const ModelContext& ctx, const InteractionState& s, Index M,
                                          CounterRng& rng) {
  std::vector<MixtureState> out;
  for (Index t = 0; t < ctx.n_triplets(); ++t) out.push_back(draw_polya_urn_prior(M, 1.5, ctx.triplet_hyper(s, t), rng));
  return out;
}

}  // namespace

TEST_SUITE("interaction_prior") {

TEST_CASE("kernel entries") {
  MatrixXd e(3, 1);
  e << 1.0, 1.0, 0.0;
  const KernelMatrix k = kernel_from_squared_distances(squared_distances(e), 0.7);
  CHECK(k.values(0, 1) == 1.0);
  CHECK(k.values(0, 2) == doctest::Approx(std::exp(-0.7)));
  CHECK(k.values.diagonal() == VectorXd::Ones(3));

  MatrixXd two(2, 2);
  two << 0.0, 0.0, 1.0, 1.0;
  CHECK(kernel_from_squared_distances(squared_distances(two), 0.5).values(0, 1) == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(kernel_from_squared_distances(squared_distances(two), 0.0), std::domain_error);
}

TEST_CASE("kernel is symmetric positive semidefinite") {
  CounterRng rng(1, 0, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const Index n = 2 + sample_index(rng, 49);
    const Index d = 1 + sample_index(rng, 3);
    const MatrixXd pts = random_matrix(n, d, rng);
    const KernelMatrix k = kernel_from_squared_distances(squared_distances(pts), 0.05 + 3.0 * rng.uniform());
    CHECK(k.values.isApprox(k.values.transpose()));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(k.values);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    CHECK(k.values.maxCoeff() <= 1.0);
    CHECK(k.values.minCoeff() > 0.0);
  }
}

TEST_CASE("effective right covariance") {
  const MatrixXd I2 = MatrixXd::Identity(2, 2);
  KernelMatrix k{MatrixXd::Identity(2, 2)};
  CHECK(effective_right_cov(I2, 0.0, KernelMatrix{MatrixXd::Ones(2, 2)}) == I2);
  CHECK(effective_right_cov(I2, 1.0, k) == 2.0 * I2);
  k.values(0, 1) = k.values(1, 0) = 0.5;
  const MatrixXd s = effective_right_cov(I2, 2.0, k);
  CHECK(s(0, 1) == doctest::Approx(1.0));
  CHECK(s(0, 0) == doctest::Approx(3.0));
  CHECK_THROWS_AS(effective_right_cov(I2, -0.1, k), std::domain_error);
}

TEST_CASE("effective right covariance stays positive definite") {
  CounterRng rng(2, 0, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const Index n = 1 + sample_index(rng, 8);
    const MatrixXd chol = random_chol(n, rng);
    const KernelMatrix k = kernel_from_squared_distances(squared_distances(random_matrix(n, 2, rng)), rng.uniform() + 0.01);
    Eigen::LLT<MatrixXd> llt(effective_right_cov(chol, 5.0 * rng.uniform(), k));
    REQUIRE(llt.info() == Eigen::Success);
  }
}

TEST_CASE("link functions") {
  BetaShapes s = beta_shapes(0.0, 0.0, 0.0, 0.0, 0.0);
  CHECK(s.nu1 == 1.0);
  CHECK(s.nu2 == 1.0);
  s = beta_shapes(std::log(2.0), 0.0, 0.0, 0.0, 0.0);
  CHECK(s.nu1 == doctest::Approx(2.0));
  CHECK(s.nu2 == 1.0);
  CHECK(beta_shapes(0.0, 0.4, 0.0, 0.0, 0.0).nu2 == doctest::Approx(std::exp(0.4)));
  CHECK(beta_shapes(0.1, 0.0, -0.2, 0.3, 0.4).nu1 == doctest::Approx(std::exp(0.6)));
  Eigen::Vector2d beta(0.5, -1.0), env(2.0, 0.6);
  CHECK(beta_shapes(0.0, 0.0, 0.0, 0.0, beta, env).nu1 == doctest::Approx(std::exp(0.4)));
  CHECK(beta_shapes(31.0, 0.0, 0.0, 0.0, 0.0).clamped);
  CHECK_FALSE(beta_shapes(29.0, 0.0, 0.0, 0.0, 0.0).clamped);
}

TEST_CASE("link functions are positive and increasing") {
  CounterRng rng(3, 0, 0);
  for (int rep = 0; rep < 200; ++rep) {
    double x[5];
    for (double& v : x) v = 4.0 * sample_normal(rng);
    const BetaShapes base = beta_shapes(x[0], x[1], x[2], x[3], x[4]);
    CHECK(base.nu1 > 0.0);
    CHECK(base.nu2 > 0.0);
    for (int i = 2; i < 5; ++i) {
      double y[5];
      std::copy(x, x + 5, y);
      y[i] += 0.25;
      const BetaShapes up = beta_shapes(y[0], y[1], y[2], y[3], y[4]);
      CHECK(up.nu1 > base.nu1);
      CHECK(up.nu2 > base.nu2);
    }
  }
}

TEST_CASE("matrix normal scalar case") {
  const MatrixXd one = MatrixXd::Ones(1, 1);
  CHECK(matrix_normal_logpdf(one, one, one, one) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)));
}

TEST_CASE("matrix normal equals the Kronecker multivariate normal") {
  CounterRng rng(4, 0, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const Index J = 1 + sample_index(rng, 4), N = 1 + sample_index(rng, 4);
    const MatrixXd a = random_pd(J, rng), s = random_pd(N, rng);
    const MatrixXd x = random_matrix(J, N, rng), xi = random_matrix(J, N, rng);
    CHECK(std::abs(matrix_normal_logpdf(x, xi, a, s) - oracle::matrix_normal_by_kronecker(x, xi, a, s)) <= 1e-8);
  }
  MatrixXd bad = MatrixXd::Identity(2, 2);
  bad(1, 1) = -1.0;
  CHECK_THROWS_AS(matrix_normal_logpdf(MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2), bad, bad), std::domain_error);
}

TEST_CASE("hyperprior terms") {
  const double closed = 0.01 * std::log(0.01) - std::lgamma(0.01) - 0.01;
  CHECK(gamma_logpdf(1.0, 0.01, 0.01) == doctest::Approx(closed).epsilon(1e-14));

  const ModelDims dims{2, 2, 1, {2, 3}};
  InteractionState s = InteractionState::at_prior_means(dims);
  const double base = log_prior_hyper(s);
  CHECK(std::isfinite(base));
  s.a_chol(1, 0) = 1.7;
  CHECK(log_prior_hyper(s) - base == doctest::Approx(-1.7 * 1.7 / 200.0));
  s.a_chol(1, 1) = -0.1;
  CHECK(log_prior_hyper(s) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("log_joint without triplets reduces to the prior terms") {
  const ModelDims dims{0, 0, 1, {2}};
  const ModelContext ctx(dims, MatrixXd(0, 1));
  const InteractionState s = InteractionState::at_prior_means(dims);
  CHECK(log_joint(s, std::span<const MixtureState>{}, ctx) == doctest::Approx(log_prior_hyper(s)));
}

TEST_CASE("log_joint term by term on a single triplet") {
  const ModelDims dims{1, 0, 0, {1}};
  const ModelContext ctx(dims, MatrixXd(1, 0));
  InteractionState s = InteractionState::at_prior_means(dims);
  s.lambda(0, 0) = 0.4;
  s.u[0] = 0.2;
  s.v[0] = -0.5;
  s.mu(0, 0) = 0.1;
  s.a_chol(0, 0) = 1.3;
  s.sigma_chol(0, 0) = 0.8;
  s.phi = 0.6;
  MixtureState m;
  m.config = {0};
  m.occupancy = {1};
  m.distinct = MatrixXd::Constant(1, 1, 0.3);
  const std::vector<MixtureState> mix{m};

  // Lambda ~ N(0, a * (sigma^2 + phi)); frequency ~ Beta(exp(u + lambda + mu), exp(v + lambda + mu)).
  const double var = 1.3 * 1.3 * (0.8 * 0.8 + 0.6);
  const double lambda_term = -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.4 * 0.4 / (2.0 * var);
  boost::math::beta_distribution<> g0(std::exp(0.7), std::exp(0.0));
  const double g0_term = std::log(boost::math::pdf(g0, 0.3));
  CHECK(log_joint(s, mix, ctx) == doctest::Approx(log_prior_hyper(s) + lambda_term + g0_term).epsilon(1e-12));
}

TEST_CASE("log_joint is invariant to label order") {
  CounterRng rng(5, 0, 0);
  const ModelDims dims{2, 2, 1, {3, 2}};
  const ModelContext ctx(dims, random_matrix(4, 1, rng));
  const InteractionState s = random_state(dims, rng);
  std::vector<MixtureState> mix = random_mixtures(ctx, s, 6, rng);
  const double before = log_joint(s, mix, ctx);
  CHECK(std::isfinite(before));
  for (auto& m : mix) {
    // Reverse label order.
    const Index tau = m.n_distinct();
    m.distinct = m.distinct.colwise().reverse().eval();
    std::reverse(m.occupancy.begin(), m.occupancy.end());
    for (int& c : m.config) c = static_cast<int>(tau - 1 - c);
    m.check();
  }
  CHECK(log_joint(s, mix, ctx) == doctest::Approx(before).epsilon(1e-13));
}

TEST_CASE("a locus beyond a gene's length does not touch that gene") {
  CounterRng rng(6, 0, 0);
  const ModelDims dims{2, 1, 1, {2, 4}};
  const ModelContext ctx(dims, random_matrix(3, 1, rng));
  InteractionState s = random_state(dims, rng);
  const std::vector<MixtureState> mix = random_mixtures(ctx, s, 4, rng);
  std::vector<G0Stats> stats;
  for (const auto& m : mix) stats.push_back(g0_stats(m));

  auto gene_terms = [&](const InteractionState& st, Index gene) {
    double total = 0.0;
    for (Index t = 0; t < ctx.n_triplets(); ++t) {
      if (ctx.gene_of(t) != gene) continue;
      const BetaHyper h = ctx.triplet_hyper(st, t);
      for (Index l = 0; l < mix[t].n_distinct(); ++l)
        for (Index r = 0; r < h.loci(); ++r)
          total += std::log(boost::math::pdf(boost::math::beta_distribution<>(h.nu1[r], h.nu2[r]), mix[t].distinct(l, r)));
    }
    return total;
  };

  InteractionState p = s;
  p.u[3] += 0.8;
  for (Index t = 0; t < ctx.n_triplets(); ++t)
    if (ctx.gene_of(t) == 0) CHECK(ctx.triplet_hyper(p, t).nu1 == ctx.triplet_hyper(s, t).nu1);
  const double delta = log_joint(p, stats, ctx) - log_joint(s, stats, ctx);
  const double want = (log_prior_hyper(p) - log_prior_hyper(s)) + (gene_terms(p, 1) - gene_terms(s, 1));
  CHECK(delta == doctest::Approx(want).epsilon(1e-9));
  CHECK(gene_terms(p, 0) == gene_terms(s, 0));
}

TEST_CASE("log_joint rejects clamped shapes") {
  const ModelDims dims{1, 1, 1, {1}};
  const ModelContext ctx(dims, MatrixXd::Zero(2, 1));
  InteractionState s = InteractionState::at_prior_means(dims);
  CounterRng rng(7, 0, 0);
  const std::vector<MixtureState> mix = random_mixtures(ctx, s, 3, rng);
  CHECK(std::isfinite(log_joint(s, mix, ctx)));
  s.u[0] = 40.0;
  CHECK(log_joint(s, mix, ctx) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("parameter layout round-trips and marks positive coordinates") {
  CounterRng rng(8, 0, 0);
  const ModelDims dims{3, 2, 2, {4, 2, 3}};
  const ParameterLayout layout(dims);
  const Index J = 3, N = 5, L = 4;
  const Index tri = [](Index n) { return n * (n + 1) / 2; }(J);
  CHECK(layout.size() == J * N + tri + N * (N + 1) / 2 + 2 * J + 2 * J * 2 + 2 * L + 2 + 2 * tri + 2 * 3);
  const InteractionState s = random_state(dims, rng);
  const InteractionState back = layout.unpack(layout.pack(s));
  CHECK(back.lambda == s.lambda);
  CHECK(back.a_chol == s.a_chol);
  CHECK(back.sigma_chol == s.sigma_chol);
  CHECK(back.mu == s.mu);
  CHECK(back.beta == s.beta);
  CHECK(back.u == s.u);
  CHECK(back.b == s.b);
  CHECK(back.phi == s.phi);
  CHECK(back.d_beta == s.d_beta);
  Index n_pos = 0;
  for (bool p : layout.positive()) n_pos += p;
  CHECK(n_pos == J + N + J + 2 + J + 2 + 2);
  CHECK(layout.block_of(0) == "lambda");
  CHECK(layout.block_of(layout.size() - 1) == "d_beta");
}

}  // TEST_SUITE
