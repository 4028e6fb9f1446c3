#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "genemix/assignment.hpp"
#include "genemix/hypothesis.hpp"
#include "oracles.hpp"

using namespace genemix;

namespace {

ClusteringPartition labels(std::vector<int> v) { return partition_from_labels(v); }

std::vector<int> random_labels(Index M, CounterRng& rng) {
  const Index k = 1 + sample_index(rng, M);
  std::vector<int> v(M);
  for (auto& x : v) x = static_cast<int>(sample_index(rng, k));
  return v;
}

VectorXd random_vector(Index n, CounterRng& rng) {
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = sample_normal(rng);
  return v;
}

// Mixture whose slots follow `config`, with label l at frequency base + 0.1 l.
MixtureState mixture_from(const std::vector<int>& config, Index L, double base) {
  MixtureState s;
  s.config = config;
  const int tau = *std::max_element(config.begin(), config.end()) + 1;
  s.distinct.resize(tau, L);
  for (int l = 0; l < tau; ++l) s.distinct.row(l).setConstant(base + 0.1 * l);
  s.occupancy.assign(tau, 0);
  for (int c : config) ++s.occupancy[c];
  return s;
}

}  // namespace

TEST_SUITE("hypothesis") {

TEST_CASE("partitions from frequency rows") {
  CHECK(partition_of(MatrixXd::Constant(4, 2, 0.3)).n_blocks == 1);
  MatrixXd d(3, 1);
  d << 0.1, 0.2, 0.3;
  CHECK(partition_of(d).n_blocks == 3);
  MatrixXd c(3, 1);
  c << 0.1, 0.1, 0.2;
  const ClusteringPartition p = partition_of(c);
  CHECK(p.block == std::vector<int>{0, 0, 1});
  CHECK(partition_of(mixture_from({1, 1, 0}, 2, 0.2)) == labels({0, 0, 1}));
}

TEST_CASE("hand-enumerated clustering distances") {
  CHECK(clustering_distance(labels({0, 0, 1}), labels({0, 0, 1})) == 0.0);
  const ClusteringPartition c1 = labels({0, 0, 1}), c2 = labels({0, 1, 1});
  CHECK(directed_distance(c1, c2) == doctest::Approx(1.0 / 3.0));
  CHECK(directed_distance(c2, c1) == doctest::Approx(1.0 / 3.0));
  CHECK(clustering_distance(c1, c2) == doctest::Approx(1.0 / 3.0));
  const ClusteringPartition one = labels({0, 0, 0}), all = labels({0, 1, 2});
  CHECK(directed_distance(one, all) == doctest::Approx(2.0 / 3.0));
  CHECK(directed_distance(all, one) == 0.0);
  CHECK(clustering_distance(one, all) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("clustering metric axioms on random pairs") {
  CounterRng rng(1, 0, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const Index M = 1 + sample_index(rng, 30);
    const std::vector<int> a = random_labels(M, rng), b = random_labels(M, rng);
    const double d = clustering_distance(labels(a), labels(b));
    REQUIRE(clustering_distance(labels(a), labels(a)) == 0.0);
    REQUIRE(d == clustering_distance(labels(b), labels(a)));
    REQUIRE(d >= 0.0);
    REQUIRE(d < 1.0);
    REQUIRE(std::abs(d - oracle::clustering_distance_by_table(a, b)) < 1e-12);
  }
}

TEST_CASE("central clustering") {
  const std::vector<ClusteringPartition> same(4, labels({0, 1, 1}));
  CHECK(central_clustering_index(same, 1e-9) == 0);
  const std::vector<ClusteringPartition> single{labels({0, 1})};
  CHECK(central_clustering_index(single, 0.5) == 0);
  // d(A,B) = d(B,C) = 1/3, d(A,C) = 2/3.
  const std::vector<ClusteringPartition> three{labels({0, 0, 0}), labels({0, 0, 1}), labels({0, 1, 2})};
  CHECK(central_clustering_index(three, 0.5) == 1);
  CHECK(median_pairwise_distance(three) == doctest::Approx(1.0 / 3.0));
  CHECK(median_pairwise_distance(same) == 1e-9);
  CHECK_THROWS_AS(central_clustering_index(std::vector<ClusteringPartition>{}, 0.5), std::invalid_argument);
}

TEST_CASE("logit mean frequencies") {
  CHECK(logit_mean_freqs(MatrixXd::Constant(3, 4, 0.5)).isZero());
  CHECK(logit_mean_freqs(MatrixXd::Constant(1, 1, 0.8))[0] == doctest::Approx(std::log(4.0)));
  MatrixXd p(1, 2);
  p << 0.2, 0.6;
  CHECK(logit_mean_freqs(p)[0] == doctest::Approx(std::log(2.0 / 3.0)));
}

TEST_CASE("euclidean divergence") {
  const VectorXd z = VectorXd::Zero(2);
  CHECK(euclidean_divergence(z, z) == 0.0);
  CHECK(euclidean_divergence(z, (VectorXd(2) << 3.0, 4.0).finished()) == doctest::Approx(5.0));
  CounterRng rng(2, 0, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 1 + sample_index(rng, 10);
    const VectorXd a = random_vector(n, rng), b = random_vector(n, rng);
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    CHECK(std::abs(euclidean_divergence(a, b) - std::sqrt(s)) <= 1e-12);
  }
}

TEST_CASE("permutation-invariant divergence") {
  const VectorXd a = (VectorXd(2) << 1.0, 2.0).finished(), b = (VectorXd(2) << 2.0, 1.0).finished();
  CHECK(min_permutation_distance(a, b) == 0.0);
  CHECK(euclidean_divergence(a, b) == doctest::Approx(std::sqrt(2.0)));
  const VectorXd v = (VectorXd(4) << 0.3, -1.0, 2.0, 0.3).finished();
  const VectorXd w = (VectorXd(4) << 2.0, 0.3, 0.3, -1.0).finished();
  CHECK(min_permutation_distance(v, w) == 0.0);
  CHECK(min_permutation_distance(v, (VectorXd(4) << 2.0, 0.3, 0.31, -1.0).finished()) > 0.0);

  CounterRng rng(3, 0, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const Index K = 1 + sample_index(rng, 6);
    const VectorXd x = random_vector(K, rng), y = random_vector(K, rng);
    const double d = min_permutation_distance(x, y);
    CHECK(d == doctest::Approx(oracle::brute_force_min_permutation(x, y)).epsilon(1e-12));
    CHECK(d <= euclidean_divergence(x, y) + 1e-12);
    CHECK(min_permutation_distance(x, VectorXd::Constant(K, 0.4)) ==
          doctest::Approx(euclidean_divergence(x, VectorXd::Constant(K, 0.4))));
  }
}

TEST_CASE("assignment solver equals brute force") {
  CounterRng rng(4, 0, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const Index K = 1 + sample_index(rng, 6);
    MatrixXd c(K, K);
    for (Index i = 0; i < K; ++i)
      for (Index j = 0; j < K; ++j) c(i, j) = static_cast<double>(sample_index(rng, 20));
    const Assignment a = solve_assignment(c);
    CHECK(a.cost == oracle::brute_force_assignment_cost(c));
    double s = 0.0;
    std::vector<bool> used(K, false);
    for (Index i = 0; i < K; ++i) {
      REQUIRE_FALSE(used[a.assignment[i]]);
      used[a.assignment[i]] = true;
      s += c(i, a.assignment[i]);
    }
    CHECK(s == a.cost);
  }
  CHECK_THROWS_AS(solve_assignment(MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("nearest-rank percentile") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(percentile_nearest_rank(v, 55.0) == 55.0);
  CHECK(percentile_nearest_rank(std::vector<double>(7, 2.5), 55.0) == 2.5);
  CounterRng rng(5, 0, 0);
  std::vector<double> r(37);
  for (auto& x : r) x = sample_normal(rng);
  double prev = -1e300;
  for (double pct = 1.0; pct <= 100.0; pct += 0.5) {
    const double q = percentile_nearest_rank(r, pct);
    CHECK(q >= prev);
    prev = q;
  }
}

TEST_CASE("decision rule") {
  CHECK_FALSE(accept_null(0.358));
  CHECK(accept_null(0.982));
  CHECK(accept_null(0.5));
  CounterRng rng(6, 0, 0);
  std::vector<double> x(200);
  for (auto& v : x) v = sample_normal(rng);
  bool was_accepted = false;
  for (double eps = -3.0; eps <= 3.0; eps += 0.01) {
    const bool acc = accept_null(posterior_probability_below(x, eps));
    CHECK((!was_accepted || acc));
    was_accepted = acc;
  }
}

TEST_CASE("interpretation table covers every pattern") {
  std::vector<std::string> seen;
  for (int g = 0; g < 2; ++g)
    for (int b = 0; b < 2; ++b)
      for (int p = 0; p < 2; ++p) seen.push_back(interpret(g, b, p));
  std::sort(seen.begin(), seen.end());
  CHECK(std::unique(seen.begin(), seen.end()) == seen.end());
  CHECK(interpret(true, false, false).find("purely genetic") != std::string::npos);
}

TEST_CASE("snapshot statistics on injected partitions") {
  // Two controls, two cases, one gene. Central control and case are chosen
  // by the median rule; with two samples each has count 1 and index 0 wins.
  const ModelDims dims{2, 2, 0, {3}};
  std::vector<MixtureState> mix{mixture_from({0, 0, 1}, 3, 0.2), mixture_from({0, 1, 2}, 3, 0.2),
                                mixture_from({0, 1, 1}, 3, 0.6), mixture_from({0, 0, 0}, 3, 0.6)};
  const SnapshotStats s = snapshot_stats(mix, dims);
  CHECK(s.central[0][0] == 0);
  CHECK(s.central[0][1] == 0);
  CHECK(s.d_hat[0] == doctest::Approx(oracle::clustering_distance_by_table({0, 0, 1}, {0, 1, 1})));
  CHECK(s.d_star == s.d_hat[0]);
  CHECK(s.d_star_e == s.d_e[0]);
  CHECK(s.d_emin[0] <= s.d_e[0] + 1e-12);
  REQUIRE(s.locus_distance[0].size() == 3);
  CHECK(s.locus_distance[0][0] > 0.0);

  CounterRng rng(7, 0, 0);
  const ModelDims two{3, 4, 0, {2, 5}};
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<MixtureState> m;
    const BetaHyper h1{VectorXd::Ones(2), VectorXd::Ones(2)}, h2{VectorXd::Ones(5), VectorXd::Ones(5)};
    for (Index g = 0; g < two.n_individuals(); ++g) {
      m.push_back(draw_polya_urn_prior(6, 1.5, h1, rng));
      m.push_back(draw_polya_urn_prior(6, 1.5, h2, rng));
    }
    const SnapshotStats t = snapshot_stats(m, two);
    for (Index j = 0; j < 2; ++j) {
      CHECK(t.d_star >= t.d_hat[j]);
      CHECK(t.d_star_e >= t.d_e[j]);
      CHECK(t.d_star_emin >= t.d_emin[j]);
    }
  }
}

TEST_CASE("DPL calls") {
  const DplCall none = dpl_call(VectorXd::Zero(12), 0.1);
  CHECK(none.flagged.empty());
  CounterRng rng(8, 0, 0);
  for (Index L : {5, 10, 20, 30, 37}) {
    VectorXd d(L);
    for (Index r = 0; r < L; ++r) d[r] = rng.uniform();
    const DplCall c = dpl_call(d, 0.1);
    CHECK(static_cast<Index>(c.flagged.size()) == static_cast<Index>(std::ceil(0.1 * L - 1e-9)));
    for (Index r : c.flagged) CHECK(d[r] > c.cutoff);
  }
  VectorXd d(4);
  d << 0.1, 0.9, 0.3, 0.2;
  CHECK(dpl_call(d, 0.1).flagged == std::vector<Index>{1});
  CHECK(dpl_call(d, 1.0).flagged.size() == 4);
}

TEST_CASE("gene-gene correlation") {
  std::vector<MatrixXd> eye(5, MatrixXd::Identity(3, 3));
  CHECK(gene_gene_correlation(eye) == MatrixXd::Identity(3, 3));
  MatrixXd a(2, 2);
  a << 4.0, 1.0, 1.0, 1.0;
  const std::vector<MatrixXd> c(3, a);
  CHECK(gene_gene_correlation(c)(0, 1) == doctest::Approx(0.5));
  CounterRng rng(9, 0, 0);
  std::vector<MatrixXd> r;
  for (int i = 0; i < 11; ++i) {
    MatrixXd g(3, 3);
    for (Index p = 0; p < 3; ++p)
      for (Index q = 0; q < 3; ++q) g(p, q) = sample_normal(rng);
    r.push_back(g * g.transpose() + 0.1 * MatrixXd::Identity(3, 3));
  }
  const MatrixXd out = gene_gene_correlation(r);
  CHECK(out.isApprox(out.transpose()));
  CHECK(out.diagonal() == VectorXd::Ones(3));
}

}  // TEST_SUITE
