#include <cmath>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include "doctest.h"
#include "genemix/rng.hpp"
#include "oracles.hpp"

using namespace genemix;

TEST_SUITE("rng") {

TEST_CASE("philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(philox4x32(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  CounterRng a(7, 3, 11), b(7, 3, 11), c(7, 3, 12), d(7, 4, 11), e(8, 3, 11);
  std::vector<std::uint64_t> va, vb, vc, vd, ve;
  for (int i = 0; i < 16; ++i) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
    vd.push_back(d());
    ve.push_back(e());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
  CHECK(va != ve);
}

TEST_CASE("uniform stays inside the open unit interval") {
  CounterRng rng(1, 2, 3);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("normal, gamma and beta samplers match their cdfs") {
  const int n = 20000;
  CounterRng rng(42, 0, 0);
  std::vector<double> x(n);

  for (auto& v : x) v = sample_normal(rng, 1.5, 2.0);
  boost::math::normal_distribution<> nd(1.5, 2.0);
  CHECK(oracle::ks_pvalue(x, [&](double t) { return boost::math::cdf(nd, t); }) > 0.01);

  for (double shape : {0.01, 0.3, 1.0, 4.5}) {
    for (auto& v : x) v = sample_gamma(rng, shape);
    boost::math::gamma_distribution<> gd(shape, 1.0);
    CAPTURE(shape);
    CHECK(oracle::ks_pvalue(x, [&](double t) { return boost::math::cdf(gd, std::max(t, 0.0)); }) > 0.01);
  }

  for (auto [a, b] : {std::pair{0.2, 0.5}, std::pair{1.0, 1.0}, std::pair{3.0, 0.7}, std::pair{40.0, 12.0}}) {
    for (auto& v : x) v = sample_beta(rng, a, b);
    boost::math::beta_distribution<> bd(a, b);
    CAPTURE(a);
    CAPTURE(b);
    CHECK(oracle::ks_pvalue(x, [&](double t) { return boost::math::cdf(bd, std::clamp(t, 0.0, 1.0)); }) > 0.01);
  }
}

TEST_CASE("half-normal draws are |Z|") {
  CounterRng rng(5, 0, 0);
  std::vector<double> x(20000);
  for (auto& v : x) v = sample_half_normal(rng);
  CHECK(oracle::ks_pvalue(x, [](double t) { return std::erf(t / std::sqrt(2.0)); }) > 0.01);
}

TEST_CASE("log categorical follows normalized weights") {
  CounterRng rng(9, 0, 0);
  Eigen::VectorXd logw(3);
  logw << std::log(0.2), std::log(0.5), std::log(0.3);
  logw.array() += 700.0;  // far above exp's range
  std::array<int, 3> counts{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[sample_log_categorical(rng, logw)];
  const double p[3] = {0.2, 0.5, 0.3};
  for (int k = 0; k < 3; ++k) CHECK(std::abs(counts[k] / double(n) - p[k]) < 3.0 * std::sqrt(p[k] * (1 - p[k]) / n));
}

TEST_CASE("log categorical rejects all -inf weights") {
  CounterRng rng(9, 0, 0);
  Eigen::VectorXd logw = Eigen::VectorXd::Constant(3, -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(sample_log_categorical(rng, logw), std::domain_error);
}

TEST_CASE("log_sum_exp is stable") {
  Eigen::VectorXd x(2);
  x << 1000.0, 1000.0;
  CHECK(log_sum_exp(x) == doctest::Approx(1000.0 + std::log(2.0)));
}

}  // TEST_SUITE
