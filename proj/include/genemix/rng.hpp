#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Dense>

namespace genemix {

/// Philox4x32-10 block function: encrypts a 128-bit counter under a 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random engine. A stream is identified by (seed, stream,
/// step); two engines built from the same triple produce the same sequence
/// regardless of which thread or in which order they run.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t step);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> ctr_{};
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

// Stream ids. Triplet streams use the triplet's linear index; the remaining
// values are reserved for serial phases of the chain.
inline constexpr std::uint64_t kStreamTmcmc = 0xFFFF'FFFF'0000'0001ULL;
inline constexpr std::uint64_t kStreamInit = 0xFFFF'FFFF'0000'0002ULL;
inline constexpr std::uint64_t kStreamData = 0xFFFF'FFFF'0000'0003ULL;

double sample_normal(CounterRng& rng, double mean = 0.0, double sd = 1.0);
double sample_gamma(CounterRng& rng, double shape);
double sample_beta(CounterRng& rng, double a, double b);
/// |Z| with Z standard normal.
double sample_half_normal(CounterRng& rng);
bool sample_bernoulli(CounterRng& rng, double p);
/// Uniform integer in [0, n).
std::int64_t sample_index(CounterRng& rng, std::int64_t n);

/// Draws an index with probability proportional to exp(log_weights[i]),
/// normalized with log-sum-exp. Throws std::domain_error when every weight is
/// -inf.
Eigen::Index sample_log_categorical(CounterRng& rng,
                                    const Eigen::Ref<const Eigen::VectorXd>& log_weights);

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace genemix
