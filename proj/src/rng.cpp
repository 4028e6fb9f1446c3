#include "genemix/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace genemix {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
  const std::uint64_t k = splitmix64(seed);
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  // ctr_[0] is the block counter within the (stream, step) substream.
  const std::uint64_t s = splitmix64(stream ^ splitmix64(step));
  ctr_ = {0u, static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(s),
          static_cast<std::uint32_t>(s >> 32)};
}

void CounterRng::refill() {
  buf_ = philox4x32(ctr_, key_);
  ++ctr_[0];
  pos_ = 0;
}

CounterRng::result_type CounterRng::operator()() {
  if (pos_ > 2) refill();
  const std::uint64_t hi = buf_[pos_];
  const std::uint64_t lo = buf_[pos_ + 1];
  pos_ += 2;
  return (hi << 32) | lo;
}

double CounterRng::uniform() {
  // 53 random bits, shifted off zero.
  return ((*this)() >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

double sample_normal(CounterRng& rng, double mean, double sd) {
  // Marsaglia polar method; no cached second value so draws depend only on
  // the engine position.
  double u, v, s;
  do {
    u = 2.0 * rng.uniform() - 1.0;
    v = 2.0 * rng.uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return mean + sd * u * std::sqrt(-2.0 * std::log(s) / s);
}

double sample_gamma(CounterRng& rng, double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape))
    throw std::domain_error("sample_gamma: shape must be positive and finite");
  if (shape < 1.0) {
    // Boost to shape+1 and scale back in log space to survive tiny shapes.
    const double g = sample_gamma(rng, shape + 1.0);
    const double log_u = std::log(rng.uniform()) / shape;
    return g * std::exp(log_u);
  }
  // Marsaglia and Tsang.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_beta(CounterRng& rng, double a, double b) {
  if (a < 1.0 && b < 1.0) {
    // Both gammas can underflow to zero; compare in log space instead.
    const double la = std::log(sample_gamma(rng, a + 1.0)) + std::log(rng.uniform()) / a;
    const double lb = std::log(sample_gamma(rng, b + 1.0)) + std::log(rng.uniform()) / b;
    const double m = std::max(la, lb);
    const double ea = std::exp(la - m);
    const double eb = std::exp(lb - m);
    return ea / (ea + eb);
  }
  const double x = sample_gamma(rng, a);
  const double y = sample_gamma(rng, b);
  return x / (x + y);
}

double sample_half_normal(CounterRng& rng) { return std::abs(sample_normal(rng)); }

bool sample_bernoulli(CounterRng& rng, double p) { return rng.uniform() < p; }

std::int64_t sample_index(CounterRng& rng, std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("sample_index: n must be positive");
  std::uniform_int_distribution<std::int64_t> dist(0, n - 1);
  return dist(rng);
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() == 0) return -std::numeric_limits<double>::infinity();
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

Eigen::Index sample_log_categorical(CounterRng& rng,
                                    const Eigen::Ref<const Eigen::VectorXd>& log_weights) {
  const double m = log_weights.maxCoeff();
  if (!(m > -std::numeric_limits<double>::infinity()))
    throw std::domain_error("sample_log_categorical: all weights are zero");
  const Eigen::VectorXd w = (log_weights.array() - m).exp();
  const double u = rng.uniform() * w.sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u < acc) return i;
  }
  // Rounding at the top end: return the last index with positive weight.
  for (Eigen::Index i = w.size() - 1; i >= 0; --i)
    if (w[i] > 0.0) return i;
  return w.size() - 1;
}

}  // namespace genemix
