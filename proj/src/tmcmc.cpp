#include "genemix/tmcmc.hpp"

#include <cmath>
#include <stdexcept>

namespace genemix {

namespace {

std::vector<int> draw_signs(Index n, CounterRng& rng) {
  std::vector<int> s(n);
  for (auto& v : s) v = sample_bernoulli(rng, 0.5) ? 1 : -1;
  return s;
}

}  // namespace

void TmcmcConfig::validate() const {
  if (!(move_mix >= 0.0 && move_mix <= 1.0))
    throw std::invalid_argument("TmcmcConfig: move_mix must lie in [0,1]");
  if ((scales.array() < 0.0).any() || !scales.allFinite())
    throw std::invalid_argument("TmcmcConfig: scales must be nonnegative and finite");
}

Proposal apply_additive(const VectorXd& theta, const VectorXd& scales, double abs_eps,
                        const std::vector<int>& signs) {
  Proposal p{theta, 0.0};
  for (Index i = 0; i < theta.size(); ++i) p.theta[i] += signs[i] * scales[i] * abs_eps;
  return p;
}

Proposal apply_additive_multiplicative(const VectorXd& theta, const VectorXd& scales,
                                       double abs_eps, const std::vector<int>& signs,
                                       const std::vector<bool>& multiplicative) {
  Proposal p{theta, 0.0};
  for (Index i = 0; i < theta.size(); ++i) {
    const double step = signs[i] * scales[i] * abs_eps;
    if (multiplicative[i]) {
      p.theta[i] *= std::exp(step);
      p.log_jacobian += step;
    } else {
      p.theta[i] += step;
    }
  }
  return p;
}

Proposal propose_additive(const VectorXd& theta, const VectorXd& scales, CounterRng& rng) {
  const double eps = sample_half_normal(rng);
  return apply_additive(theta, scales, eps, draw_signs(theta.size(), rng));
}

Proposal propose_additive_multiplicative(const VectorXd& theta, const VectorXd& scales,
                                         const std::vector<bool>& positive, CounterRng& rng) {
  const double eps = sample_half_normal(rng);
  const std::vector<int> signs = draw_signs(theta.size(), rng);
  std::vector<bool> mult(theta.size(), false);
  for (Index i = 0; i < theta.size(); ++i) mult[i] = positive[i] && sample_bernoulli(rng, 0.5);
  return apply_additive_multiplicative(theta, scales, eps, signs, mult);
}

StepResult mh_step(VectorXd& theta, double& log_current, const LogTarget& log_target,
                   const TmcmcConfig& cfg, const std::vector<bool>& positive, CounterRng& rng) {
  StepResult r;
  r.additive = sample_bernoulli(rng, cfg.move_mix);
  Proposal p = r.additive ? propose_additive(theta, cfg.scales, rng)
                          : propose_additive_multiplicative(theta, cfg.scales, positive, rng);
  const double log_prop = log_target(p.theta);
  if (std::isnan(log_prop) || log_prop == -std::numeric_limits<double>::infinity()) return r;
  const double log_ratio = log_prop - log_current + p.log_jacobian;
  if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio) {
    theta = std::move(p.theta);
    log_current = log_prop;
    r.accepted = true;
  }
  return r;
}

void ScaleAdapter::record(bool accepted) {
  if (frozen_) return;
  accepts_ += accepted ? 1 : 0;
  if (++steps_ < window_) return;
  const double rate = static_cast<double>(accepts_) / static_cast<double>(steps_);
  if (rate < low_) multiplier_ *= 0.8;
  else if (rate > high_) multiplier_ *= 1.25;
  accepts_ = 0;
  steps_ = 0;
}

}  // namespace genemix
