#pragma once

#include <functional>
#include <vector>

#include "genemix/rng.hpp"
#include "genemix/types.hpp"

namespace genemix {

/// Transformation-based MCMC for a flat parameter block. One half-normal
/// innovation |eps| drives every coordinate; each coordinate gets its own
/// random sign.
struct TmcmcConfig {
  /// Probability of the pure additive move; otherwise additive-multiplicative.
  double move_mix = 0.5;
  /// Per-coordinate step sizes a_i.
  VectorXd scales;

  /// Throws std::invalid_argument unless move_mix is in [0,1] and scales > 0
  /// (zero is allowed).
  void validate() const;
};

struct Proposal {
  VectorXd theta;
  double log_jacobian = 0.0;
};

/// theta'_i = theta_i + s_i a_i |eps|.
Proposal apply_additive(const VectorXd& theta, const VectorXd& scales, double abs_eps,
                        const std::vector<int>& signs);

/// Coordinates with multiplicative[i] set map to theta_i exp(s_i a_i |eps|),
/// the rest move additively. log_jacobian = sum over multiplicative
/// coordinates of s_i a_i |eps|.
Proposal apply_additive_multiplicative(const VectorXd& theta, const VectorXd& scales,
                                       double abs_eps, const std::vector<int>& signs,
                                       const std::vector<bool>& multiplicative);

Proposal propose_additive(const VectorXd& theta, const VectorXd& scales, CounterRng& rng);

/// Multiplicative moves are chosen with probability 1/2 per coordinate, and
/// only where positive[i] is set.
Proposal propose_additive_multiplicative(const VectorXd& theta, const VectorXd& scales,
                                         const std::vector<bool>& positive, CounterRng& rng);

using LogTarget = std::function<double(const VectorXd&)>;

struct StepResult {
  bool accepted = false;
  bool additive = true;
};

/// One Metropolis-Hastings step. `log_current` holds log_target(theta) on
/// entry and is updated on acceptance. Proposals with a -inf or NaN target
/// are rejected.
StepResult mh_step(VectorXd& theta, double& log_current, const LogTarget& log_target,
                   const TmcmcConfig& cfg, const std::vector<bool>& positive, CounterRng& rng);

/// Global step-size multiplier tuned toward a target acceptance band during
/// burn-in, then frozen.
class ScaleAdapter {
 public:
  ScaleAdapter(Index window = 100, double low = 0.15, double high = 0.30)
      : window_(window), low_(low), high_(high) {}

  /// Records one step; every `window` steps the multiplier shrinks by 0.8
  /// below the band or grows by 1.25 above it.
  void record(bool accepted);
  void freeze() { frozen_ = true; }

  double multiplier() const { return multiplier_; }
  bool frozen() const { return frozen_; }
  Index window_accepts() const { return accepts_; }
  Index window_steps() const { return steps_; }

  /// Restores state saved by a checkpoint.
  void restore(double multiplier, Index accepts, Index steps, bool frozen) {
    multiplier_ = multiplier;
    accepts_ = accepts;
    steps_ = steps;
    frozen_ = frozen;
  }

 private:
  Index window_;
  double low_, high_;
  double multiplier_ = 1.0;
  Index accepts_ = 0;
  Index steps_ = 0;
  bool frozen_ = false;
};

}  // namespace genemix
