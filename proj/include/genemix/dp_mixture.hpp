#pragma once

#include <cmath>
#include <vector>

#include "genemix/rng.hpp"
#include "genemix/types.hpp"

namespace genemix {

/// Frequencies are kept inside [kFreqFloor, 1 - kFreqFloor] so that logit and
/// log transforms downstream stay finite.
inline constexpr double kFreqFloor = 1e-12;

/// Beta(nu1, nu2) shapes of the base measure, one pair per locus.
struct BetaHyper {
  VectorXd nu1;
  VectorXd nu2;

  Index loci() const { return nu1.size(); }
  /// Throws std::domain_error unless every shape is positive and finite.
  void validate() const;
};

/// Dirichlet-process mixture state of one (individual, gene, status) triplet.
///
/// The M slots carry frequency vectors p_m; slot m's vector is
/// distinct.row(config[m]). Labels are contiguous, 0..n_distinct()-1, and
/// occupancy[l] counts the slots carrying label l. The triplet's single
/// genotype record is allocated to slot z.
struct MixtureState {
  Index z = 0;
  std::vector<int> config;
  MatrixXd distinct;  // tau x L
  std::vector<int> occupancy;

  Index n_slots() const { return static_cast<Index>(config.size()); }
  Index n_distinct() const { return distinct.rows(); }
  Index loci() const { return distinct.cols(); }
  auto slot_freqs(Index m) const { return distinct.row(config[m]); }

  /// Throws std::logic_error when the bookkeeping invariants are broken.
  void check() const;
};

/// Log of the genotype mass p^(x1+x2) (1-p)^(2-x1-x2).
double genotype_log_mass(int allele1, int allele2, double p);
double genotype_log_mass(int minor_count, double p);

/// Sum over loci of genotype_log_mass for one record under frequencies p.
template <typename Derived>
double record_log_likelihood(const CountVector& counts, const Eigen::MatrixBase<Derived>& p) {
  double s = 0.0;
  for (Index r = 0; r < counts.size(); ++r) {
    const int n1 = counts[r];
    s += n1 * std::log(p(r)) + (2 - n1) * std::log1p(-p(r));
  }
  return s;
}

/// Draws the allocation z from its full conditional (uniform slot weights).
Index sample_allocation(const MixtureState& state, const CountVector& counts, CounterRng& rng);

/// log q0 = log alpha + sum_r [log B(n1+nu1, n2+nu2) - log B(nu1, nu2)].
double log_polya_urn_q0(const VectorXd& n1, const VectorXd& n2, const BetaHyper& hyper,
                        double alpha);
double polya_urn_q0(const VectorXd& n1, const VectorXd& n2, const BetaHyper& hyper,
                    double alpha);

/// Gibbs update of the configuration label of slot m. Opens a new label with
/// a frequency vector drawn from the slot's Beta posterior when chosen.
void sample_configuration(Index m, MixtureState& state, const CountVector& counts, double alpha,
                          const BetaHyper& hyper, CounterRng& rng);

/// Redraws every distinct frequency vector from its Beta full conditional.
void resample_distinct_freqs(MixtureState& state, const CountVector& counts,
                             const BetaHyper& hyper, CounterRng& rng);

Index count_distinct(const MixtureState& state);

/// One Gibbs cycle: allocation, every slot's configuration, then the
/// distinct frequencies.
void gibbs_sweep(MixtureState& state, const CountVector& counts, double alpha,
                 const BetaHyper& hyper, CounterRng& rng);

/// Draws (config, distinct) from the Polya-urn prior with base measure
/// Beta(hyper) and a uniform allocation.
MixtureState draw_polya_urn_prior(Index M, double alpha, const BetaHyper& hyper,
                                  CounterRng& rng);

/// All M slots tied to a single base-measure draw.
MixtureState tied_mixture(Index M, const BetaHyper& hyper, CounterRng& rng);

/// Relabels so that labels appear in slot order; leaves the slot
/// frequencies unchanged.
void canonicalize(MixtureState& state);

}  // namespace genemix
