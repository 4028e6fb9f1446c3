#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "genemix/dp_mixture.hpp"
#include "genemix/types.hpp"

namespace genemix {

/// Set partition of the M mixture slots. block[m] is the block of slot m;
/// blocks are numbered in order of first appearance.
struct ClusteringPartition {
  std::vector<int> block;
  int n_blocks = 0;

  Index size() const { return static_cast<Index>(block.size()); }
  bool operator==(const ClusteringPartition&) const = default;
};

/// Blocks are the exact-equality classes of the rows of `freqs` (M x L).
ClusteringPartition partition_of(const MatrixXd& freqs);
/// Same partition read from configuration labels.
ClusteringPartition partition_from_labels(std::span<const int> labels);
ClusteringPartition partition_of(const MixtureState& state);

/// d(C1, C2) = 1 - sum_i max_j n_ij / M, n_ij = |block i of C1 and block j of C2|.
double directed_distance(const ClusteringPartition& c1, const ClusteringPartition& c2);
/// max of the two directed distances.
double clustering_distance(const ClusteringPartition& c1, const ClusteringPartition& c2);

/// Median of the pairwise distances d(C_a, C_b), a < b, floored at 1e-9.
/// A single partition gives the floor.
double median_pairwise_distance(std::span<const ClusteringPartition> samples);

/// argmax_l #{k : d(C_l, C_k) < radius}; smallest index on ties. Throws
/// std::invalid_argument for an empty list.
Index central_clustering_index(std::span<const ClusteringPartition> samples, double radius);

/// Entry m is logit of the mean over loci of row m of `freqs`.
VectorXd logit_mean_freqs(const MatrixXd& freqs);

double euclidean_divergence(const VectorXd& v1, const VectorXd& v2);

/// min over permutations s of ||v1 - v2[s]||, solved as a linear assignment.
double min_permutation_distance(const VectorXd& v1, const VectorXd& v2);

/// Value at index ceil(pct/100 * n) - 1 of the sorted values (nearest rank).
double percentile_nearest_rank(std::vector<double> values, double pct);

/// Fraction of values strictly below eps.
double posterior_probability_below(std::span<const double> values, double eps);

/// Accept the null iff its posterior probability is at least 1/2.
inline bool accept_null(double probability) { return probability >= 0.5; }

/// Conclusion for a pattern of rejected nulls: marginal gene effects,
/// environmental coefficients beta, environment weight phi.
std::string interpret(bool genes_significant, bool beta_significant, bool phi_significant);

/// Per-snapshot divergences between the central control and case triplets
/// of each gene.
struct SnapshotStats {
  double d_star = 0.0;
  double d_star_e = 0.0;
  double d_star_emin = 0.0;
  VectorXd d_hat, d_e, d_emin;               // per gene
  std::vector<std::array<Index, 2>> central;  // [j][k], index within group k
  std::vector<VectorXd> locus_distance;       // [j], length L_j
};

/// Computes the central clusterings and divergences from one snapshot of
/// the mixture states. `mixtures` is ordered by triplet t = g * J + j.
SnapshotStats snapshot_stats(std::span<const MixtureState> mixtures, const ModelDims& dims);

/// Slot frequencies as an M x L matrix.
MatrixXd slot_freq_matrix(const MixtureState& state);

/// Top-fraction rule: k = ceil(fraction * L) loci are nominally flagged. The
/// cutoff is the (k+1)-th largest distance (0 when k >= L) and loci strictly
/// above it are flagged.
struct DplCall {
  VectorXd distance;
  double cutoff = 0.0;
  std::vector<Index> flagged;
};

DplCall dpl_call(const VectorXd& mean_distance, double top_fraction = 0.10);

/// Elementwise median over samples of A_jk / sqrt(A_jj A_kk); unit diagonal.
MatrixXd gene_gene_correlation(std::span<const MatrixXd> a_samples);

}  // namespace genemix
