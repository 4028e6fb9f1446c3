#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace genemix {

using Index = Eigen::Index;

using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;
using RowVectorXd = Eigen::RowVectorXd;

// One allele per (individual, locus); row = individual, column = locus.
using AlleleMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
// Minor-allele counts x1 + x2 in {0,1,2} for one genotype record.
using CountVector = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

// Case/control status k: 0 = control, 1 = case. Individuals are indexed
// controls first, then cases.
inline constexpr int kControl = 0;
inline constexpr int kCase = 1;

// Dimensions shared by the model, the sampler and the trace.
struct ModelDims {
  Index n_controls = 0;
  Index n_cases = 0;
  Index env_dim = 0;
  std::vector<Index> loci;  // L_j per gene

  Index n_individuals() const { return n_controls + n_cases; }
  Index n_genes() const { return static_cast<Index>(loci.size()); }
  Index max_loci() const {
    Index l = 0;
    for (Index v : loci) l = v > l ? v : l;
    return l;
  }
  Index n_group(int k) const { return k == 0 ? n_controls : n_cases; }
  // Global individual index of the i-th member of group k.
  Index individual(Index i, int k) const { return k == 0 ? i : n_controls + i; }

  bool operator==(const ModelDims&) const = default;
};

}  // namespace genemix
