#pragma once

#include <vector>

#include "genemix/types.hpp"

namespace genemix {

/// Minimum-cost perfect matching on a square cost matrix. assignment[i] is
/// the column matched to row i.
struct Assignment {
  std::vector<Index> assignment;
  double cost = 0.0;
};

/// Hungarian method with row/column potentials, O(n^3). Throws
/// std::invalid_argument for a non-square or non-finite matrix.
Assignment solve_assignment(const MatrixXd& cost);

}  // namespace genemix
