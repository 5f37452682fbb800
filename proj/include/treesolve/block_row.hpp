#ifndef TREESOLVE_BLOCK_ROW_HPP
#define TREESOLVE_BLOCK_ROW_HPP

#include "treesolve/dense.hpp"

namespace ts {

/// One leaf's slice of the global block-tridiagonal system.
///
/// Row block i of the assembled matrix reads [lower | diag | upper]:
/// `lower` couples to block column i-1, `diag` sits on the diagonal and
/// `upper` couples to block column i+1. The first leaf's `lower` and the
/// last leaf's `upper` have no column to land in and must be zero.
/// `solution` is the leaf's slice of the unknowns; it is filled by the
/// solver and ignored on input.
struct BlockRow {
  dense::Matrix lower;     // block_size x block_size
  dense::Matrix diag;      // block_size x block_size
  dense::Matrix upper;     // block_size x block_size
  dense::Matrix rhs;       // block_size x rhs_cols
  dense::Matrix solution;  // block_size x rhs_cols, output slot
};

}  // namespace ts

#endif  // TREESOLVE_BLOCK_ROW_HPP
