#ifndef TREESOLVE_ORACLE_HPP
#define TREESOLVE_ORACLE_HPP

#include <cstddef>
#include <vector>

#include "treesolve/block_row.hpp"
#include "treesolve/dense.hpp"
#include "treesolve/solver.hpp"
#include "treesolve/topology.hpp"

// Sequential reference solvers and debugging reconstructions.
//
// `banded_solve` is the ground truth: a deliberately plain dense
// Gaussian elimination with partial pivoting, independent of the kernels
// the distributed path uses. `recursive_solver` re-derives the same
// answer through the divide-and-conquer route the tree machine executes
// (split in the middle, solve halves against coupling columns, solve the
// 2m x 2m interface system, update with `recursive_matmul`).
// `materialize_iteration` rebuilds the implied dense system from leaf
// wing state between rounds; it is O((N*m)^2) memory and meant only for
// tests and debugging.
namespace ts::oracle {

struct GlobalSystem {
  dense::Matrix a;            // (N*m) x (N*m)
  dense::Matrix rhs;          // (N*m) x k
  std::size_t block_size = 0;
  std::size_t block_rows = 0;
};

/// Places each leaf's blocks: row block i holds `lower` at block column
/// i-1, `diag` at i, `upper` at i+1. Throws BoundaryViolation when the
/// first leaf's lower or the last leaf's upper block is nonzero.
GlobalSystem assemble_global(const std::vector<BlockRow>& rows,
                             const topo::ProblemShape& shape);

/// Dense partial-pivoted elimination; the reference for all other paths.
dense::Matrix banded_solve(const GlobalSystem& g);

/// Divide-and-conquer solve mirroring the tree algorithm's derivation.
dense::Matrix recursive_solver(const GlobalSystem& g);

/// m -= u*w evaluated by splitting m and u row-wise to `depth` levels,
/// the way the update distributes over a subtree. Work is partitioned,
/// not duplicated: flop counts match the flat product exactly.
dense::Matrix recursive_matmul(const dense::Matrix& m, const dense::Matrix& u,
                               const dense::Matrix& w, int depth,
                               dense::FlopCount* flops = nullptr);

/// Global block column that wing slot `slot` of `leaf_proc` occupies
/// (1-based): the block adjacent to the leaf's level-`slot` subtree
/// midpoint, on the opposite side from the leaf.
std::size_t wing_column(std::size_t leaf_proc, int slot,
                        const topo::ProblemShape& shape);

struct IterationMatrices {
  dense::Matrix a;    // implied system matrix
  dense::Matrix rhs;  // implied right-hand side
};

/// Rebuilds the dense system implied by the leaves' wing state after
/// `rounds_done` reduction rounds (0 = after the leaf pre-solve).
/// Diagonal blocks of size 2^rounds_done * m are exact identities.
IterationMatrices materialize_iteration(const std::vector<solver::LeafState>& states,
                                        int rounds_done,
                                        const topo::ProblemShape& shape);

/// The block-diagonal factor consumed by round `round`, reconstructed
/// from the states after round-1: identity plus each leaf's V{round}
/// at its wing column. Left-multiplying the round's output system by
/// this factor recovers the round's input system.
dense::Matrix materialize_round_factor(const std::vector<solver::LeafState>& states,
                                       int round, const topo::ProblemShape& shape);

}  // namespace ts::oracle

#endif  // TREESOLVE_ORACLE_HPP
