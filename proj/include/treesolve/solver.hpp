#ifndef TREESOLVE_SOLVER_HPP
#define TREESOLVE_SOLVER_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "treesolve/block_row.hpp"
#include "treesolve/dense.hpp"
#include "treesolve/netsim.hpp"
#include "treesolve/topology.hpp"

// Distributed solve over the two-tree.
//
// Each leaf keeps its off-diagonal couplings as d = log2(N) wing matrices
// V{1}..V{d}; slot j holds the coupling that crosses the leaf's level-j
// subtree boundary and is consumed in reduction round j. After the leaf
// pre-solve (diagonal block applied to wings and right-hand side), the
// solve proceeds in d level-synchronous rounds. In round r:
//
//   * every leaf sends [V{r}..V{d}, X] toward its level-r ancestor;
//     internal nodes below level r relay the payload of the child on the
//     boundary side (down-child when the node sits in the upper half of
//     its level-r subtree, up-child otherwise);
//   * the level-r node assembles the 2m x 2m interface system
//     [[I, V_up{r}], [V_down{r}, I]], solves it against the stacked
//     remaining columns, and sends the lower solution block to its
//     up-child and the upper one to its down-child;
//   * the blocks are relayed to every leaf, which updates
//     [V{r+1}..V{d}, X] -= V{r} * [Z_V{r+1}..Z_V{d}, Z_X].
//
// After round d each leaf's X holds its slice of the global solution.
//
// Scheduling note: internal nodes above level r take no part in round r.
// Gating their receives on `level <= round` is required for progress —
// with unconditional receives every round, nodes above the active level
// wait on children that never send and the system deadlocks (see the
// regression test with Schedule::ungated).
namespace ts::solver {

/// The d wing matrices of one leaf, indexed by reduction round 1..d.
struct WingSet {
  std::vector<dense::Matrix> v;

  dense::Matrix& slot(int j) { return v[static_cast<std::size_t>(j) - 1]; }
  const dense::Matrix& slot(int j) const { return v[static_cast<std::size_t>(j) - 1]; }
  int count() const noexcept { return static_cast<int>(v.size()); }
};

/// A leaf's evolving local state: wings plus its slice of the right-hand
/// side (which becomes the solution slice after the final round).
struct LeafState {
  WingSet wings;
  dense::Matrix x;
};

/// Writes the leaf's couplings into their wing slots and applies the
/// inverse of the diagonal block to [V{1}..V{d}, Y].
/// Throws SingularMatrix (with the leaf identified) when the diagonal
/// block cannot be factored.
LeafState leaf_init(const BlockRow& row, std::size_t leaf_proc,
                    const topo::ProblemShape& shape,
                    dense::FlopCount* flops = nullptr);

/// Interface system [[I, wing_up], [wing_down, I]] of size 2m x 2m.
dense::Matrix assemble_reduced(const dense::Matrix& wing_up,
                               const dense::Matrix& wing_down);

/// Solves the interface system against a stacked 2m-row right-hand side.
dense::Matrix solve_reduced(const dense::Matrix& s, const dense::Matrix& rhs,
                            dense::FlopCount* flops = nullptr);

/// Test instrumentation: observes every leaf's state after the leaf
/// pre-solve (round 0) and after each reduction round. Runs inside the
/// single-threaded simulator, so a plain callback is safe.
using CaptureHook = std::function<void(std::size_t leaf_proc, int round,
                                       const LeafState& state)>;

/// `ungated` reproduces the schedule in which every internal node posts
/// its child receives in every round; it deadlocks for depth >= 2 and
/// exists only as a regression against that schedule.
enum class Schedule { gated, ungated };

struct SolverOptions {
  Schedule schedule = Schedule::gated;
  CaptureHook capture;
};

/// The per-node program run on all 2N-1 nodes of the tree.
sim::Program solver_program(const topo::ProblemShape& shape,
                            SolverOptions options = {});

/// Concatenates the leaves' solution slices in leaf order ((N*m) x k).
dense::Matrix gather_solution(const sim::Simulation& sim,
                              const topo::ProblemShape& shape);

struct SolveResult {
  dense::Matrix solution;  // (N*m) x k
  sim::SimReport report;
};

/// Convenience driver: spawn, run, gather.
SolveResult solve_distributed(const std::vector<BlockRow>& rows,
                              const topo::ProblemShape& shape,
                              const sim::CostModel& cost = {},
                              const SolverOptions& options = {});

}  // namespace ts::solver

#endif  // TREESOLVE_SOLVER_HPP
