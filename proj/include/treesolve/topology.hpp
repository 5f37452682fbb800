#ifndef TREESOLVE_TOPOLOGY_HPP
#define TREESOLVE_TOPOLOGY_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "treesolve/error.hpp"

// Two-tree network layout.
//
// The machine is a binary tree of 2N-1 nodes. The N leaves sit on level 0
// and each store one block row of the system; internal nodes only relay
// and solve interface systems. Every node except the root has a parent;
// every internal node has an up-child and a down-child.
//
// Processor numbers are 1-based within each level, counted from the
// uppermost node downward. This convention is load-bearing for the wing
// placement loop in `wing_level`:
//
//   j := proc (for the coupling to the next row) or proc - 1 (previous row)
//   half := N/2
//   for slot = depth .. 1:
//     if j >= half: j -= half
//     if j == 0:    deposit into wing slot `slot`; stop
//     half /= 2
//
// With 1-based numbering this places leaf 1's next-row coupling in slot 1
// and leaves the last leaf's next-row coupling unplaced (it is required to
// be zero); a 0-based reading would misroute every coupling. Equivalently,
// slot(proc) = 1 + (number of trailing zero bits of proc), clamped to the
// tree depth. The previous-row loop for leaf 1 starts at j == 0 and
// deposits that (required-zero) block in the top slot, which is kept as a
// harmless no-op rather than special-cased.
namespace ts::topo {

/// Global problem dimensions. `leaves` must be a power of two; `depth`
/// is derived as log2(leaves).
struct ProblemShape {
  std::size_t leaves = 0;      // number of block rows / leaf nodes
  std::size_t block_size = 0;  // square block dimension
  std::size_t rhs_cols = 0;    // right-hand-side column count
  std::size_t bandwidth = 0;   // scalar bandwidth, <= block_size
  int depth = 0;               // log2(leaves)

  static ProblemShape create(std::size_t leaves, std::size_t block_size,
                             std::size_t rhs_cols, std::size_t bandwidth);
};

using NodeId = std::size_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct NodeInfo {
  NodeId id = kNoNode;
  int level = 0;
  std::size_t proc = 0;  // 1-based index within the level
  NodeId parent = kNoNode;
  NodeId up_child = kNoNode;
  NodeId down_child = kNoNode;

  bool is_leaf() const noexcept { return up_child == kNoNode; }
  bool is_root() const noexcept { return parent == kNoNode; }
};

class TreeLayout {
public:
  static TreeLayout build(const ProblemShape& shape);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const noexcept { return leaves_; }
  int depth() const noexcept { return depth_; }

  const NodeInfo& node(NodeId id) const;
  NodeId at(int level, std::size_t proc) const;
  NodeId leaf(std::size_t proc) const { return at(0, proc); }
  const std::vector<NodeInfo>& all() const noexcept { return nodes_; }

  /// Processor number of the ancestor of `id` at `level` (>= the node's
  /// own level).
  std::size_t proc_at_level(NodeId id, int level) const;

private:
  std::vector<NodeInfo> nodes_;
  std::vector<std::size_t> level_offset_;
  std::size_t leaves_ = 0;
  int depth_ = 0;
};

/// Processor numbers of a leaf's ancestors for levels 0..depth.
/// proc_path(p)[l] == ceil(p / 2^l); the last entry is always 1 (root).
std::vector<std::size_t> proc_path(std::size_t leaf_proc, const ProblemShape& shape);

/// Which off-diagonal block of a leaf is meant: the coupling to the next
/// block row (stored above the diagonal) or to the previous one (below).
enum class Coupling { upper, lower };

/// Wing slot that receives the given coupling block of a leaf, or
/// nullopt when the loop completes without depositing (the last leaf's
/// upper coupling, which is required to be zero). The first leaf's lower
/// coupling reports the top slot `depth`; that block is also required to
/// be zero, so the deposit is a no-op.
std::optional<int> wing_level(std::size_t leaf_proc, Coupling which,
                              const ProblemShape& shape);

}  // namespace ts::topo

#endif  // TREESOLVE_TOPOLOGY_HPP
