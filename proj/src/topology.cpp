#include "treesolve/topology.hpp"

#include <bit>
#include <string>

namespace ts::topo {

ProblemShape ProblemShape::create(std::size_t leaves, std::size_t block_size,
                                  std::size_t rhs_cols, std::size_t bandwidth) {
  if (leaves == 0 || !std::has_single_bit(leaves)) {
    throw InvalidShape("leaf count must be a power of two, got " +
                       std::to_string(leaves));
  }
  if (block_size < 1) throw InvalidShape("block size must be at least 1");
  if (rhs_cols < 1) throw InvalidShape("rhs column count must be at least 1");
  if (bandwidth > block_size) {
    throw InvalidShape("bandwidth " + std::to_string(bandwidth) +
                       " exceeds block size " + std::to_string(block_size));
  }
  ProblemShape s;
  s.leaves = leaves;
  s.block_size = block_size;
  s.rhs_cols = rhs_cols;
  s.bandwidth = bandwidth;
  s.depth = std::countr_zero(leaves);
  return s;
}

TreeLayout TreeLayout::build(const ProblemShape& shape) {
  TreeLayout t;
  t.leaves_ = shape.leaves;
  t.depth_ = shape.depth;

  // Nodes are numbered level-major: leaves first (ids 0..N-1 for procs
  // 1..N), then each higher level in proc order.
  t.level_offset_.resize(shape.depth + 1, 0);
  std::size_t next = 0;
  for (int level = 0; level <= shape.depth; ++level) {
    t.level_offset_[level] = next;
    next += shape.leaves >> level;
  }
  t.nodes_.resize(next);

  for (int level = 0; level <= shape.depth; ++level) {
    const std::size_t count = shape.leaves >> level;
    for (std::size_t proc = 1; proc <= count; ++proc) {
      NodeInfo& n = t.nodes_[t.level_offset_[level] + proc - 1];
      n.id = t.level_offset_[level] + proc - 1;
      n.level = level;
      n.proc = proc;
      if (level < shape.depth) {
        n.parent = t.level_offset_[level + 1] + (proc + 1) / 2 - 1;
      }
      if (level > 0) {
        n.up_child = t.level_offset_[level - 1] + 2 * proc - 2;
        n.down_child = t.level_offset_[level - 1] + 2 * proc - 1;
      }
    }
  }
  return t;
}

const NodeInfo& TreeLayout::node(NodeId id) const {
  if (id >= nodes_.size()) throw OutOfRange("node id out of range");
  return nodes_[id];
}

NodeId TreeLayout::at(int level, std::size_t proc) const {
  if (level < 0 || level > depth_) throw OutOfRange("level out of range");
  const std::size_t count = leaves_ >> level;
  if (proc < 1 || proc > count) {
    throw OutOfRange("proc " + std::to_string(proc) + " out of range for level " +
                     std::to_string(level));
  }
  return level_offset_[level] + proc - 1;
}

std::size_t TreeLayout::proc_at_level(NodeId id, int level) const {
  const NodeInfo& n = node(id);
  if (level < n.level || level > depth_) {
    throw OutOfRange("ancestor level out of range");
  }
  // ceil(proc / 2^(level - own level))
  const std::size_t shift = static_cast<std::size_t>(level - n.level);
  return ((n.proc - 1) >> shift) + 1;
}

std::vector<std::size_t> proc_path(std::size_t leaf_proc, const ProblemShape& shape) {
  if (leaf_proc < 1 || leaf_proc > shape.leaves) {
    throw OutOfRange("leaf proc " + std::to_string(leaf_proc) + " out of range");
  }
  std::vector<std::size_t> path(shape.depth + 1);
  for (int level = 0; level <= shape.depth; ++level) {
    path[level] = ((leaf_proc - 1) >> level) + 1;
  }
  return path;
}

std::optional<int> wing_level(std::size_t leaf_proc, Coupling which,
                              const ProblemShape& shape) {
  if (leaf_proc < 1 || leaf_proc > shape.leaves) {
    throw OutOfRange("leaf proc " + std::to_string(leaf_proc) + " out of range");
  }
  std::size_t j = (which == Coupling::upper) ? leaf_proc : leaf_proc - 1;
  std::size_t half = shape.leaves / 2;
  for (int slot = shape.depth; slot >= 1; --slot) {
    if (j >= half) j -= half;
    if (j == 0) return slot;
    half /= 2;
  }
  return std::nullopt;
}

}  // namespace ts::topo
