#include "treesolve/oracle.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace ts::oracle {

namespace {

constexpr double kPivotFloor = 1e-300;

// Self-contained dense elimination; intentionally does not share code
// with the kernels used by the distributed path.
dense::Matrix gauss_solve(dense::Matrix a, dense::Matrix b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw DimensionMismatch("gauss_solve dimensions do not agree");
  }
  const std::size_t n = a.rows();
  const std::size_t w = b.cols();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > best) {
        best = std::abs(a(r, col));
        pivot = r;
      }
    }
    if (best < kPivotFloor) {
      throw SingularMatrix("zero pivot in column " + std::to_string(col));
    }
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
      for (std::size_t j = 0; j < w; ++j) std::swap(b(col, j), b(pivot, j));
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      for (std::size_t j = 0; j < w; ++j) b(r, j) -= f * b(col, j);
    }
  }
  dense::Matrix x(n, w);
  for (std::size_t ri = n; ri-- > 0;) {
    for (std::size_t j = 0; j < w; ++j) {
      double acc = b(ri, j);
      for (std::size_t c = ri + 1; c < n; ++c) acc -= a(ri, c) * x(c, j);
      x(ri, j) = acc / a(ri, ri);
    }
  }
  return x;
}

}  // namespace

GlobalSystem assemble_global(const std::vector<BlockRow>& rows,
                             const topo::ProblemShape& shape) {
  const std::size_t m = shape.block_size;
  const std::size_t k = shape.rhs_cols;
  const std::size_t nb = shape.leaves;
  if (rows.size() != nb) {
    throw InputCountMismatch("expected " + std::to_string(nb) + " block rows, got " +
                             std::to_string(rows.size()));
  }
  for (std::size_t i = 0; i < nb; ++i) {
    const BlockRow& r = rows[i];
    if (r.diag.rows() != m || r.diag.cols() != m || r.lower.rows() != m ||
        r.lower.cols() != m || r.upper.rows() != m || r.upper.cols() != m ||
        r.rhs.rows() != m || r.rhs.cols() != k) {
      throw DimensionMismatch("block row " + std::to_string(i + 1) +
                              " has inconsistent dimensions");
    }
  }
  if (!rows.front().lower.is_zero()) {
    throw BoundaryViolation("first block row must have a zero lower coupling");
  }
  if (!rows.back().upper.is_zero()) {
    throw BoundaryViolation("last block row must have a zero upper coupling");
  }

  GlobalSystem g;
  g.block_size = m;
  g.block_rows = nb;
  g.a = dense::Matrix(nb * m, nb * m);
  g.rhs = dense::Matrix(nb * m, k);
  for (std::size_t i = 0; i < nb; ++i) {
    g.a.set_block(i * m, i * m, rows[i].diag);
    if (i > 0) g.a.set_block(i * m, (i - 1) * m, rows[i].lower);
    if (i + 1 < nb) g.a.set_block(i * m, (i + 1) * m, rows[i].upper);
    g.rhs.set_block(i * m, 0, rows[i].rhs);
  }
  return g;
}

dense::Matrix banded_solve(const GlobalSystem& g) {
  return gauss_solve(g.a, g.rhs);
}

dense::Matrix recursive_matmul(const dense::Matrix& m, const dense::Matrix& u,
                               const dense::Matrix& w, int depth,
                               dense::FlopCount* flops) {
  if (u.cols() != w.rows() || m.rows() != u.rows() || m.cols() != w.cols()) {
    throw DimensionMismatch("recursive_matmul dimensions do not agree");
  }
  if (depth <= 0 || m.rows() < 2) {
    return dense::gemm_sub(m, u, w, flops);
  }
  const std::size_t half = m.rows() / 2;
  dense::Matrix top = recursive_matmul(m.block(0, 0, half, m.cols()),
                                       u.block(0, 0, half, u.cols()), w,
                                       depth - 1, flops);
  dense::Matrix bottom = recursive_matmul(m.block(half, 0, m.rows() - half, m.cols()),
                                          u.block(half, 0, u.rows() - half, u.cols()),
                                          w, depth - 1, flops);
  dense::Matrix out(m.rows(), m.cols());
  out.set_block(0, 0, top);
  out.set_block(half, 0, bottom);
  return out;
}

namespace {

// One divide-and-conquer level: split in the middle, solve both halves
// against their coupling columns, close the seam with the interface
// system, then push the interface solution back into both halves.
dense::Matrix recursive_step(const dense::Matrix& a, const dense::Matrix& rhs,
                             std::size_t m) {
  const std::size_t n = a.rows();
  if (n <= 2 * m) {
    return gauss_solve(a, rhs);
  }
  const std::size_t h = n / 2;
  const std::size_t w = rhs.cols();

  dense::Matrix v1 = a.block(0, h, h, m);
  dense::Matrix v2 = a.block(h, h - m, n - h, m);
  dense::Matrix r1(h, m + w);
  r1.set_block(0, 0, v1);
  r1.set_block(0, m, rhs.block(0, 0, h, w));
  dense::Matrix r2(n - h, m + w);
  r2.set_block(0, 0, v2);
  r2.set_block(0, m, rhs.block(h, 0, n - h, w));

  dense::Matrix t1 = recursive_step(a.block(0, 0, h, h), r1, m);
  dense::Matrix t2 = recursive_step(a.block(h, h, n - h, n - h), r2, m);

  dense::Matrix tv1 = t1.block(0, 0, h, m);
  dense::Matrix ty1 = t1.block(0, m, h, w);
  dense::Matrix tv2 = t2.block(0, 0, n - h, m);
  dense::Matrix ty2 = t2.block(0, m, n - h, w);

  dense::Matrix s = dense::Matrix::identity(2 * m);
  s.set_block(0, m, tv1.block(h - m, 0, m, m));
  s.set_block(m, 0, tv2.block(0, 0, m, m));
  dense::Matrix zrhs(2 * m, w);
  zrhs.set_block(0, 0, ty1.block(h - m, 0, m, w));
  zrhs.set_block(m, 0, ty2.block(0, 0, m, w));
  dense::Matrix z = gauss_solve(s, zrhs);

  int depth = 0;
  for (std::size_t span = h / m; span > 1; span /= 2) ++depth;
  dense::Matrix x1 = recursive_matmul(ty1, tv1, z.block(m, 0, m, w), depth);
  dense::Matrix x2 = recursive_matmul(ty2, tv2, z.block(0, 0, m, w), depth);

  dense::Matrix x(n, w);
  x.set_block(0, 0, x1);
  x.set_block(h, 0, x2);
  return x;
}

}  // namespace

dense::Matrix recursive_solver(const GlobalSystem& g) {
  return recursive_step(g.a, g.rhs, g.block_size);
}

std::size_t wing_column(std::size_t leaf_proc, int slot,
                        const topo::ProblemShape& shape) {
  if (leaf_proc < 1 || leaf_proc > shape.leaves) {
    throw OutOfRange("leaf proc out of range");
  }
  if (slot < 1 || slot > shape.depth) {
    throw OutOfRange("wing slot out of range");
  }
  const std::size_t span = std::size_t{1} << slot;
  const std::size_t first = ((leaf_proc - 1) / span) * span + 1;
  const std::size_t mid = first + span / 2 - 1;  // last leaf of the upper half
  return leaf_proc <= mid ? mid + 1 : mid;
}

IterationMatrices materialize_iteration(const std::vector<solver::LeafState>& states,
                                        int rounds_done,
                                        const topo::ProblemShape& shape) {
  const std::size_t m = shape.block_size;
  const std::size_t nb = shape.leaves;
  if (states.size() != nb) {
    throw InputCountMismatch("one leaf state per leaf required");
  }
  if (rounds_done < 0 || rounds_done > shape.depth) {
    throw OutOfRange("rounds_done out of range");
  }
  IterationMatrices it;
  it.a = dense::Matrix::identity(nb * m);
  it.rhs = dense::Matrix(nb * m, shape.rhs_cols);
  for (std::size_t leaf = 1; leaf <= nb; ++leaf) {
    const solver::LeafState& st = states[leaf - 1];
    for (int slot = rounds_done + 1; slot <= shape.depth; ++slot) {
      const std::size_t col = wing_column(leaf, slot, shape);
      it.a.set_block((leaf - 1) * m, (col - 1) * m, st.wings.slot(slot));
    }
    it.rhs.set_block((leaf - 1) * m, 0, st.x);
  }
  return it;
}

dense::Matrix materialize_round_factor(const std::vector<solver::LeafState>& states,
                                       int round, const topo::ProblemShape& shape) {
  const std::size_t m = shape.block_size;
  const std::size_t nb = shape.leaves;
  if (states.size() != nb) {
    throw InputCountMismatch("one leaf state per leaf required");
  }
  if (round < 1 || round > shape.depth) {
    throw OutOfRange("round out of range");
  }
  dense::Matrix d = dense::Matrix::identity(nb * m);
  for (std::size_t leaf = 1; leaf <= nb; ++leaf) {
    const std::size_t col = wing_column(leaf, round, shape);
    d.set_block((leaf - 1) * m, (col - 1) * m, states[leaf - 1].wings.slot(round));
  }
  return d;
}

}  // namespace ts::oracle
