#include "treesolve/solver.hpp"

#include <string>
#include <utility>

namespace ts::solver {

namespace {

void check_block(const dense::Matrix& m, std::size_t rows, std::size_t cols,
                 const char* what, std::size_t leaf_proc) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionMismatch(std::string(what) + " of leaf " +
                            std::to_string(leaf_proc) + " has wrong shape");
  }
}

}  // namespace

LeafState leaf_init(const BlockRow& row, std::size_t leaf_proc,
                    const topo::ProblemShape& shape, dense::FlopCount* flops) {
  const std::size_t m = shape.block_size;
  const std::size_t k = shape.rhs_cols;
  const int d = shape.depth;
  check_block(row.diag, m, m, "diagonal block", leaf_proc);
  check_block(row.lower, m, m, "lower coupling", leaf_proc);
  check_block(row.upper, m, m, "upper coupling", leaf_proc);
  check_block(row.rhs, m, k, "right-hand side", leaf_proc);

  LeafState state;
  state.wings.v.assign(static_cast<std::size_t>(d), dense::Matrix(m, m));
  if (auto slot = topo::wing_level(leaf_proc, topo::Coupling::upper, shape)) {
    state.wings.slot(*slot) = dense::add(state.wings.slot(*slot), row.upper);
  }
  if (auto slot = topo::wing_level(leaf_proc, topo::Coupling::lower, shape)) {
    state.wings.slot(*slot) = dense::add(state.wings.slot(*slot), row.lower);
  }

  // One combined solve of diag \ [V{1}..V{d}, Y].
  dense::Matrix rhs(m, m * static_cast<std::size_t>(d) + k);
  for (int j = 1; j <= d; ++j) {
    rhs.set_block(0, (static_cast<std::size_t>(j) - 1) * m, state.wings.slot(j));
  }
  rhs.set_block(0, static_cast<std::size_t>(d) * m, row.rhs);

  dense::LUFactors f;
  try {
    f = dense::lu_factor(row.diag, flops);
  } catch (const SingularMatrix& e) {
    throw SingularMatrix("diagonal block of leaf " + std::to_string(leaf_proc) +
                         " is singular: " + e.what());
  }
  dense::Matrix solved = dense::lu_solve(f, rhs, flops);
  for (int j = 1; j <= d; ++j) {
    state.wings.slot(j) = solved.block(0, (static_cast<std::size_t>(j) - 1) * m, m, m);
  }
  state.x = solved.block(0, static_cast<std::size_t>(d) * m, m, k);
  return state;
}

dense::Matrix assemble_reduced(const dense::Matrix& wing_up,
                               const dense::Matrix& wing_down) {
  if (wing_up.rows() != wing_up.cols() || wing_down.rows() != wing_down.cols() ||
      wing_up.rows() != wing_down.rows()) {
    throw DimensionMismatch("interface wings must be square and equally sized");
  }
  const std::size_t m = wing_up.rows();
  dense::Matrix s = dense::Matrix::identity(2 * m);
  s.set_block(0, m, wing_up);
  s.set_block(m, 0, wing_down);
  return s;
}

dense::Matrix solve_reduced(const dense::Matrix& s, const dense::Matrix& rhs,
                            dense::FlopCount* flops) {
  if (rhs.rows() != s.rows()) {
    throw DimensionMismatch("interface right-hand side must have 2m rows");
  }
  return dense::lu_solve(dense::lu_factor(s, flops), rhs, flops);
}

namespace {

// Upward payload for a round: [V{round}..V{d}, X].
sim::Payload upward_payload(const LeafState& state, int round, int depth) {
  sim::Payload p;
  p.reserve(static_cast<std::size_t>(depth - round + 1) + 1);
  for (int j = round; j <= depth; ++j) p.push_back(state.wings.slot(j));
  p.push_back(state.x);
  return p;
}

// Splits one half of the interface solution back into the payload shape
// [Z_V{round+1}..Z_V{d}, Z_X].
sim::Payload z_payload(const dense::Matrix& z, std::size_t row0, int round,
                       int depth, std::size_t m, std::size_t k) {
  sim::Payload p;
  p.reserve(static_cast<std::size_t>(depth - round) + 1);
  for (int j = 0; j < depth - round; ++j) {
    p.push_back(z.block(row0, static_cast<std::size_t>(j) * m, m, m));
  }
  p.push_back(z.block(row0, static_cast<std::size_t>(depth - round) * m, m, k));
  return p;
}

sim::Task run_node(sim::NodeContext& ctx, topo::ProblemShape shape,
                   SolverOptions opts) {
  const int depth = shape.depth;
  const std::size_t m = shape.block_size;
  const std::size_t k = shape.rhs_cols;

  if (ctx.is_leaf()) {
    dense::FlopCount fc;
    LeafState state = leaf_init(ctx.input(), ctx.proc(), shape, &fc);
    ctx.compute(fc.value);
    if (opts.capture) opts.capture(ctx.proc(), 0, state);

    for (int round = 1; round <= depth; ++round) {
      ctx.set_iteration(round);
      co_await ctx.send_to_parent(upward_payload(state, round, depth));
      sim::Payload z = co_await ctx.receive_from_parent();

      dense::FlopCount uf;
      const dense::Matrix& consumed = state.wings.slot(round);
      for (int j = round + 1; j <= depth; ++j) {
        state.wings.slot(j) = dense::gemm_sub(
            state.wings.slot(j), consumed, z[static_cast<std::size_t>(j - round - 1)], &uf);
      }
      state.x = dense::gemm_sub(state.x, consumed, z.back(), &uf);
      ctx.compute(uf.value);
      if (opts.capture) opts.capture(ctx.proc(), round, state);
    }
    ctx.set_output(std::move(state.x));
  } else {
    for (int round = 1; round <= depth; ++round) {
      ctx.set_iteration(round);
      if (opts.schedule == Schedule::gated && ctx.level() > round) continue;

      sim::Payload up = co_await ctx.receive_from_up_child();
      sim::Payload down = co_await ctx.receive_from_down_child();

      if (ctx.level() < round) {
        // Relay the boundary-side payload: in the upper half of the
        // level-`round` subtree the boundary leaf is the lowermost one.
        const bool upper_half = ctx.proc_at_level(round - 1) % 2 == 1;
        co_await ctx.send_to_parent(upper_half ? std::move(down) : std::move(up));

        sim::Payload z = co_await ctx.receive_from_parent();
        sim::Payload z_copy = z;
        co_await ctx.send_to_up_child(std::move(z_copy));
        co_await ctx.send_to_down_child(std::move(z));
      } else if (ctx.level() == round) {
        dense::FlopCount fc;
        dense::Matrix s = assemble_reduced(up.front(), down.front());
        const std::size_t width = m * static_cast<std::size_t>(depth - round) + k;
        dense::Matrix rhs(2 * m, width);
        std::size_t c0 = 0;
        for (std::size_t i = 1; i < up.size(); ++i) {
          rhs.set_block(0, c0, up[i]);
          rhs.set_block(m, c0, down[i]);
          c0 += up[i].cols();
        }
        dense::Matrix z;
        try {
          z = solve_reduced(s, rhs, &fc);
        } catch (const SingularMatrix& e) {
          throw SingularMatrix("interface system at level " +
                               std::to_string(ctx.level()) + ", proc " +
                               std::to_string(ctx.proc()) + ", round " +
                               std::to_string(round) + " is singular: " + e.what());
        }
        ctx.compute(fc.value);
        co_await ctx.send_to_up_child(z_payload(z, m, round, depth, m, k));
        co_await ctx.send_to_down_child(z_payload(z, 0, round, depth, m, k));
      }
      // Nodes above the active level sit this round out (gated schedule).
    }
  }
}

}  // namespace

sim::Program solver_program(const topo::ProblemShape& shape, SolverOptions options) {
  return [shape, options](sim::NodeContext& ctx) -> sim::Task {
    return run_node(ctx, shape, options);
  };
}

dense::Matrix gather_solution(const sim::Simulation& sim,
                              const topo::ProblemShape& shape) {
  std::vector<dense::Matrix> slices;
  slices.reserve(shape.leaves);
  for (std::size_t proc = 1; proc <= shape.leaves; ++proc) {
    const dense::Matrix& x = sim.leaf_output(proc);
    if (x.empty()) {
      throw InvalidArgument("leaf " + std::to_string(proc) +
                            " produced no solution slice");
    }
    slices.push_back(x);
  }
  return dense::vstack(slices);
}

SolveResult solve_distributed(const std::vector<BlockRow>& rows,
                              const topo::ProblemShape& shape,
                              const sim::CostModel& cost,
                              const SolverOptions& options) {
  topo::TreeLayout layout = topo::TreeLayout::build(shape);
  sim::Simulation sim(layout, solver_program(shape, options), rows, cost);
  SolveResult result;
  result.report = sim.run();
  result.solution = gather_solution(sim, shape);
  return result;
}

}  // namespace ts::solver
