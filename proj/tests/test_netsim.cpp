#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "treesolve/netsim.hpp"

using ts::dense::Matrix;
using ts::sim::CostModel;
using ts::sim::NodeContext;
using ts::sim::Payload;
using ts::sim::Program;
using ts::sim::SimReport;
using ts::sim::Simulation;
using ts::sim::Task;
using ts::topo::ProblemShape;
using ts::topo::TreeLayout;

namespace {

ProblemShape shape_n(std::size_t leaves) {
  return ProblemShape::create(leaves, 1, 1, 1);
}

ts::sim::Payload one(Matrix m) {
  ts::sim::Payload p;
  p.push_back(std::move(m));
  return p;
}

std::vector<ts::BlockRow> dummy_inputs(std::size_t leaves) {
  std::vector<ts::BlockRow> rows(leaves);
  for (auto& r : rows) {
    r.lower = Matrix(1, 1);
    r.diag = Matrix::identity(1);
    r.upper = Matrix(1, 1);
    r.rhs = Matrix(1, 1);
    r.solution = Matrix(1, 1);
  }
  return rows;
}

Program echo_program() {
  return [](NodeContext&) -> Task { co_return; };
}

// Replays the report as an event DAG and recomputes the makespan by a
// longest-path pass, independent of the live clock bookkeeping.
double replay_makespan(const SimReport& report) {
  const std::size_t nodes = report.node_events.size();
  std::vector<std::size_t> cursor(nodes, 0);
  std::vector<double> clock(nodes, 0.0);
  // Each message must wait for both endpoints to finish their earlier
  // events; process them in any order consistent with the per-node
  // sequences (Kahn-style sweep).
  std::vector<bool> message_done(report.messages.size(), false);
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t id = 0; id < nodes; ++id) {
      while (cursor[id] < report.node_events[id].size()) {
        const auto& ev = report.node_events[id][cursor[id]];
        if (ev.kind == ts::sim::NodeEvent::Kind::compute) {
          clock[id] += ev.duration;
          ++cursor[id];
          progress = true;
          continue;
        }
        const auto& msg = report.messages[ev.message_index];
        const std::size_t peer = msg.from == id ? msg.to : msg.from;
        // The peer must also be parked on this message.
        if (cursor[peer] >= report.node_events[peer].size()) break;
        const auto& peer_ev = report.node_events[peer][cursor[peer]];
        if (peer_ev.kind != ts::sim::NodeEvent::Kind::message ||
            peer_ev.message_index != ev.message_index) {
          break;
        }
        const double cost = report.cost.latency +
                            report.cost.per_element * static_cast<double>(msg.elements);
        const double done = std::max(clock[id], clock[peer]) + cost;
        clock[id] = done;
        clock[peer] = done;
        message_done[ev.message_index] = true;
        ++cursor[id];
        ++cursor[peer];
        progress = true;
      }
    }
  }
  for (bool done : message_done) REQUIRE(done);
  double makespan = 0.0;
  for (double c : clock) makespan = std::max(makespan, c);
  return makespan;
}

}  // namespace

TEST_CASE("echo program spawns all tasks and moves no data") {
  TreeLayout t = TreeLayout::build(shape_n(2));
  Simulation sim(t, echo_program(), dummy_inputs(2));
  SimReport report = sim.run();
  CHECK(report.nodes.size() == 3);
  CHECK(report.messages.empty());
  CHECK(report.makespan == 0.0);
}

TEST_CASE("leaf input count is checked") {
  TreeLayout t = TreeLayout::build(shape_n(4));
  CHECK_THROWS_AS(Simulation(t, echo_program(), dummy_inputs(3)),
                  ts::InputCountMismatch);
}

TEST_CASE("a rendezvous transfer charges latency plus volume") {
  TreeLayout t = TreeLayout::build(shape_n(2));
  CostModel cost{3.0, 0.5, 1.0};
  const std::size_t m = 4;
  std::size_t got_parts = 0, got_rows = 0;
  Program program = [m, &got_parts, &got_rows](NodeContext& ctx) -> Task {
    if (ctx.is_root()) {
      co_await ctx.send_to_up_child(one(Matrix::identity(m)));
    } else if (ctx.proc() == 1) {
      Payload p = co_await ctx.receive_from_parent();
      got_parts = p.size();
      got_rows = p.front().rows();
    }
  };
  Simulation sim(t, program, dummy_inputs(2), cost);
  SimReport report = sim.run();
  CHECK(got_parts == 1);
  CHECK(got_rows == m);
  REQUIRE(report.messages.size() == 1);
  const auto& msg = report.messages.front();
  CHECK(msg.elements == m * m);
  CHECK(msg.send_ready == 0.0);
  CHECK(msg.completed == doctest::Approx(3.0 + 0.5 * 16.0));
  CHECK(report.makespan == doctest::Approx(3.0 + 0.5 * 16.0));
}

TEST_CASE("leaves have no children to talk to") {
  TreeLayout t = TreeLayout::build(shape_n(2));
  Program program = [](NodeContext& ctx) -> Task {
    if (ctx.is_leaf() && ctx.proc() == 1) {
      co_await ctx.send_to_up_child(one(Matrix::identity(1)));
    }
  };
  Simulation sim(t, program, dummy_inputs(2));
  CHECK_THROWS_AS(sim.run(), ts::NoSuchLink);
}

TEST_CASE("mismatched receives deadlock with both sites reported") {
  TreeLayout t = TreeLayout::build(shape_n(2));
  Program program = [](NodeContext& ctx) -> Task {
    if (ctx.is_root()) {
      co_await ctx.receive_from_up_child();
    } else if (ctx.proc() == 1) {
      co_await ctx.receive_from_parent();
    }
  };
  Simulation sim(t, program, dummy_inputs(2));
  try {
    sim.run();
    FAIL("expected a deadlock");
  } catch (const ts::DeadlockError& e) {
    const std::string what = e.what();
    CHECK(what.find("node 0") != std::string::npos);
    CHECK(what.find("node 2") != std::string::npos);
    CHECK(what.find("receive") != std::string::npos);
  }
}

TEST_CASE("compute-only work sets the makespan") {
  TreeLayout t = TreeLayout::build(shape_n(2));
  CostModel cost{0.0, 1.0, 0.25};
  Program program = [](NodeContext& ctx) -> Task {
    if (ctx.is_root()) ctx.compute(1000);
    co_return;
  };
  Simulation sim(t, program, dummy_inputs(2), cost);
  SimReport report = sim.run();
  CHECK(report.makespan == doctest::Approx(250.0));
  CHECK(report.nodes[2].flops == 1000);
}

TEST_CASE("a leaf-to-root relay costs one hop per level") {
  const std::size_t n = 8;
  TreeLayout t = TreeLayout::build(shape_n(n));
  CostModel cost{1.0, 1.0, 1.0};
  // Leaf 1 forwards a scalar along the proc-1 spine to the root.
  Program program = [](NodeContext& ctx) -> Task {
    if (ctx.proc() != 1) co_return;
    if (ctx.is_leaf()) {
      co_await ctx.send_to_parent(one(Matrix::identity(1)));
    } else {
      Payload p = co_await ctx.receive_from_up_child();
      if (!ctx.is_root()) co_await ctx.send_to_parent(std::move(p));
    }
  };
  Simulation sim(t, program, dummy_inputs(n), cost);
  SimReport report = sim.run();
  CHECK(report.messages.size() == 3);
  CHECK(report.makespan == doctest::Approx(2.0 * 3));
}

TEST_CASE("runs are deterministic") {
  const std::size_t n = 4;
  Program program = [](NodeContext& ctx) -> Task {
    if (ctx.is_leaf()) {
      ctx.set_iteration(1);
      co_await ctx.send_to_parent(one(Matrix::identity(2)));
    } else if (ctx.level() == 1) {
      ctx.set_iteration(1);
      Payload up = co_await ctx.receive_from_up_child();
      Payload down = co_await ctx.receive_from_down_child();
      ctx.compute(17);
      ctx.set_iteration(2);
      co_await ctx.send_to_parent(std::move(up));
    } else {
      ctx.set_iteration(2);
      co_await ctx.receive_from_up_child();
      co_await ctx.receive_from_down_child();
    }
  };
  auto run_once = [&] {
    TreeLayout t = TreeLayout::build(shape_n(n));
    Simulation sim(t, program, dummy_inputs(n), CostModel{2.0, 1.0, 1.0});
    return ts::sim::report_to_json(sim.run()).dump();
  };
  const std::string first = run_once();
  for (int i = 0; i < 5; ++i) CHECK(run_once() == first);
}

TEST_CASE("payload volume is conserved per link and tagged per iteration") {
  const std::size_t n = 4;
  TreeLayout t = TreeLayout::build(shape_n(n));
  Program program = [](NodeContext& ctx) -> Task {
    if (ctx.is_leaf()) {
      ctx.set_iteration(1);
      ts::sim::Payload pay;
      pay.push_back(Matrix(2, 3));
      pay.push_back(Matrix(1, 1));
      co_await ctx.send_to_parent(std::move(pay));
    } else if (ctx.level() == 1) {
      co_await ctx.receive_from_up_child();
      co_await ctx.receive_from_down_child();
    }
    co_return;
  };
  Simulation sim(t, program, dummy_inputs(n));
  SimReport report = sim.run();
  REQUIRE(report.messages.size() == 4);
  std::uint64_t sent = 0;
  for (const auto& m : report.messages) {
    CHECK(m.elements == 7);
    sent += m.elements;
  }
  REQUIRE(report.per_iteration_volume.size() == 1);
  CHECK(report.per_iteration_volume.front().first == 1);
  CHECK(report.per_iteration_volume.front().second == sent);
}

TEST_CASE("no receive completes before its send is posted") {
  const std::size_t n = 8;
  TreeLayout t = TreeLayout::build(shape_n(n));
  // Staggered compute makes ready times differ on both sides.
  Program program = [](NodeContext& ctx) -> Task {
    if (ctx.is_leaf()) {
      ctx.compute(3 * ctx.proc());
      co_await ctx.send_to_parent(one(Matrix::identity(1)));
    } else if (ctx.level() == 1) {
      ctx.compute(5);
      Payload up = co_await ctx.receive_from_up_child();
      Payload down = co_await ctx.receive_from_down_child();
      co_await ctx.send_to_parent(std::move(down));
    } else if (ctx.level() == 2) {
      co_await ctx.receive_from_up_child();
      co_await ctx.receive_from_down_child();
    }
    co_return;
  };
  Simulation sim(t, program, dummy_inputs(n), CostModel{1.0, 1.0, 1.0});
  SimReport report = sim.run();
  for (const auto& m : report.messages) {
    CHECK(m.completed >= m.send_ready + report.cost.latency +
                             report.cost.per_element * m.elements);
    CHECK(m.completed >= m.recv_ready);
    CHECK(report.makespan >= m.completed);
  }
  for (const auto& node : report.nodes) {
    CHECK(report.makespan >= node.busy);
  }
}

TEST_CASE("makespan equals the longest path through the event DAG") {
  const std::size_t n = 8;
  TreeLayout t = TreeLayout::build(shape_n(n));
  Program program = [](NodeContext& ctx) -> Task {
    if (ctx.is_leaf()) {
      ctx.compute(ctx.proc() * 7);
      co_await ctx.send_to_parent(one(Matrix::identity(2)));
      co_return;
    }
    Payload up = co_await ctx.receive_from_up_child();
    Payload down = co_await ctx.receive_from_down_child();
    ctx.compute(11);
    if (!ctx.is_root()) {
      co_await ctx.send_to_parent(ctx.proc() % 2 ? std::move(down) : std::move(up));
    }
  };
  Simulation sim(t, program, dummy_inputs(n), CostModel{2.0, 0.5, 1.5});
  SimReport report = sim.run();
  CHECK(report.makespan == doctest::Approx(replay_makespan(report)).epsilon(1e-12));
}
