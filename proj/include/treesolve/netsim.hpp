#ifndef TREESOLVE_NETSIM_HPP
#define TREESOLVE_NETSIM_HPP

#include <coroutine>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "treesolve/block_row.hpp"
#include "treesolve/dense.hpp"
#include "treesolve/error.hpp"
#include "treesolve/topology.hpp"

// Deterministic simulator for the two-tree message-passing machine.
//
// Node programs are coroutines that interact through six rendezvous
// channel primitives (send/receive toward parent, up-child, down-child).
// A send completes only when the matching receive has been posted on the
// same directed link; matching is FIFO per link. On completion both
// parties advance their virtual clocks to
//
//   max(sender ready, receiver ready) + latency + per_element * elements
//
// and the transfer is logged. Local compute advances only the node's own
// clock, weighted by the flop cost. Time is purely virtual: runs are
// reproducible and independent of host scheduling, which is what makes
// the complexity claims testable. The scheduler is single-threaded and
// resumes tasks in a fixed order, so two runs with identical inputs
// produce identical message logs, reports and serialized bytes.
//
// Deadlock is detected by global quiescence: when no task is runnable
// and some are still blocked, the run aborts with a diagnostic listing
// every blocked node and the channel operation it is parked on.
namespace ts::sim {

struct CostModel {
  double latency = 0.0;      // fixed time per message
  double per_element = 1.0;  // time per scalar transferred
  double flop = 1.0;         // time per arithmetic operation

  void validate() const;
};

using Payload = std::vector<dense::Matrix>;

std::uint64_t payload_elements(const Payload& p);

struct MessageRecord {
  topo::NodeId from = topo::kNoNode;
  topo::NodeId to = topo::kNoNode;
  int iteration = 0;          // sender's iteration tag at post time
  std::uint64_t elements = 0;
  double send_ready = 0.0;    // sender's clock when the send was posted
  double recv_ready = 0.0;    // receiver's clock when the receive was posted
  double completed = 0.0;
};

struct NodeReport {
  topo::NodeId id = topo::kNoNode;
  int level = 0;
  std::size_t proc = 0;
  std::uint64_t flops = 0;
  double busy = 0.0;  // compute time plus transfer time, excluding waits
};

/// Per-node causal event sequence, kept for log-replay verification.
struct NodeEvent {
  enum class Kind { compute, message };
  Kind kind = Kind::compute;
  double duration = 0.0;        // compute events
  std::size_t message_index = 0;  // message events: index into messages
};

struct SimReport {
  double makespan = 0.0;
  CostModel cost;
  std::vector<NodeReport> nodes;
  std::vector<MessageRecord> messages;
  std::vector<std::pair<int, std::uint64_t>> per_iteration_volume;
  std::vector<std::vector<NodeEvent>> node_events;
};

/// Serializes the documented report schema:
/// {makespan, cost:{latency,per_element,flop},
///  nodes:[{id,level,proc,flops,busy}],
///  messages:[{from,to,iter,elements,t_ready,t_done}],
///  per_iteration_volume:[{iter,elements}]}
/// Callers may attach further top-level blocks (e.g. problem metadata).
nlohmann::json report_to_json(const SimReport& report);

class Simulation;

/// Coroutine handle for one node task. Tasks start suspended and are
/// driven exclusively by the simulation scheduler.
class Task {
public:
  struct promise_type {
    std::exception_ptr exception;

    Task get_return_object() {
      return Task(std::coroutine_handle<promise_type>::from_promise(*this));
    }
    std::suspend_always initial_suspend() noexcept { return {}; }
    std::suspend_always final_suspend() noexcept { return {}; }
    void return_void() noexcept {}
    void unhandled_exception() noexcept { exception = std::current_exception(); }
  };

  Task() = default;
  explicit Task(std::coroutine_handle<promise_type> h) : handle_(h) {}
  Task(Task&& other) noexcept : handle_(std::exchange(other.handle_, {})) {}
  Task& operator=(Task&& other) noexcept {
    if (this != &other) {
      destroy();
      handle_ = std::exchange(other.handle_, {});
    }
    return *this;
  }
  Task(const Task&) = delete;
  Task& operator=(const Task&) = delete;
  ~Task() { destroy(); }

  bool valid() const noexcept { return static_cast<bool>(handle_); }
  bool done() const noexcept { return handle_.done(); }
  void resume() { handle_.resume(); }
  std::exception_ptr exception() const { return handle_.promise().exception; }

private:
  void destroy() {
    if (handle_) handle_.destroy();
    handle_ = {};
  }
  std::coroutine_handle<promise_type> handle_;
};

/// Per-node view of the simulation handed to a node program. All channel
/// primitives must be awaited; they throw NoSuchLink when the requested
/// link does not exist for this node.
class NodeContext {
public:
  topo::NodeId id() const noexcept { return id_; }
  int level() const;
  std::size_t proc() const;
  bool is_leaf() const;
  bool is_root() const;
  int tree_depth() const;
  /// Processor number of this node's ancestor at the given level.
  std::size_t proc_at_level(int level) const;

  /// The leaf's local block row (leaves only).
  BlockRow& input();
  /// Deposits the leaf's slice of the solution (leaves only).
  void set_output(dense::Matrix x);

  /// Advances this node's clock by `flops` weighted operations.
  void compute(std::uint64_t flops);
  /// Tags subsequent messages sent by this node.
  void set_iteration(int tag);

  struct SendAwaiter {
    Simulation* sim;
    topo::NodeId from, to;
    Payload payload;
    bool await_ready() const noexcept { return false; }
    void await_suspend(std::coroutine_handle<> h);
    void await_resume() const noexcept {}
  };

  struct RecvAwaiter {
    Simulation* sim;
    topo::NodeId from, to;
    Payload result;
    bool await_ready() const noexcept { return false; }
    void await_suspend(std::coroutine_handle<> h);
    Payload await_resume() { return std::move(result); }
  };

  SendAwaiter send_to_parent(Payload p);
  SendAwaiter send_to_up_child(Payload p);
  SendAwaiter send_to_down_child(Payload p);
  RecvAwaiter receive_from_parent();
  RecvAwaiter receive_from_up_child();
  RecvAwaiter receive_from_down_child();

private:
  friend class Simulation;
  Simulation* sim_ = nullptr;
  topo::NodeId id_ = topo::kNoNode;
};

using Program = std::function<Task(NodeContext&)>;

/// One simulation run: construct, call run() once, then read outputs.
/// Not copyable or movable; node tasks hold pointers into the instance.
class Simulation {
public:
  Simulation(const topo::TreeLayout& layout, Program program,
             std::vector<BlockRow> leaf_inputs, CostModel cost = {});
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  SimReport run();

  const dense::Matrix& leaf_output(std::size_t leaf_proc) const;
  const topo::TreeLayout& layout() const noexcept { return layout_; }

private:
  friend class NodeContext;

  struct PendingSend {
    Payload payload;
    double ready = 0.0;
    int iteration = 0;
  };
  struct PendingRecv {
    Payload* slot = nullptr;
    double ready = 0.0;
  };
  struct Channel {
    std::deque<PendingSend> sends;
    std::deque<PendingRecv> recvs;
  };
  struct NodeState {
    double clock = 0.0;
    double busy = 0.0;
    std::uint64_t flops = 0;
    int iteration = 0;
    bool finished = false;
    std::string blocked_on;  // nonempty while parked on a channel op
  };

  void post_send(topo::NodeId from, topo::NodeId to, Payload payload);
  void post_recv(topo::NodeId from, topo::NodeId to, Payload* slot);
  void complete_transfer(topo::NodeId from, topo::NodeId to, Payload payload,
                         Payload* slot, double send_ready, double recv_ready,
                         int iteration);
  topo::NodeId link_peer(topo::NodeId self, int which) const;
  void compute(topo::NodeId id, std::uint64_t flops);

  topo::TreeLayout layout_;
  Program program_;
  CostModel cost_;
  std::vector<BlockRow> inputs_;           // by leaf proc - 1
  std::vector<dense::Matrix> outputs_;     // by leaf proc - 1
  std::vector<NodeContext> contexts_;
  std::vector<Task> tasks_;
  std::vector<NodeState> states_;
  std::map<std::pair<topo::NodeId, topo::NodeId>, Channel> channels_;
  std::deque<topo::NodeId> ready_;
  std::vector<MessageRecord> log_;
  std::vector<std::vector<NodeEvent>> events_;
  bool ran_ = false;
};

}  // namespace ts::sim

#endif  // TREESOLVE_NETSIM_HPP
