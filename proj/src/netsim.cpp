#include "treesolve/netsim.hpp"

#include <algorithm>
#include <string>

namespace ts::sim {

void CostModel::validate() const {
  if (latency < 0 || per_element < 0 || flop < 0) {
    throw InvalidArgument("cost model parameters must be nonnegative");
  }
}

std::uint64_t payload_elements(const Payload& p) {
  std::uint64_t n = 0;
  for (const dense::Matrix& m : p) n += m.size();
  return n;
}

nlohmann::json report_to_json(const SimReport& report) {
  nlohmann::json j;
  j["makespan"] = report.makespan;
  j["cost"] = {{"latency", report.cost.latency},
               {"per_element", report.cost.per_element},
               {"flop", report.cost.flop}};
  j["nodes"] = nlohmann::json::array();
  for (const NodeReport& n : report.nodes) {
    j["nodes"].push_back({{"id", n.id},
                          {"level", n.level},
                          {"proc", n.proc},
                          {"flops", n.flops},
                          {"busy", n.busy}});
  }
  j["messages"] = nlohmann::json::array();
  for (const MessageRecord& m : report.messages) {
    j["messages"].push_back({{"from", m.from},
                             {"to", m.to},
                             {"iter", m.iteration},
                             {"elements", m.elements},
                             {"t_ready", m.send_ready},
                             {"t_done", m.completed}});
  }
  j["per_iteration_volume"] = nlohmann::json::array();
  for (const auto& [iter, elements] : report.per_iteration_volume) {
    j["per_iteration_volume"].push_back({{"iter", iter}, {"elements", elements}});
  }
  return j;
}

int NodeContext::level() const { return sim_->layout_.node(id_).level; }
std::size_t NodeContext::proc() const { return sim_->layout_.node(id_).proc; }
bool NodeContext::is_leaf() const { return sim_->layout_.node(id_).is_leaf(); }
bool NodeContext::is_root() const { return sim_->layout_.node(id_).is_root(); }
int NodeContext::tree_depth() const { return sim_->layout_.depth(); }

std::size_t NodeContext::proc_at_level(int level) const {
  return sim_->layout_.proc_at_level(id_, level);
}

BlockRow& NodeContext::input() {
  const topo::NodeInfo& n = sim_->layout_.node(id_);
  if (!n.is_leaf()) throw InvalidArgument("only leaves hold input data");
  return sim_->inputs_[n.proc - 1];
}

void NodeContext::set_output(dense::Matrix x) {
  const topo::NodeInfo& n = sim_->layout_.node(id_);
  if (!n.is_leaf()) throw InvalidArgument("only leaves produce output");
  sim_->outputs_[n.proc - 1] = std::move(x);
}

void NodeContext::compute(std::uint64_t flops) { sim_->compute(id_, flops); }

void NodeContext::set_iteration(int tag) { sim_->states_[id_].iteration = tag; }

void NodeContext::SendAwaiter::await_suspend(std::coroutine_handle<>) {
  sim->post_send(from, to, std::move(payload));
}

void NodeContext::RecvAwaiter::await_suspend(std::coroutine_handle<>) {
  sim->post_recv(from, to, &result);
}

namespace {

topo::NodeId require_link(const topo::NodeInfo& n, topo::NodeId peer, const char* op) {
  if (peer == topo::kNoNode) {
    throw NoSuchLink("node " + std::to_string(n.id) + " (level " +
                     std::to_string(n.level) + ", proc " + std::to_string(n.proc) +
                     ") has no link for " + op);
  }
  return peer;
}

}  // namespace

NodeContext::SendAwaiter NodeContext::send_to_parent(Payload p) {
  const topo::NodeInfo& n = sim_->layout_.node(id_);
  return {sim_, id_, require_link(n, n.parent, "send_to_parent"), std::move(p)};
}

NodeContext::SendAwaiter NodeContext::send_to_up_child(Payload p) {
  const topo::NodeInfo& n = sim_->layout_.node(id_);
  return {sim_, id_, require_link(n, n.up_child, "send_to_up_child"), std::move(p)};
}

NodeContext::SendAwaiter NodeContext::send_to_down_child(Payload p) {
  const topo::NodeInfo& n = sim_->layout_.node(id_);
  return {sim_, id_, require_link(n, n.down_child, "send_to_down_child"), std::move(p)};
}

NodeContext::RecvAwaiter NodeContext::receive_from_parent() {
  const topo::NodeInfo& n = sim_->layout_.node(id_);
  return {sim_, require_link(n, n.parent, "receive_from_parent"), id_, {}};
}

NodeContext::RecvAwaiter NodeContext::receive_from_up_child() {
  const topo::NodeInfo& n = sim_->layout_.node(id_);
  return {sim_, require_link(n, n.up_child, "receive_from_up_child"), id_, {}};
}

NodeContext::RecvAwaiter NodeContext::receive_from_down_child() {
  const topo::NodeInfo& n = sim_->layout_.node(id_);
  return {sim_, require_link(n, n.down_child, "receive_from_down_child"), id_, {}};
}

Simulation::Simulation(const topo::TreeLayout& layout, Program program,
                       std::vector<BlockRow> leaf_inputs, CostModel cost)
    : layout_(layout), program_(std::move(program)), cost_(cost),
      inputs_(std::move(leaf_inputs)) {
  cost_.validate();
  if (!program_) throw InvalidArgument("node program must be callable");
  if (inputs_.size() != layout_.leaf_count()) {
    throw InputCountMismatch("expected " + std::to_string(layout_.leaf_count()) +
                             " leaf inputs, got " + std::to_string(inputs_.size()));
  }
  const std::size_t n = layout_.node_count();
  outputs_.resize(layout_.leaf_count());
  states_.resize(n);
  events_.resize(n);
  contexts_.resize(n);
  tasks_.reserve(n);
  for (std::size_t id = 0; id < n; ++id) {
    contexts_[id].sim_ = this;
    contexts_[id].id_ = id;
    tasks_.push_back(program_(contexts_[id]));
  }
}

void Simulation::post_send(topo::NodeId from, topo::NodeId to, Payload payload) {
  Channel& ch = channels_[{from, to}];
  if (!ch.recvs.empty()) {
    PendingRecv r = std::move(ch.recvs.front());
    ch.recvs.pop_front();
    states_[to].blocked_on.clear();
    complete_transfer(from, to, std::move(payload), r.slot, states_[from].clock,
                      r.ready, states_[from].iteration);
    ready_.push_back(to);  // the party that was already waiting resumes first
    ready_.push_back(from);
  } else {
    states_[from].blocked_on =
        "send to node " + std::to_string(to) + " pending";
    ch.sends.push_back(PendingSend{std::move(payload),
                                   states_[from].clock, states_[from].iteration});
  }
}

void Simulation::post_recv(topo::NodeId from, topo::NodeId to, Payload* slot) {
  Channel& ch = channels_[{from, to}];
  if (!ch.sends.empty()) {
    PendingSend s = std::move(ch.sends.front());
    ch.sends.pop_front();
    states_[from].blocked_on.clear();
    complete_transfer(from, to, std::move(s.payload), slot, s.ready,
                      states_[to].clock, s.iteration);
    ready_.push_back(from);
    ready_.push_back(to);
  } else {
    states_[to].blocked_on =
        "receive from node " + std::to_string(from) + " pending";
    ch.recvs.push_back(PendingRecv{slot, states_[to].clock});
  }
}

void Simulation::complete_transfer(topo::NodeId from, topo::NodeId to,
                                   Payload payload, Payload* slot,
                                   double send_ready, double recv_ready,
                                   int iteration) {
  const std::uint64_t elements = payload_elements(payload);
  const double duration = cost_.latency + cost_.per_element * static_cast<double>(elements);
  const double done = std::max(send_ready, recv_ready) + duration;
  states_[from].clock = done;
  states_[to].clock = done;
  states_[from].busy += duration;
  states_[to].busy += duration;

  const std::size_t index = log_.size();
  log_.push_back(MessageRecord{from, to, iteration, elements, send_ready,
                               recv_ready, done});
  events_[from].push_back(NodeEvent{NodeEvent::Kind::message, 0.0, index});
  events_[to].push_back(NodeEvent{NodeEvent::Kind::message, 0.0, index});
  *slot = std::move(payload);
}

void Simulation::compute(topo::NodeId id, std::uint64_t flops) {
  const double dt = cost_.flop * static_cast<double>(flops);
  states_[id].clock += dt;
  states_[id].busy += dt;
  states_[id].flops += flops;
  if (dt > 0.0 || flops > 0) {
    events_[id].push_back(NodeEvent{NodeEvent::Kind::compute, dt, 0});
  }
}

SimReport Simulation::run() {
  if (ran_) throw InvalidArgument("a simulation can only be run once");
  ran_ = true;

  for (std::size_t id = 0; id < tasks_.size(); ++id) ready_.push_back(id);

  while (!ready_.empty()) {
    const topo::NodeId id = ready_.front();
    ready_.pop_front();
    tasks_[id].resume();
    if (tasks_[id].done()) {
      states_[id].finished = true;
      if (std::exception_ptr ex = tasks_[id].exception()) {
        std::rethrow_exception(ex);
      }
    }
  }

  std::size_t finished = 0;
  for (const NodeState& s : states_) finished += s.finished ? 1 : 0;
  if (finished != states_.size()) {
    std::string detail = "simulation deadlocked; blocked nodes:";
    for (std::size_t id = 0; id < states_.size(); ++id) {
      if (states_[id].finished) continue;
      const topo::NodeInfo& n = layout_.node(id);
      detail += " [node " + std::to_string(id) + " level " +
                std::to_string(n.level) + " proc " + std::to_string(n.proc) +
                ": " + states_[id].blocked_on + "]";
    }
    throw DeadlockError(detail);
  }

  SimReport report;
  report.cost = cost_;
  for (const NodeState& s : states_) {
    report.makespan = std::max(report.makespan, s.clock);
  }
  report.nodes.reserve(states_.size());
  for (std::size_t id = 0; id < states_.size(); ++id) {
    const topo::NodeInfo& n = layout_.node(id);
    report.nodes.push_back(NodeReport{id, n.level, n.proc, states_[id].flops,
                                      states_[id].busy});
  }
  report.messages = log_;
  std::map<int, std::uint64_t> volume;
  for (const MessageRecord& m : log_) volume[m.iteration] += m.elements;
  report.per_iteration_volume.assign(volume.begin(), volume.end());
  report.node_events = events_;
  return report;
}

const dense::Matrix& Simulation::leaf_output(std::size_t leaf_proc) const {
  if (leaf_proc < 1 || leaf_proc > outputs_.size()) {
    throw OutOfRange("leaf proc out of range");
  }
  return outputs_[leaf_proc - 1];
}

}  // namespace ts::sim
