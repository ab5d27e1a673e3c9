#include "circnav/comms.hpp"

#include "circnav/error.hpp"

namespace circnav {

std::string_view payload_kind(const Payload& p) {
  struct Visitor {
    std::string_view operator()(const DisplacementPayload&) const { return "displacement"; }
    std::string_view operator()(const ControlPayload&) const { return "control"; }
    std::string_view operator()(const NeighborPacket&) const { return "target"; }
    std::string_view operator()(const PhasePayload&) const { return "phase"; }
  };
  return std::visit(Visitor{}, p);
}

Topology Topology::full(const std::vector<int>& ids) {
  Topology t;
  for (int a : ids) {
    auto& s = t.adj_[a];
    for (int b : ids) {
      if (a != b) s.insert(b);
    }
  }
  return t;
}

Topology Topology::ring(const std::vector<int>& ids) {
  std::vector<std::pair<int, int>> edges;
  if (ids.size() >= 2) {
    for (std::size_t i = 0; i < ids.size(); ++i) edges.emplace_back(ids[i], ids[(i + 1) % ids.size()]);
  }
  return from_edges(ids, edges);
}

Topology Topology::from_edges(const std::vector<int>& ids, const std::vector<std::pair<int, int>>& edges) {
  Topology t;
  for (int a : ids) t.adj_[a];
  for (const auto& [a, b] : edges) {
    if (a == b) throw Error(ErrorKind::configuration, "topology: self-loop on agent " + std::to_string(a));
    if (!t.adj_.contains(a) || !t.adj_.contains(b)) {
      throw Error(ErrorKind::configuration, "topology: edge references unknown agent");
    }
    t.adj_[a].insert(b);
    t.adj_[b].insert(a);
  }
  return t;
}

const std::set<int>& Topology::neighbors(int id) const {
  static const std::set<int> empty;
  auto it = adj_.find(id);
  return it == adj_.end() ? empty : it->second;
}

bool Topology::connected(int a, int b) const { return neighbors(a).contains(b); }

std::vector<int> Topology::nodes() const {
  std::vector<int> out;
  for (const auto& [id, _] : adj_) out.push_back(id);
  return out;
}

Topology update_topology(const Topology& topology, const std::vector<int>& alive) {
  if (alive.empty()) throw Error(ErrorKind::precondition, "update_topology: no agent left alive");
  const std::set<int> keep(alive.begin(), alive.end());
  std::vector<std::pair<int, int>> edges;
  std::vector<int> ids;
  for (int a : topology.nodes()) {
    if (!keep.contains(a)) continue;
    ids.push_back(a);
    for (int b : topology.neighbors(a)) {
      if (a < b && keep.contains(b)) edges.emplace_back(a, b);
    }
  }
  return Topology::from_edges(ids, edges);
}

MessageBus::MessageBus(const CommsPolicy& policy, std::uint64_t seed, bool keep_trace)
    : policy_(policy), rng_(seed, streams::kComms), keep_trace_(keep_trace) {
  if (!(policy.loss_probability >= 0.0 && policy.loss_probability <= 1.0)) {
    throw Error(ErrorKind::configuration, "comms loss probability must lie in [0, 1]");
  }
  if (policy.delay_steps < 0) throw Error(ErrorKind::configuration, "comms delay must be >= 0");
}

Inboxes MessageBus::exchange(long step, const std::vector<Message>& outbox, const Topology& topology) {
  for (const auto& msg : outbox) {
    std::vector<int> recipients;
    if (msg.recipient == kBroadcast) {
      const auto& nb = topology.neighbors(msg.sender);
      recipients.assign(nb.begin(), nb.end());
    } else if (topology.connected(msg.sender, msg.recipient)) {
      recipients.push_back(msg.recipient);
    }
    for (int r : recipients) {
      ++emitted_;
      const bool drop = rng_.bernoulli(policy_.loss_probability);
      if (keep_trace_) trace_.push_back({step, msg.sender, r, payload_kind(msg.payload), !drop});
      if (drop) {
        ++dropped_;
        continue;
      }
      Message copy = msg;
      copy.recipient = r;
      pending_.emplace(step + policy_.delay_steps, std::move(copy));
    }
  }

  Inboxes inboxes;
  for (auto it = pending_.begin(); it != pending_.end() && it->first <= step;) {
    inboxes[it->second.recipient].push_back(std::move(it->second));
    ++delivered_;
    it = pending_.erase(it);
  }
  return inboxes;
}

std::uint64_t MessageBus::in_flight() const { return pending_.size(); }

}  // namespace circnav
