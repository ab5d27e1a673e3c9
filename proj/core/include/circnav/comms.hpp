#pragma once

#include "circnav/linalg.hpp"
#include "circnav/random.hpp"
#include "circnav/target_estimator.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string_view>
#include <variant>
#include <vector>

namespace circnav {

struct DisplacementPayload {
  Vec2 delta = Vec2::Zero();
  double psi = 0.0;
};

struct ControlPayload {
  Vec2 u = Vec2::Zero();  // control applied over [k-1, k]
};

struct PhasePayload {
  double theta = 0.0;
};

using Payload = std::variant<DisplacementPayload, ControlPayload, NeighborPacket, PhasePayload>;

std::string_view payload_kind(const Payload& p);

inline constexpr int kBroadcast = 0;

struct Message {
  int sender = 0;
  int recipient = kBroadcast;
  long step = 0;
  Payload payload;
};

/// Undirected neighbor sets over agent ids.
class Topology {
 public:
  Topology() = default;

  static Topology full(const std::vector<int>& ids);
  static Topology ring(const std::vector<int>& ids);
  static Topology from_edges(const std::vector<int>& ids, const std::vector<std::pair<int, int>>& edges);

  const std::set<int>& neighbors(int id) const;
  bool connected(int a, int b) const;
  std::vector<int> nodes() const;
  bool operator==(const Topology&) const = default;

 private:
  std::map<int, std::set<int>> adj_;
};

/// Removes dead agents and their edges. Throws precondition when no agent is
/// left (end of scenario).
Topology update_topology(const Topology& topology, const std::vector<int>& alive);

struct CommsPolicy {
  double loss_probability = 0.0;
  int delay_steps = 0;
};

struct TraceRecord {
  long step = 0;  // step at which the decision was made
  int sender = 0;
  int recipient = 0;
  std::string_view kind;
  bool delivered = false;  // false: dropped
};

using Inboxes = std::map<int, std::vector<Message>>;

/// Step-synchronous message bus. Broadcasts fan out along topology edges; each
/// resulting copy is dropped independently with the loss probability and
/// otherwise delivered delay_steps later.
class MessageBus {
 public:
  MessageBus(const CommsPolicy& policy, std::uint64_t seed, bool keep_trace = false);

  /// Sends this step's outbox and returns what is delivered at `step`.
  Inboxes exchange(long step, const std::vector<Message>& outbox, const Topology& topology);

  std::uint64_t emitted() const { return emitted_; }
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t dropped() const { return dropped_; }
  std::uint64_t in_flight() const;

  const std::vector<TraceRecord>& trace() const { return trace_; }

 private:
  CommsPolicy policy_;
  RngStream rng_;
  bool keep_trace_;
  std::multimap<long, Message> pending_;
  std::uint64_t emitted_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t dropped_ = 0;
  std::vector<TraceRecord> trace_;
};

}  // namespace circnav
