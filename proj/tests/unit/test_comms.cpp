#include "circnav/comms.hpp"
#include "circnav/error.hpp"

#include <gtest/gtest.h>

#include <map>
#include <string>
#include <vector>

using namespace circnav;

namespace {

std::vector<Message> broadcast_all(const std::vector<int>& ids, long step) {
  std::vector<Message> out;
  for (int id : ids) {
    out.push_back({id, kBroadcast, step, DisplacementPayload{}});
    out.push_back({id, kBroadcast, step, ControlPayload{}});
    out.push_back({id, kBroadcast, step, NeighborPacket{}});
    out.push_back({id, kBroadcast, step, PhasePayload{}});
  }
  return out;
}

}  // namespace

TEST(Topology, FullAndRing) {
  const Topology full = Topology::full({1, 2, 3, 4});
  EXPECT_EQ(full.neighbors(1).size(), 3u);
  const Topology ring = Topology::ring({1, 2, 3, 4});
  EXPECT_TRUE(ring.connected(1, 2));
  EXPECT_TRUE(ring.connected(4, 1));
  EXPECT_FALSE(ring.connected(1, 3));
}

TEST(Topology, EdgesAreUndirected) {
  const Topology t = Topology::from_edges({1, 2, 3}, {{1, 3}});
  EXPECT_TRUE(t.connected(3, 1));
  EXPECT_TRUE(t.neighbors(2).empty());
}

TEST(Topology, RemovingAgentKeepsSurvivorsConnected) {
  const Topology t = update_topology(Topology::full({1, 2, 3}), {1, 3});
  EXPECT_TRUE(t.connected(1, 3));
  EXPECT_EQ(t.nodes(), (std::vector<int>{1, 3}));
  EXPECT_TRUE(t.neighbors(1).count(2) == 0);
}

TEST(Topology, SingleAgentHasNoNeighbors) {
  EXPECT_TRUE(Topology::full({1}).neighbors(1).empty());
}

TEST(Topology, EmptyAliveSetEndsScenario) {
  try {
    update_topology(Topology::full({1, 2}), {});
    FAIL() << "expected precondition";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(MessageBus, FullTopologyDeliversEveryKindFromEachNeighbor) {
  const std::vector<int> ids{1, 2, 3};
  MessageBus bus(CommsPolicy{}, 1);
  const Inboxes in = bus.exchange(0, broadcast_all(ids, 0), Topology::full(ids));
  for (int id : ids) {
    std::map<std::string, int> counts;
    for (const auto& m : in.at(id)) {
      EXPECT_NE(m.sender, id);
      ++counts[std::string(payload_kind(m.payload))];
    }
    EXPECT_EQ(counts.size(), 4u);
    for (const auto& [kind, n] : counts) EXPECT_EQ(n, 2) << kind;
  }
}

TEST(MessageBus, TotalLossEmptiesInboxes) {
  const std::vector<int> ids{1, 2, 3};
  MessageBus bus(CommsPolicy{1.0, 0}, 1);
  const Inboxes in = bus.exchange(0, broadcast_all(ids, 0), Topology::full(ids));
  for (const auto& [id, msgs] : in) EXPECT_TRUE(msgs.empty());
  EXPECT_EQ(bus.dropped(), bus.emitted());
}

TEST(MessageBus, DelayedDeliveryKeepsStepTag) {
  const std::vector<int> ids{1, 2};
  MessageBus bus(CommsPolicy{0.0, 1}, 1);
  const Topology t = Topology::full(ids);
  const Inboxes first = bus.exchange(0, broadcast_all(ids, 0), t);
  for (const auto& [id, msgs] : first) EXPECT_TRUE(msgs.empty());
  const Inboxes second = bus.exchange(1, {}, t);
  ASSERT_FALSE(second.at(1).empty());
  for (const auto& m : second.at(1)) EXPECT_EQ(m.step, 0);
}

TEST(MessageBus, CountersConserveMessages) {
  const std::vector<int> ids{1, 2, 3, 4};
  MessageBus bus(CommsPolicy{0.3, 2}, 7, true);
  const Topology t = Topology::ring(ids);
  for (long k = 0; k < 50; ++k) {
    bus.exchange(k, broadcast_all(ids, k), t);
    EXPECT_EQ(bus.emitted(), bus.delivered() + bus.dropped() + bus.in_flight());
  }
  EXPECT_EQ(bus.trace().size(), bus.emitted());
}

TEST(MessageBus, SameSeedSameDrops) {
  const std::vector<int> ids{1, 2, 3};
  MessageBus a(CommsPolicy{0.5, 0}, 3), b(CommsPolicy{0.5, 0}, 3);
  const Topology t = Topology::full(ids);
  for (long k = 0; k < 30; ++k) {
    const Inboxes x = a.exchange(k, broadcast_all(ids, k), t);
    const Inboxes y = b.exchange(k, broadcast_all(ids, k), t);
    for (int id : ids) {
      const auto& xs = x.count(id) ? x.at(id) : std::vector<Message>{};
      const auto& ys = y.count(id) ? y.at(id) : std::vector<Message>{};
      ASSERT_EQ(xs.size(), ys.size());
      for (std::size_t i = 0; i < xs.size(); ++i) {
        EXPECT_EQ(xs[i].sender, ys[i].sender);
        EXPECT_EQ(payload_kind(xs[i].payload), payload_kind(ys[i].payload));
      }
    }
  }
}
