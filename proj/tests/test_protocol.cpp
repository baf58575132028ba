#include <doctest.h>

#include <cmath>
#include <deque>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "gossipmon/errors.hpp"
#include "gossipmon/protocol.hpp"

using namespace gossipmon;

namespace {

ResourceUsage usage(double cpu) { return ResourceUsage{cpu, 20, 30, 400}; }

std::vector<Peer> peers_of(std::uint32_t self, std::uint32_t n, std::uint32_t first = 0) {
  std::vector<Peer> out;
  for (std::uint32_t i = first; i < first + n; ++i) {
    if (i != self) out.push_back({VmId{i}, 1.0});
  }
  return out;
}

std::vector<NodeState> make_group(std::uint32_t n, const ProtocolParams& p) {
  std::vector<NodeState> nodes;
  for (std::uint32_t i = 0; i < n; ++i) {
    nodes.push_back(make_node_state(VmId{i}, GroupId{0}, RegionId{0}, peers_of(i, n), {}, {}, p));
  }
  return nodes;
}

GossipMessage intra(const NodeState& from, MessageId id, int ttl, int hops = 0) {
  GossipMessage m;
  m.id = id;
  m.kind = MessageKind::intra_group;
  m.origin = from.id;
  m.sender = from.id;
  m.ttl = ttl;
  m.hops = hops;
  m.payload = std::make_shared<const GossipPayload>(
      GossipPayload{.records = from.records, .digests = from.digests});
  return m;
}

struct Delivery {
  VmId to;
  GossipMessage msg;
};

// One handler input: a timer firing (no message) or a delivery.
struct Event {
  VmId node;
  Tick now{0};
  std::optional<GossipMessage> msg;
};

// Lossless synchronous rounds: every node samples and fires, then all
// messages are delivered in FIFO order until none are left.
void gossip_round(std::vector<NodeState>& nodes, const ProtocolParams& p, Tick now, Rng& rng,
                  std::vector<Event>* log = nullptr) {
  std::deque<Delivery> q;
  for (auto& n : nodes) {
    if (log) log->push_back({n.id, now, std::nullopt});
    on_local_sample(n, usage(static_cast<double>(n.id.value)), now);
    for (auto& o : on_timer_intra(n, p, now, rng)) q.push_back({o.target, o.message});
  }
  while (!q.empty()) {
    auto d = q.front();
    q.pop_front();
    if (log) log->push_back({d.to, now, d.msg});
    for (auto& o : on_receive(nodes[d.to.value], d.msg, p, now, rng)) q.push_back({o.target, o.message});
  }
}

bool all_cover(const std::vector<NodeState>& nodes) {
  for (const auto& n : nodes) {
    if (n.records.size() != nodes.size()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("fanout") {
  ProtocolParams p;
  CHECK(fanout(1, p) == 0);
  CHECK(fanout(2, p) == 1);
  CHECK(fanout(21, p) == 2);
  CHECK(fanout(22, p) == 3);
  CHECK(fanout(200, p) == 5);
  p.f_max = 3;
  CHECK(fanout(200, p) == 3);
}

TEST_CASE("ttl") {
  CHECK(gossip_ttl(1) == 1);
  CHECK(gossip_ttl(2) == 1);
  CHECK(gossip_ttl(3) == 2);
  CHECK(gossip_ttl(16) == 4);
  CHECK(gossip_ttl(17) == 5);
  CHECK(gossip_ttl(21) == 5);
  CHECK(gossip_ttl(200) == 8);
}

TEST_CASE("parameter validation") {
  ProtocolParams p;
  CHECK_NOTHROW(p.validate());
  p.beta = 0;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  p = {};
  p.t_gossip = 0;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  p = {};
  p.k_cloud = 0;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
}

TEST_CASE("target selection basics") {
  Rng rng(1);
  const std::vector<Peer> peers{{VmId{1}, 1.0}, {VmId{2}, 5.0}, {VmId{3}, 50.0}};
  CHECK(select_targets(peers, 0, 0.1, rng).empty());
  const auto all = select_targets(peers, 5, 0.1, rng);
  CHECK(std::set<VmId>(all.begin(), all.end()) == std::set<VmId>{VmId{1}, VmId{2}, VmId{3}});
  for (int i = 0; i < 200; ++i) {
    const auto two = select_targets(peers, 2, 0.1, rng);
    REQUIRE(two.size() == 2);
    REQUIRE(two[0] != two[1]);
  }
}

TEST_CASE("sampler honours exclusions") {
  Rng rng(2);
  std::vector<Peer> peers;
  for (std::uint32_t i = 1; i <= 6; ++i) peers.push_back({VmId{i}, static_cast<double>(i)});
  PeerSampler s(peers, 0.1);
  const VmId ex[] = {VmId{1}, VmId{2}, VmId{99}};
  for (int i = 0; i < 500; ++i) {
    const auto got = s.select(3, rng, ex);
    REQUIRE(got.size() == 3);
    REQUIRE(std::set<VmId>(got.begin(), got.end()).size() == 3);
    for (VmId v : got) REQUIRE((v != VmId{1} && v != VmId{2}));
  }
  // exhausting the candidates returns them in peer order
  CHECK(s.select(10, rng, ex) == std::vector<VmId>{VmId{3}, VmId{4}, VmId{5}, VmId{6}});
  const VmId every[] = {VmId{1}, VmId{2}, VmId{3}, VmId{4}, VmId{5}, VmId{6}};
  CHECK(s.select(2, rng, every).empty());
}

TEST_CASE("latency-weighted selection frequency") {
  // weights 1/(0.9+0.1) = 1 and 1/(99.9+0.1) = 0.01
  const std::vector<Peer> peers{{VmId{1}, 0.9}, {VmId{2}, 99.9}};
  Rng rng(2024);
  const int n = 10000;
  int low = 0;
  for (int i = 0; i < n; ++i) {
    if (select_targets(peers, 1, 0.1, rng).front() == VmId{1}) ++low;
  }
  const double p = 1.0 / 1.01;
  const double mean = n * p;
  const double sigma = std::sqrt(n * p * (1 - p));
  CHECK(std::abs(low - mean) <= 3 * sigma);
}

TEST_CASE("seen set window") {
  SeenSet s;
  const MessageId a0 = (MessageId{3} << 32) | 0;
  const MessageId a5 = (MessageId{3} << 32) | 5;
  const MessageId b0 = (MessageId{4} << 32) | 0;
  CHECK_FALSE(s.contains(a0));
  s.insert(a0);
  s.insert(a5);
  CHECK(s.contains(a0));
  CHECK(s.contains(a5));
  CHECK_FALSE(s.contains(b0));
  CHECK_FALSE(s.contains((MessageId{3} << 32) | 2));
  CHECK(s.size() == 2);
  // a counter a full window ahead forgets everything older
  s.insert((MessageId{3} << 32) | (5 + SeenSet::kWindow));
  CHECK_FALSE(s.contains(a5));
  CHECK(s.contains((MessageId{3} << 32) | (5 + SeenSet::kWindow)));
  for (std::uint32_t o = 0; o < 300; ++o) s.insert(MessageId{o} << 32);
  CHECK(s.contains(MessageId{299} << 32));
  CHECK(s.contains(b0));
  SeenSet t;
  t.insert(a0);
  SeenSet u;
  u.insert(a0);
  CHECK(t == u);
  u.insert(b0);
  CHECK_FALSE(t == u);
}

TEST_CASE("local samples") {
  ProtocolParams p;
  auto n = make_node_state(VmId{5}, GroupId{0}, RegionId{0}, {}, {}, {}, p);
  on_local_sample(n, usage(40), 10);
  REQUIRE(n.records.size() == 1);
  CHECK(n.records.find(VmId{5})->usage.cpu_pct == 40);
  on_local_sample(n, usage(41), 20);
  CHECK(n.records.find(VmId{5})->stamp == 20);
  CHECK_THROWS_AS(on_local_sample(n, usage(41), 19), InvalidInput);
  CHECK_THROWS_AS(on_local_sample(n, usage(140), 30), InvalidInput);

  // a peer holding an older copy of our record cannot roll it back
  auto peer = make_node_state(VmId{6}, GroupId{0}, RegionId{0}, {}, {}, {}, p);
  peer.records.upsert(UsageRecord{VmId{5}, 10, usage(40)});
  Rng rng(1);
  on_receive(n, intra(peer, 99, 1), p, 21, rng);
  CHECK(n.records.find(VmId{5})->stamp == 20);
  CHECK(n.records.find(VmId{5})->usage.cpu_pct == 41);
}

TEST_CASE("intra timer") {
  ProtocolParams p;
  Rng rng(3);
  auto single = make_node_state(VmId{0}, GroupId{0}, RegionId{0}, {}, {}, {}, p);
  on_local_sample(single, usage(1), 0);
  CHECK(on_timer_intra(single, p, 0, rng).empty());

  auto group = make_group(21, p);
  on_local_sample(group[0], usage(1), 0);
  const auto out = on_timer_intra(group[0], p, 0, rng);
  REQUIRE(out.size() == 2);
  CHECK(out[0].message.ttl == 5);
  CHECK(out[0].message.id == out[1].message.id);
  CHECK(out[0].target != out[1].target);
  CHECK(out[0].message.payload->records->size() == 1);
  CHECK(group[0].seen.contains(out[0].message.id));
  const auto again = on_timer_intra(group[0], p, 1000, rng);
  CHECK(again[0].message.id != out[0].message.id);
}

TEST_CASE("group of 16 converges within 4 rounds") {
  ProtocolParams p;
  int ok = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Rng rng(1000 + trial);
    auto nodes = make_group(16, p);
    for (int r = 0; r < 4 && !all_cover(nodes); ++r) gossip_round(nodes, p, r * p.t_gossip, rng);
    if (all_cover(nodes)) ++ok;
  }
  CHECK(ok >= 95);
}

TEST_CASE("duplicate delivery is ignored") {
  ProtocolParams p;
  Rng rng(4);
  auto nodes = make_group(8, p);
  on_local_sample(nodes[0], usage(1), 0);
  const auto m = intra(nodes[0], 77, 3);
  const auto first = on_receive(nodes[1], m, p, 1, rng);
  CHECK_FALSE(first.empty());
  const auto before = nodes[1];
  const auto second = on_receive(nodes[1], m, p, 2, rng);
  CHECK(second.empty());
  CHECK(nodes[1] == before);
}

TEST_CASE("exhausted hop budget still merges") {
  ProtocolParams p;
  Rng rng(5);
  auto nodes = make_group(8, p);
  on_local_sample(nodes[0], usage(1), 0);
  const auto out = on_receive(nodes[1], intra(nodes[0], 1, 0), p, 1, rng);
  CHECK(out.empty());
  CHECK(nodes[1].records.contains(VmId{0}));
}

TEST_CASE("nothing new means no relay") {
  ProtocolParams p;
  Rng rng(6);
  auto nodes = make_group(8, p);
  on_local_sample(nodes[0], usage(1), 0);
  on_receive(nodes[1], intra(nodes[0], 1, 3), p, 1, rng);
  // a different rumor with the same content
  CHECK(on_receive(nodes[1], intra(nodes[0], 2, 3), p, 2, rng).empty());
}

TEST_CASE("two-hop relay a to b to c") {
  ProtocolParams p;
  Rng rng(7);
  auto nodes = make_group(3, p);  // fanout 1, ttl 2
  auto& a = nodes[0];
  auto& b = nodes[1];
  auto& c = nodes[2];
  on_local_sample(a, usage(12), 0);
  const auto m = intra(a, 5, gossip_ttl(3));
  REQUIRE(m.ttl == 2);

  const auto from_b = on_receive(b, m, p, 1, rng);
  REQUIRE(from_b.size() == 1);
  CHECK(from_b[0].target == c.id);
  CHECK(from_b[0].message.ttl == 1);
  CHECK(from_b[0].message.hops == 1);
  CHECK(from_b[0].message.sender == b.id);
  CHECK(from_b[0].message.origin == a.id);
  CHECK(from_b[0].message.id == m.id);

  // c may not send back to b (sender) or a (origin)
  const auto from_c = on_receive(c, from_b[0].message, p, 2, rng);
  CHECK(from_c.empty());
  REQUIRE(c.records.contains(a.id));
  CHECK(c.records.find(a.id)->usage.cpu_pct == 12);
}

TEST_CASE("malformed messages leave state unchanged") {
  ProtocolParams p;
  Rng rng(8);
  auto nodes = make_group(4, p);
  on_local_sample(nodes[0], usage(1), 0);
  const auto before = nodes[1];

  auto neg = intra(nodes[0], 1, -1);
  CHECK_THROWS_AS(on_receive(nodes[1], neg, p, 1, rng), ProtocolViolation);

  auto empty = intra(nodes[0], 2, 1);
  empty.payload = nullptr;
  CHECK_THROWS_AS(on_receive(nodes[1], empty, p, 1, rng), ProtocolViolation);

  auto extra = intra(nodes[0], 3, 1);
  auto pl = *extra.payload;
  pl.digest = AggregateDigest{.scope = GroupId{0}, .seq = 1, .contributing = 1};
  extra.payload = std::make_shared<const GossipPayload>(pl);
  CHECK_THROWS_AS(on_receive(nodes[1], extra, p, 1, rng), ProtocolViolation);

  GossipMessage wrong_scope;
  wrong_scope.id = 4;
  wrong_scope.kind = MessageKind::inter_group;
  wrong_scope.payload = std::make_shared<const GossipPayload>(GossipPayload{
      .digests = DigestSet{}, .digest = AggregateDigest{.scope = RegionId{0}, .seq = 1, .contributing = 1}});
  CHECK_THROWS_AS(on_receive(nodes[1], wrong_scope, p, 1, rng), ProtocolViolation);

  GossipMessage cloud_extra;
  cloud_extra.id = 5;
  cloud_extra.kind = MessageKind::inter_cloud;
  cloud_extra.payload = std::make_shared<const GossipPayload>(GossipPayload{
      .digests = DigestSet{}, .digest = AggregateDigest{.scope = RegionId{0}, .seq = 1, .contributing = 1}});
  CHECK_THROWS_AS(on_receive(nodes[1], cloud_extra, p, 1, rng), ProtocolViolation);

  CHECK(nodes[1] == before);
}

TEST_CASE("leader election") {
  const VmId one[] = {VmId{7}};
  CHECK(elect_group_leader(one) == VmId{7});
  const VmId three[] = {VmId{3}, VmId{9}, VmId{1}};
  CHECK(elect_group_leader(three) == VmId{1});
  const VmId two[] = {VmId{3}, VmId{9}};
  CHECK(elect_group_leader(two) == VmId{3});
  CHECK_THROWS_AS(elect_group_leader({}), InvalidInput);

  ProtocolParams p;
  const auto nodes = make_group(6, p);
  int leaders = 0;
  for (const auto& n : nodes) leaders += is_group_leader(n) ? 1 : 0;
  CHECK(leaders == 1);
  CHECK(is_group_leader(nodes[0]));
}

TEST_CASE("inter-tier schedule") {
  ProtocolParams p;
  CHECK(is_inter_group_round(0, p));
  CHECK_FALSE(is_inter_group_round(3, p));
  CHECK(is_inter_group_round(10, p));
  CHECK(is_inter_cloud_round(0, p));
  CHECK_FALSE(is_inter_cloud_round(5, p));
  CHECK(is_inter_cloud_round(25, p));
  p.inter_tier = false;
  CHECK_FALSE(is_inter_group_round(0, p));
  CHECK_FALSE(is_inter_cloud_round(0, p));
}

TEST_CASE("inter-group gossip from the group leader") {
  ProtocolParams p;
  // Region with groups 0..3; node 0 leads group 0 and knows one contact per other group.
  const std::map<GroupId, VmId> contacts{{GroupId{1}, VmId{10}}, {GroupId{2}, VmId{20}}, {GroupId{3}, VmId{30}}};
  auto leader = make_node_state(VmId{0}, GroupId{0}, RegionId{0}, peers_of(0, 4), contacts, {}, p);
  auto member = make_node_state(VmId{2}, GroupId{0}, RegionId{0}, peers_of(2, 4), contacts, {}, p);
  on_local_sample(leader, usage(10), 0);
  on_local_sample(member, usage(20), 0);

  CHECK(on_timer_inter_group(member, p, 0).empty());

  const auto out = on_timer_inter_group(leader, p, 0);
  REQUIRE(out.size() == 3);
  std::set<VmId> targets;
  for (const auto& o : out) {
    targets.insert(o.target);
    CHECK(o.message.kind == MessageKind::inter_group);
    CHECK(std::get<GroupId>(o.message.payload->digest->scope) == GroupId{0});
  }
  CHECK(targets == std::set<VmId>{VmId{10}, VmId{20}, VmId{30}});
  const auto seq1 = out[0].message.payload->digest->seq;
  CHECK(leader.digests.group(GroupId{0})->seq == seq1);

  const auto out2 = on_timer_inter_group(leader, p, 1000);
  CHECK(out2[0].message.payload->digest->seq > seq1);

  // receivers merge and never relay
  Rng rng(9);
  auto far = make_node_state(VmId{10}, GroupId{1}, RegionId{0}, {}, {}, {}, p);
  CHECK(on_receive(far, out2[0].message, p, 1001, rng).empty());
  CHECK(far.digests.group(GroupId{0})->seq == out2[0].message.payload->digest->seq);

  // nothing fresh, nothing sent
  auto idle = make_node_state(VmId{0}, GroupId{0}, RegionId{0}, {}, contacts, {}, p);
  CHECK(on_timer_inter_group(idle, p, 0).empty());
}

TEST_CASE("inter-cloud gossip from the region leader") {
  ProtocolParams p;
  const std::map<RegionId, VmId> regions{{RegionId{1}, VmId{100}}, {RegionId{2}, VmId{200}}};
  const std::map<GroupId, VmId> groups{{GroupId{1}, VmId{10}}, {GroupId{2}, VmId{20}}};
  auto leader = make_node_state(VmId{0}, GroupId{0}, RegionId{0}, {}, groups, regions, p);
  on_local_sample(leader, usage(10), 0);
  on_timer_inter_group(leader, p, 0);

  // knows group 1 but not group 2
  AggregateDigest g1{.scope = GroupId{1}, .seq = 3, .contributing = 4};
  g1.cpu = {80, 10, 30};
  leader.digests.merge(g1);

  const auto out = on_timer_inter_cloud(leader, p, 0);
  REQUIRE(out.size() == 2);
  const auto& d = *out[0].message.payload->digest;
  CHECK(std::get<RegionId>(d.scope) == RegionId{0});
  CHECK(d.contributing == 5);
  CHECK(d.cpu.sum == 90);
  CHECK_FALSE(out[0].message.payload->digests.has_value());
  const auto again = on_timer_inter_cloud(leader, p, 1000);
  CHECK(again[0].message.payload->digest->seq > d.seq);

  // leader of group 1 is not the region leader
  auto other = make_node_state(VmId{10}, GroupId{1}, RegionId{0}, {}, {{GroupId{0}, VmId{0}}}, regions, p);
  on_local_sample(other, usage(1), 0);
  on_timer_inter_group(other, p, 0);
  CHECK_FALSE(is_region_leader(other));
  CHECK(on_timer_inter_cloud(other, p, 0).empty());
}

TEST_CASE("replaying the recorded inputs reproduces the final state") {
  ProtocolParams p;
  std::vector<Event> log;
  Rng rng(42);
  auto nodes = make_group(10, p);
  for (int r = 0; r < 3; ++r) gossip_round(nodes, p, r * p.t_gossip, rng, &log);

  Rng rng2(42);
  auto again = make_group(10, p);
  for (int r = 0; r < 3; ++r) gossip_round(again, p, r * p.t_gossip, rng2);
  CHECK(nodes == again);

  // the handlers see nothing but their inputs, so the flat log is enough
  Rng rng3(42);
  auto replay = make_group(10, p);
  for (const auto& e : log) {
    auto& n = replay[e.node.value];
    if (e.msg) {
      on_receive(n, *e.msg, p, e.now, rng3);
    } else {
      on_local_sample(n, usage(static_cast<double>(n.id.value)), e.now);
      on_timer_intra(n, p, e.now, rng3);
    }
  }
  CHECK(replay == nodes);
}

TEST_CASE("uniform01 matches the standard canonical draw") {
  Rng a(77);
  Rng b(77);
  for (int i = 0; i < 100000; ++i) {
    REQUIRE(uniform01(a) == std::generate_canonical<double, 53>(b));
  }
  // the top outputs round up to 1.0 and must be pulled back below it
  CHECK(static_cast<double>(~std::uint64_t{0}) * 0x1p-64 == 1.0);
}
