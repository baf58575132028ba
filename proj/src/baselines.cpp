#include "gossipmon/baselines.hpp"

#include "gossipmon/errors.hpp"

namespace gossipmon {

void CentralizedParams::validate() const {
  if (t_poll < 1) throw InvalidInput("t_poll must be >= 1");
  if (messages_per_poll != 1 && messages_per_poll != 2) {
    throw InvalidInput("messages_per_poll must be 1 or 2");
  }
}

std::uint64_t centralized_cycle(std::uint64_t n, const CentralizedParams& params) {
  return n * params.messages_per_poll;
}

std::vector<NodeState> make_flat_population(std::span<const FlatMember> members,
                                            const LatencyLookup& latency,
                                            const ProtocolParams& params) {
  std::vector<NodeState> nodes;
  nodes.reserve(members.size());
  for (const auto& self : members) {
    std::vector<Peer> peers;
    peers.reserve(members.size());
    for (const auto& other : members) {
      if (other.id != self.id) peers.push_back({other.id, latency(self.id, other.id)});
    }
    nodes.push_back(make_node_state(self.id, GroupId{0}, self.region, std::move(peers), {}, {}, params));
  }
  return nodes;
}

std::vector<FlatSend> flat_gossip_round(std::span<NodeState> nodes, const ProtocolParams& params,
                                        Tick now, Rng& rng) {
  std::vector<FlatSend> sends;
  for (auto& node : nodes) {
    for (auto& out : on_timer_intra(node, params, now, rng)) sends.push_back({node.id, std::move(out)});
  }
  return sends;
}

}  // namespace gossipmon
