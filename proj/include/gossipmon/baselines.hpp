#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "gossipmon/protocol.hpp"

namespace gossipmon {

// Periodic pull by a central collector.
struct CentralizedParams {
  Tick t_poll{1000};
  std::uint32_t messages_per_poll{2};  // request + response, or 1 for push-style counting

  void validate() const;
};

// Messages one collection cycle costs: n * messages_per_poll.
std::uint64_t centralized_cycle(std::uint64_t n, const CentralizedParams& params);

struct FlatMember {
  VmId id;
  RegionId region;
};

using LatencyLookup = std::function<double(VmId, VmId)>;

// One gossip group spanning the whole population, every other VM a peer and
// no contacts, so the inter-tier timers have nobody to talk to.
std::vector<NodeState> make_flat_population(std::span<const FlatMember> members,
                                            const LatencyLookup& latency,
                                            const ProtocolParams& params);

struct FlatSend {
  VmId from;
  Outgoing out;
};

// Fires the intra-group timer of every node, in order, at tick `now`, and
// returns the initiation messages. Relays are not included.
std::vector<FlatSend> flat_gossip_round(std::span<NodeState> nodes, const ProtocolParams& params,
                                        Tick now, Rng& rng);

}  // namespace gossipmon
