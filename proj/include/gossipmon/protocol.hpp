#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gossipmon/digest.hpp"
#include "gossipmon/ids.hpp"
#include "gossipmon/usage.hpp"

namespace gossipmon {

struct ProtocolParams {
  Tick t_gossip{1000};        // intra-group period
  double beta{0.1};           // fanout coefficient
  std::uint32_t f_max{5};     // fanout cap
  std::uint32_t k_group{5};   // intra rounds per inter-group round
  std::uint32_t k_cloud{5};   // inter-group rounds per inter-cloud round
  Tick staleness_window{10000};
  double epsilon_latency{0.1};  // ms, keeps selection weights finite
  // When false the inter-group and inter-cloud timers never fire.
  bool inter_tier{true};

  // Throws InvalidInput naming the offending field.
  void validate() const;
};

struct Peer {
  VmId id;
  double latency_ms{0.0};

  friend bool operator==(const Peer&, const Peer&) = default;
};

/// Latency-weighted sampling without replacement over a fixed peer list.
/// Each draw picks a remaining candidate with probability proportional to
/// 1 / (latency + epsilon).
class PeerSampler {
 public:
  PeerSampler() = default;
  PeerSampler(std::span<const Peer> peers, double epsilon_latency);

  // min(k, #candidates) distinct ids, where candidates are the peers not in
  // `exclude`. When every candidate is requested they are returned in peer
  // order without consuming randomness.
  std::vector<VmId> select(std::size_t k, Rng& rng, std::span<const VmId> exclude = {}) const;
  // Same draw, written into `out` (cleared first).
  void select_into(std::size_t k, Rng& rng, std::span<const VmId> exclude,
                   std::vector<VmId>& out) const;

  std::size_t size() const noexcept { return ids_.size(); }

 private:
  std::vector<VmId> ids_;
  std::vector<double> weights_;
  // Walker alias table over weights_, one cache-friendly entry per column.
  struct Column {
    double prob{1.0};
    VmId id;
    VmId alias;
  };
  std::vector<Column> columns_;
};

std::vector<VmId> select_targets(std::span<const Peer> peers, std::size_t k,
                                 double epsilon_latency, Rng& rng);

// Bounded set of message ids. Ids are (origin << 32) | counter; per origin
// the set remembers the highest counter and the kWindow counters below it.
// Anything older has been forgotten and reads as unseen.
class SeenSet {
 public:
  static constexpr std::uint32_t kWindow = 64;

  bool contains(MessageId id) const;
  void insert(MessageId id);
  std::size_t size() const noexcept;

  friend bool operator==(const SeenSet& a, const SeenSet& b);

 private:
  struct Entry {
    std::uint32_t key{0};  // origin + 1, 0 when empty
    std::uint32_t top{0};
    std::uint64_t mask{0};  // bit d: counter top - d was seen
  };

  const Entry* find(std::uint32_t origin) const;
  Entry& slot(std::uint32_t origin);

  std::vector<Entry> table_;
  std::size_t used_{0};
};

enum class MessageKind : std::uint8_t { intra_group, inter_group, inter_cloud };

std::string_view to_string(MessageKind kind);

// Which parts are present depends on the message kind:
//   intra_group: records + digests
//   inter_group: digest (group scope) + digests
//   inter_cloud: digest (region scope)
struct GossipPayload {
  std::optional<OriginRecordSet> records;
  std::optional<DigestSet> digests;
  std::optional<AggregateDigest> digest;

  friend bool operator==(const GossipPayload&, const GossipPayload&) = default;
};

struct GossipMessage {
  MessageId id{0};
  MessageKind kind{MessageKind::intra_group};
  VmId origin;  // node that initiated the rumor
  VmId sender;  // node that sent this copy
  int ttl{0};   // remaining relay hops
  int hops{0};  // relays so far
  std::shared_ptr<const GossipPayload> payload;

  friend bool operator==(const GossipMessage& a, const GossipMessage& b);
};

struct Outgoing {
  VmId target;
  GossipMessage message;
};

/// Everything one VM knows. Mutated only by the handlers below.
struct NodeState {
  VmId id;
  GroupId group;
  RegionId region;
  std::vector<Peer> peers;  // same group, sorted by id, never contains `id`
  std::map<GroupId, VmId> group_contacts;    // one per other group in the region
  std::map<RegionId, VmId> region_contacts;  // one per other region
  OriginRecordSet records;
  DigestSet digests;
  std::uint64_t leader_seq{0};
  std::uint64_t region_seq{0};
  std::uint32_t next_message{0};
  SeenSet seen;
  PeerSampler sampler;  // derived from peers

  std::size_t group_size() const noexcept { return peers.size() + 1; }
  void set_peers(std::vector<Peer> group_peers, double epsilon_latency);

  friend bool operator==(const NodeState& a, const NodeState& b);
};

NodeState make_node_state(VmId id, GroupId group, RegionId region, std::vector<Peer> peers,
                          std::map<GroupId, VmId> group_contacts,
                          std::map<RegionId, VmId> region_contacts, const ProtocolParams& params);

// clamp(ceil(beta * (group_size - 1)), 1, f_max), or 0 for a singleton group.
std::size_t fanout(std::size_t group_size, const ProtocolParams& params);

// Initial hop budget: max(1, ceil(log2(group_size))).
int gossip_ttl(std::size_t group_size);

// Records a new own sample stamped `now`. Throws InvalidInput for an invalid
// usage or a stamp older than the one already held.
void on_local_sample(NodeState& state, const ResourceUsage& usage, Tick now);

// Starts one rumor: fanout(group_size) copies sharing a message id, each
// carrying the full records and digests.
std::vector<Outgoing> on_timer_intra(NodeState& state, const ProtocolParams& params, Tick now,
                                     Rng& rng);

/// Merges the payload and returns the relayed copies, if any.
///
/// Intra-group copies are relayed with ttl - 1 to fresh targets only when the
/// hop budget is left, the merge changed the records, and the id is unseen.
/// Inter-group and inter-cloud messages are merged and never relayed.
/// A malformed message throws ProtocolViolation and leaves `state` unchanged.
std::vector<Outgoing> on_receive(NodeState& state, const GossipMessage& msg,
                                 const ProtocolParams& params, Tick now, Rng& rng);
// Same, appending the relayed copies to `out`.
void on_receive(NodeState& state, const GossipMessage& msg, const ProtocolParams& params,
                Tick now, Rng& rng, std::vector<Outgoing>& out);

// Smallest id. Throws InvalidInput on an empty view.
VmId elect_group_leader(std::span<const VmId> members);

bool is_group_leader(const NodeState& state);
// Leader of the smallest group id in the region.
bool is_region_leader(const NodeState& state);

bool is_inter_group_round(std::int64_t intra_round, const ProtocolParams& params);
bool is_inter_cloud_round(std::int64_t intra_round, const ProtocolParams& params);

// Leader only: one message with the group's digest per other group in the region.
std::vector<Outgoing> on_timer_inter_group(NodeState& state, const ProtocolParams& params, Tick now);

// Region leader only: one message with the region digest per other region.
std::vector<Outgoing> on_timer_inter_cloud(NodeState& state, const ProtocolParams& params, Tick now);

}  // namespace gossipmon
