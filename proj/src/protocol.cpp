#include "gossipmon/protocol.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "gossipmon/errors.hpp"

namespace gossipmon {

namespace {

// Rejected draws allowed before switching to an exact linear scan.
constexpr int kMaxRejections = 32;

MessageId next_message_id(NodeState& state) {
  return (static_cast<MessageId>(state.id.value) << 32) | state.next_message++;
}

void validate_shape(const GossipMessage& msg) {
  if (msg.ttl < 0) throw ProtocolViolation("negative ttl on message " + std::to_string(msg.id));
  if (msg.hops < 0) throw ProtocolViolation("negative hop count on message " + std::to_string(msg.id));
  if (!msg.payload) throw ProtocolViolation("message " + std::to_string(msg.id) + " has no payload");
  const auto& p = *msg.payload;
  switch (msg.kind) {
    case MessageKind::intra_group:
      if (!p.records || !p.digests || p.digest) {
        throw ProtocolViolation("intra_group message must carry records and digests only");
      }
      break;
    case MessageKind::inter_group:
      if (!p.digest || !p.digests || p.records || !std::holds_alternative<GroupId>(p.digest->scope)) {
        throw ProtocolViolation("inter_group message must carry a group digest and digests");
      }
      break;
    case MessageKind::inter_cloud:
      if (!p.digest || p.digests || p.records || !std::holds_alternative<RegionId>(p.digest->scope)) {
        throw ProtocolViolation("inter_cloud message must carry exactly one region digest");
      }
      break;
  }
}

}  // namespace

void ProtocolParams::validate() const {
  if (t_gossip < 1) throw InvalidInput("t_gossip must be >= 1");
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidInput("beta must be in (0,1]");
  if (f_max < 1) throw InvalidInput("f_max must be >= 1");
  if (k_group < 1) throw InvalidInput("k_group must be >= 1");
  if (k_cloud < 1) throw InvalidInput("k_cloud must be >= 1");
  if (staleness_window < 1) throw InvalidInput("staleness_window must be >= 1");
  if (!(epsilon_latency > 0.0) || !std::isfinite(epsilon_latency)) {
    throw InvalidInput("epsilon_latency must be positive");
  }
}

PeerSampler::PeerSampler(std::span<const Peer> peers, double epsilon_latency) {
  const std::size_t n = peers.size();
  ids_.reserve(n);
  weights_.reserve(n);
  double total = 0.0;
  for (const auto& p : peers) {
    ids_.push_back(p.id);
    weights_.push_back(1.0 / (p.latency_ms + epsilon_latency));
    total += weights_.back();
  }

  columns_.resize(n);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small;
  std::vector<std::uint32_t> large;
  for (std::size_t i = 0; i < n; ++i) {
    columns_[i] = Column{1.0, ids_[i], ids_[i]};
    scaled[i] = weights_[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    columns_[s].prob = scaled[s];
    columns_[s].alias = ids_[l];
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers on either list are 1 up to rounding.
}

std::vector<VmId> PeerSampler::select(std::size_t k, Rng& rng,
                                      std::span<const VmId> exclude) const {
  std::vector<VmId> out;
  select_into(k, rng, exclude, out);
  return out;
}

void PeerSampler::select_into(std::size_t k, Rng& rng, std::span<const VmId> exclude,
                              std::vector<VmId>& out) const {
  out.clear();
  const std::size_t n = ids_.size();
  if (k == 0 || n == 0) return;

  // Excluded ids followed by the ones already picked. The list is short
  // (k <= f_max), so a linear scan beats any set.
  constexpr std::size_t kInline = 16;
  std::array<VmId, kInline> inline_taken;
  std::vector<VmId> heap_taken;
  VmId* taken = inline_taken.data();
  if (exclude.size() + k > kInline) {
    heap_taken.resize(exclude.size() + k);
    taken = heap_taken.data();
  }
  std::size_t taken_count = 0;
  const auto is_taken = [&](VmId id) {
    return std::find(taken, taken + taken_count, id) != taken + taken_count;
  };
  for (VmId x : exclude) {
    if (!is_taken(x)) taken[taken_count++] = x;
  }

  if (k + taken_count >= n) {
    std::size_t candidates = n;
    for (std::size_t i = 0; i < taken_count; ++i) {
      if (std::binary_search(ids_.begin(), ids_.end(), taken[i])) --candidates;
    }
    if (candidates == 0) return;
    if (k >= candidates) {
      out.reserve(candidates);
      for (VmId id : ids_) {
        if (!is_taken(id)) out.push_back(id);
      }
      return;
    }
  }

  // Drawing from the full distribution and rejecting taken entries samples
  // exactly from the distribution restricted to the remaining candidates.
  out.reserve(k);
  int rejections = 0;
  while (out.size() < k && rejections < kMaxRejections) {
    const double x = uniform01(rng) * static_cast<double>(n);
    const std::size_t column = std::min(static_cast<std::size_t>(x), n - 1);
    const auto& c = columns_[column];
    const VmId id = (x - static_cast<double>(column)) < c.prob ? c.id : c.alias;
    if (is_taken(id)) {
      ++rejections;
      continue;
    }
    taken[taken_count++] = id;
    out.push_back(id);
  }
  while (out.size() < k) {
    double remaining = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_taken(ids_[i])) remaining += weights_[i];
    }
    double x = uniform01(rng) * remaining;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (is_taken(ids_[i])) continue;
      pick = i;
      if (x < weights_[i]) break;
      x -= weights_[i];
    }
    taken[taken_count++] = ids_[pick];
    out.push_back(ids_[pick]);
  }
}

std::vector<VmId> select_targets(std::span<const Peer> peers, std::size_t k,
                                 double epsilon_latency, Rng& rng) {
  if (k == 0) return {};
  std::vector<Peer> sorted(peers.begin(), peers.end());
  std::sort(sorted.begin(), sorted.end(), [](const Peer& a, const Peer& b) { return a.id < b.id; });
  return PeerSampler(sorted, epsilon_latency).select(k, rng);
}

namespace {

std::size_t origin_hash(std::uint32_t origin) {
  return static_cast<std::size_t>(origin * 0x9e3779b97f4a7c15ULL >> 32);
}

}  // namespace

const SeenSet::Entry* SeenSet::find(std::uint32_t origin) const {
  if (table_.empty()) return nullptr;
  const std::size_t mask = table_.size() - 1;
  for (std::size_t i = origin_hash(origin) & mask;; i = (i + 1) & mask) {
    if (table_[i].key == 0) return nullptr;
    if (table_[i].key == origin + 1) return &table_[i];
  }
}

SeenSet::Entry& SeenSet::slot(std::uint32_t origin) {
  if (2 * (used_ + 1) > table_.size()) {
    std::vector<Entry> old = std::move(table_);
    table_.assign(std::max<std::size_t>(16, old.size() * 2), Entry{});
    used_ = 0;
    for (const auto& e : old) {
      if (e.key != 0) slot(e.key - 1) = e;
    }
  }
  const std::size_t mask = table_.size() - 1;
  std::size_t i = origin_hash(origin) & mask;
  while (table_[i].key != 0 && table_[i].key != origin + 1) i = (i + 1) & mask;
  if (table_[i].key == 0) {
    table_[i].key = origin + 1;
    ++used_;
  }
  return table_[i];
}

bool SeenSet::contains(MessageId id) const {
  const auto* e = find(static_cast<std::uint32_t>(id >> 32));
  if (e == nullptr) return false;
  const auto counter = static_cast<std::uint32_t>(id);
  if (counter > e->top) return false;
  const std::uint32_t d = e->top - counter;
  return d < kWindow && ((e->mask >> d) & 1U) != 0;
}

void SeenSet::insert(MessageId id) {
  const auto origin = static_cast<std::uint32_t>(id >> 32);
  const auto counter = static_cast<std::uint32_t>(id);
  const bool fresh = find(origin) == nullptr;
  Entry& e = slot(origin);
  if (fresh) {
    e.top = counter;
    e.mask = 1;
  } else if (counter > e.top) {
    const std::uint32_t shift = counter - e.top;
    e.mask = shift >= kWindow ? 0 : e.mask << shift;
    e.mask |= 1;
    e.top = counter;
  } else if (const std::uint32_t d = e.top - counter; d < kWindow) {
    e.mask |= std::uint64_t{1} << d;
  }
}

std::size_t SeenSet::size() const noexcept {
  std::size_t n = 0;
  for (const auto& e : table_) n += static_cast<std::size_t>(std::popcount(e.mask));
  return n;
}

bool operator==(const SeenSet& a, const SeenSet& b) {
  if (a.used_ != b.used_) return false;
  for (const auto& e : a.table_) {
    if (e.key == 0) continue;
    const auto* o = b.find(e.key - 1);
    if (o == nullptr || o->top != e.top || o->mask != e.mask) return false;
  }
  return true;
}

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::intra_group: return "intra_group";
    case MessageKind::inter_group: return "inter_group";
    case MessageKind::inter_cloud: return "inter_cloud";
  }
  return "unknown";
}

bool operator==(const GossipMessage& a, const GossipMessage& b) {
  if (a.id != b.id || a.kind != b.kind || a.origin != b.origin || a.sender != b.sender ||
      a.ttl != b.ttl || a.hops != b.hops) {
    return false;
  }
  if (a.payload == b.payload) return true;
  return a.payload && b.payload && *a.payload == *b.payload;
}

void NodeState::set_peers(std::vector<Peer> group_peers, double epsilon_latency) {
  std::sort(group_peers.begin(), group_peers.end(),
            [](const Peer& a, const Peer& b) { return a.id < b.id; });
  std::erase_if(group_peers, [this](const Peer& p) { return p.id == id; });
  peers = std::move(group_peers);
  sampler = PeerSampler(peers, epsilon_latency);
}

bool operator==(const NodeState& a, const NodeState& b) {
  return a.id == b.id && a.group == b.group && a.region == b.region && a.peers == b.peers &&
         a.group_contacts == b.group_contacts && a.region_contacts == b.region_contacts &&
         a.records == b.records && a.digests == b.digests && a.leader_seq == b.leader_seq &&
         a.region_seq == b.region_seq && a.next_message == b.next_message && a.seen == b.seen;
}

NodeState make_node_state(VmId id, GroupId group, RegionId region, std::vector<Peer> peers,
                          std::map<GroupId, VmId> group_contacts,
                          std::map<RegionId, VmId> region_contacts, const ProtocolParams& params) {
  NodeState s;
  s.id = id;
  s.group = group;
  s.region = region;
  s.group_contacts = std::move(group_contacts);
  s.region_contacts = std::move(region_contacts);
  s.set_peers(std::move(peers), params.epsilon_latency);
  return s;
}

std::size_t fanout(std::size_t group_size, const ProtocolParams& params) {
  if (group_size <= 1) return 0;
  const double raw = std::ceil(params.beta * static_cast<double>(group_size - 1));
  return std::clamp<std::size_t>(static_cast<std::size_t>(raw), 1, params.f_max);
}

int gossip_ttl(std::size_t group_size) {
  if (group_size <= 2) return 1;
  // ceil(log2(n)) == bit width of n - 1
  return static_cast<int>(std::bit_width(group_size - 1));
}

void on_local_sample(NodeState& state, const ResourceUsage& usage, Tick now) {
  validate_usage(usage);
  if (const auto* own = state.records.find(state.id); own && own->stamp > now) {
    throw InvalidInput("local sample is older than the held own record");
  }
  state.records.upsert(UsageRecord{state.id, now, usage});
}

std::vector<Outgoing> on_timer_intra(NodeState& state, const ProtocolParams& params, Tick now,
                                     Rng& rng) {
  (void)now;
  const std::size_t k = fanout(state.group_size(), params);
  if (k == 0) return {};
  const auto targets = state.sampler.select(k, rng);

  GossipMessage msg;
  msg.id = next_message_id(state);
  msg.kind = MessageKind::intra_group;
  msg.origin = state.id;
  msg.sender = state.id;
  msg.ttl = gossip_ttl(state.group_size());
  msg.payload = std::make_shared<const GossipPayload>(
      GossipPayload{.records = state.records, .digests = state.digests});
  state.seen.insert(msg.id);

  std::vector<Outgoing> out;
  out.reserve(targets.size());
  for (VmId t : targets) out.push_back({t, msg});
  return out;
}

std::vector<Outgoing> on_receive(NodeState& state, const GossipMessage& msg,
                                 const ProtocolParams& params, Tick now, Rng& rng) {
  std::vector<Outgoing> out;
  on_receive(state, msg, params, now, rng, out);
  return out;
}

void on_receive(NodeState& state, const GossipMessage& msg, const ProtocolParams& params,
                Tick now, Rng& rng, std::vector<Outgoing>& out) {
  (void)now;
  validate_shape(msg);
  const auto& payload = *msg.payload;

  if (msg.kind != MessageKind::intra_group) {
    state.digests.merge(*payload.digest);
    if (payload.digests) state.digests.merge_from(*payload.digests);
    state.seen.insert(msg.id);
    return;
  }

  // A seen id has already been merged into this (monotone) state, so the
  // merge would be a no-op.
  if (state.seen.contains(msg.id)) return;

  const bool learned = state.records.merge_from(*payload.records);
  state.digests.merge_from(*payload.digests);
  state.seen.insert(msg.id);
  if (msg.ttl == 0 || !learned) return;

  thread_local std::vector<VmId> targets;
  const VmId exclude[] = {msg.sender, msg.origin};
  state.sampler.select_into(fanout(state.group_size(), params), rng, exclude, targets);
  GossipMessage copy = msg;
  copy.sender = state.id;
  copy.ttl = msg.ttl - 1;
  copy.hops = msg.hops + 1;
  for (VmId t : targets) out.push_back({t, copy});
}

VmId elect_group_leader(std::span<const VmId> members) {
  if (members.empty()) throw InvalidInput("leader election over an empty membership view");
  return *std::min_element(members.begin(), members.end());
}

bool is_group_leader(const NodeState& state) {
  return state.peers.empty() || state.id < state.peers.front().id;
}

bool is_region_leader(const NodeState& state) {
  return is_group_leader(state) &&
         (state.group_contacts.empty() || state.group < state.group_contacts.begin()->first);
}

bool is_inter_group_round(std::int64_t intra_round, const ProtocolParams& params) {
  return params.inter_tier && intra_round >= 0 && intra_round % params.k_group == 0;
}

bool is_inter_cloud_round(std::int64_t intra_round, const ProtocolParams& params) {
  return is_inter_group_round(intra_round, params) &&
         (intra_round / params.k_group) % params.k_cloud == 0;
}

std::vector<Outgoing> on_timer_inter_group(NodeState& state, const ProtocolParams& params,
                                           Tick now) {
  if (!is_group_leader(state)) return {};
  std::uint64_t base = state.leader_seq;
  if (const auto* held = state.digests.group(state.group)) base = std::max(base, held->seq);
  auto digest = compute_aggregate(state.records, now, params.staleness_window, state.group, base + 1);
  if (!digest) return {};
  state.leader_seq = base + 1;
  state.digests.merge(*digest);

  auto payload = std::make_shared<const GossipPayload>(
      GossipPayload{.digests = state.digests, .digest = *digest});
  std::vector<Outgoing> out;
  out.reserve(state.group_contacts.size());
  for (const auto& [group, contact] : state.group_contacts) {
    GossipMessage msg;
    msg.id = next_message_id(state);
    msg.kind = MessageKind::inter_group;
    msg.origin = state.id;
    msg.sender = state.id;
    msg.payload = payload;
    out.push_back({contact, std::move(msg)});
  }
  return out;
}

std::vector<Outgoing> on_timer_inter_cloud(NodeState& state, const ProtocolParams& params,
                                           Tick now) {
  (void)params;
  (void)now;
  if (!is_region_leader(state)) return {};
  std::vector<AggregateDigest> held;
  if (const auto* own = state.digests.group(state.group)) held.push_back(*own);
  for (const auto& [group, contact] : state.group_contacts) {
    if (const auto* d = state.digests.group(group)) held.push_back(*d);
  }
  std::uint64_t base = state.region_seq;
  if (const auto* prev = state.digests.region(state.region)) base = std::max(base, prev->seq);
  auto digest = combine_digests(held, state.region, base + 1);
  if (!digest) return {};
  state.region_seq = base + 1;
  state.digests.merge(*digest);

  auto payload = std::make_shared<const GossipPayload>(GossipPayload{.digest = *digest});
  std::vector<Outgoing> out;
  out.reserve(state.region_contacts.size());
  for (const auto& [region, contact] : state.region_contacts) {
    GossipMessage msg;
    msg.id = next_message_id(state);
    msg.kind = MessageKind::inter_cloud;
    msg.origin = state.id;
    msg.sender = state.id;
    msg.payload = payload;
    out.push_back({contact, std::move(msg)});
  }
  return out;
}

}  // namespace gossipmon
