#include "gossipmon/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "gossipmon/baselines.hpp"
#include "gossipmon/errors.hpp"

namespace gossipmon {

namespace {

TraceMessageKind trace_kind(MessageKind kind) {
  switch (kind) {
    case MessageKind::intra_group: return TraceMessageKind::intra_group;
    case MessageKind::inter_group: return TraceMessageKind::inter_group;
    case MessageKind::inter_cloud: return TraceMessageKind::inter_cloud;
  }
  return TraceMessageKind::none;
}

TierCounts& tier(RoundCounts& counts, MessageKind kind) {
  switch (kind) {
    case MessageKind::intra_group: return counts.intra_group;
    case MessageKind::inter_group: return counts.inter_group;
    case MessageKind::inter_cloud: return counts.inter_cloud;
  }
  return counts.intra_group;
}

struct Event {
  enum class Type : std::uint8_t { timer, deliver };

  Type type{Type::timer};
  VmId node;
  GossipMessage message;  // deliver only
};

// Ring of per-tick buckets. Every event lands strictly in the future and less
// than one ring length ahead, so a bucket only ever holds events of one tick,
// appended in scheduling order.
class CalendarQueue {
 public:
  explicit CalendarQueue(Tick horizon)
      : buckets_(std::bit_ceil(static_cast<std::uint64_t>(horizon) + 1)),
        mask_(buckets_.size() - 1) {}

  void push(Tick now, Tick at, Event ev) {
    if (at <= now && !(now == 0 && at == 0)) throw std::logic_error("event scheduled in the past");
    if (at - now >= static_cast<Tick>(buckets_.size())) throw std::logic_error("event beyond horizon");
    buckets_[static_cast<std::size_t>(at) & mask_].push_back(std::move(ev));
  }

  std::vector<Event> take(Tick at) {
    std::vector<Event> out;
    out.swap(buckets_[static_cast<std::size_t>(at) & mask_]);
    return out;
  }

  void recycle(Tick at, std::vector<Event>&& storage) {
    auto& slot = buckets_[static_cast<std::size_t>(at) & mask_];
    if (slot.empty()) {
      storage.clear();
      slot.swap(storage);
    }
  }

  PerKindCount pending_deliveries() const {
    PerKindCount n{};
    for (const auto& b : buckets_) {
      for (const auto& ev : b) {
        if (ev.type == Event::Type::deliver) ++n[static_cast<std::size_t>(trace_kind(ev.message.kind))];
      }
    }
    return n;
  }

 private:
  std::vector<std::vector<Event>> buckets_;
  std::size_t mask_;
};

// Bounded random walk per metric.
class Workload {
 public:
  Workload(const WorkloadSpec& spec) : spec_(spec) {}

  ResourceUsage initial(Rng& rng) const {
    std::uniform_real_distribution<double> pct(10.0, 90.0);
    std::uniform_real_distribution<double> net(100.0, std::min(5000.0, spec_.max_net));
    ResourceUsage u;
    u.cpu_pct = pct(rng);
    u.mem_pct = pct(rng);
    u.disk_pct = pct(rng);
    u.net_kbps = net(rng);
    return u;
  }

  void step(ResourceUsage& u, Tick now, Rng& rng) const {
    if (spec_.freeze_tick && now >= *spec_.freeze_tick) return;
    std::uniform_real_distribution<double> pct(-spec_.step_pct, spec_.step_pct);
    std::uniform_real_distribution<double> net(-spec_.step_net, spec_.step_net);
    u.cpu_pct = std::clamp(u.cpu_pct + pct(rng), 0.0, 100.0);
    u.mem_pct = std::clamp(u.mem_pct + pct(rng), 0.0, 100.0);
    u.disk_pct = std::clamp(u.disk_pct + pct(rng), 0.0, 100.0);
    u.net_kbps = std::clamp(u.net_kbps + net(rng), 0.0, spec_.max_net);
  }

 private:
  WorkloadSpec spec_;
};

class Engine {
 public:
  Engine(const Scenario& scenario, const RunOptions& options)
      : sc_(scenario),
        params_(scenario.protocol),
        rng_(scenario.seed),
        workload_(scenario.workload),
        queue_(horizon(scenario)),
        keep_snapshots_(options.keep_snapshots) {
    for (auto* s : options.sinks) sink_.add(s);
    if (sc_.scheme == Scheme::flat) params_.inter_tier = false;
  }

  RunResult run() {
    topo_ = build_topology(sc_, rng_);
    const std::size_t n = topo_.vms.size();
    phase_.resize(n);
    std::uniform_int_distribution<Tick> phase(0, params_.t_gossip - 1);
    for (auto& p : phase_) p = phase(rng_);
    draw_all_contacts();
    usage_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) usage_.push_back(workload_.initial(rng_));

    report_.scheme = sc_.scheme;
    report_.population = sc_.population;
    report_.groups = static_cast<std::uint32_t>(topo_.group_count());
    report_.regions = static_cast<std::uint32_t>(topo_.regions.size());
    report_.rounds = sc_.rounds;
    report_.seed = sc_.seed;
    report_.per_round.assign(sc_.rounds, RoundCounts{});

    if (sc_.scheme == Scheme::central) {
      run_central();
    } else {
      run_gossip();
    }

    RunResult result;
    result.report = std::move(report_);
    result.topology = std::move(topo_);
    result.snapshots = std::move(snapshots_);
    result.final_states = std::move(nodes_);
    result.final_usage = std::move(usage_);
    result.in_flight = in_flight_;
    return result;
  }

 private:
  static Tick horizon(const Scenario& sc) {
    const auto max_latency = static_cast<Tick>(std::ceil(sc.latency.inter_region.hi)) + 1;
    return std::max({sc.protocol.t_gossip, sc.central.t_poll, max_latency, Tick{2}});
  }

  void emit(const TraceEvent& e) {
    if (!sink_.empty()) sink_.record(e);
  }

  std::size_t round_of(Tick t) const { return static_cast<std::size_t>(t / params_.t_gossip); }

  // Contacts are drawn for every scheme so that all schemes see the same
  // random stream after setup.
  void draw_contacts(VmId id) {
    auto& gc = group_contacts_[id.value];
    auto& rc = region_contacts_[id.value];
    gc.clear();
    rc.clear();
    const auto& self = topo_.vm(id);
    for (GroupId g : topo_.live_groups(self.region)) {
      if (g == self.group) continue;
      if (auto c = pick_member(topo_.members(g))) gc[g] = *c;
    }
    for (RegionId r : topo_.regions) {
      if (r == self.region) continue;
      if (auto c = pick_member(topo_.alive_in_region(r))) rc[r] = *c;
    }
  }

  void draw_all_contacts() {
    group_contacts_.resize(topo_.vms.size());
    region_contacts_.resize(topo_.vms.size());
    for (const auto& v : topo_.vms) draw_contacts(v.id);
  }

  std::optional<VmId> pick_member(const std::vector<VmId>& members) {
    if (members.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    return members[pick(rng_)];
  }

  std::vector<Peer> peers_of(VmId id) const {
    std::vector<Peer> peers;
    const auto& self = topo_.vm(id);
    if (sc_.scheme == Scheme::flat) {
      for (const auto& v : topo_.vms) {
        if (v.alive && v.id != id) peers.push_back({v.id, topo_.latency.ms(id, v.id)});
      }
    } else {
      for (VmId m : topo_.members(self.group)) {
        if (m != id) peers.push_back({m, topo_.latency.ms(id, m)});
      }
    }
    return peers;
  }

  NodeState make_node(VmId id) const {
    const auto& v = topo_.vm(id);
    if (sc_.scheme == Scheme::flat) {
      return make_node_state(id, GroupId{0}, v.region, peers_of(id), {}, {}, params_);
    }
    return make_node_state(id, v.group, v.region, peers_of(id), group_contacts_[id.value],
                           region_contacts_[id.value], params_);
  }

  void build_nodes() {
    if (sc_.scheme == Scheme::flat) {
      std::vector<FlatMember> members;
      for (const auto& v : topo_.vms) members.push_back({v.id, v.region});
      const auto& lat = topo_.latency;
      nodes_ = make_flat_population(members, [&lat](VmId a, VmId b) { return lat.ms(a, b); }, params_);
      return;
    }
    nodes_.clear();
    nodes_.reserve(topo_.vms.size());
    for (const auto& v : topo_.vms) nodes_.push_back(make_node(v.id));
  }

  void run_gossip() {
    build_nodes();
    const Tick end = sc_.end_tick();
    for (const auto& v : topo_.vms) queue_.push(0, phase_[v.id.value], Event{Event::Type::timer, v.id, {}});

    std::size_t next_churn = 0;
    for (Tick t = 0; t < end; ++t) {
      if (t > 0 && t % params_.t_gossip == 0) snapshot(static_cast<std::uint32_t>(t / params_.t_gossip));
      while (next_churn < sc_.churn.size() && sc_.churn[next_churn].tick == t) {
        apply_churn(sc_.churn[next_churn++], t);
      }
      auto bucket = queue_.take(t);
      for (auto& ev : bucket) {
        if (ev.type == Event::Type::timer) {
          on_timer(ev.node, t);
        } else {
          on_deliver(ev.node, ev.message, t);
        }
      }
      queue_.recycle(t, std::move(bucket));
    }
    snapshot(sc_.rounds);
    in_flight_ = queue_.pending_deliveries();
    report_.convergence_round = converged_at_;
  }

  void on_timer(VmId id, Tick t) {
    if (!topo_.vm(id).alive) return;
    const auto round = static_cast<std::int64_t>(round_of(t));
    auto& node = nodes_[id.value];
    auto& usage = usage_[id.value];

    emit({t, TraceKind::timer, id});
    workload_.step(usage, t, rng_);
    emit({t, TraceKind::sample, id});
    on_local_sample(node, usage, t);
    send_all(id, on_timer_intra(node, params_, t, rng_), t);
    if (is_inter_group_round(round, params_)) {
      send_all(id, on_timer_inter_group(node, params_, t), t);
      if (is_inter_cloud_round(round, params_)) send_all(id, on_timer_inter_cloud(node, params_, t), t);
    }
    if (t + params_.t_gossip < sc_.end_tick()) {
      queue_.push(t, t + params_.t_gossip, Event{Event::Type::timer, id, {}});
    }
  }

  void send_all(VmId from, std::vector<Outgoing> out, Tick t) {
    for (auto& o : out) send(from, std::move(o), t);
  }

  void send(VmId from, Outgoing out, Tick t) {
    const auto& msg = out.message;
    auto& counts = tier(report_.per_round[round_of(t)], msg.kind);
    if (msg.hops == 0) {
      ++counts.initiated;
    } else {
      ++counts.forwarded;
    }
    const auto kind = trace_kind(msg.kind);
    emit({t, TraceKind::send, from, kind, msg.id, out.target, msg.ttl, msg.hops});

    const double loss = topo_.pair_class(from, out.target) == PairClass::inter_region
                            ? sc_.latency.loss_inter_region
                            : sc_.latency.loss_intra;
    if (loss > 0.0 && uniform01(rng_) < loss) {
      ++counts.dropped;
      emit({t, TraceKind::drop, out.target, kind, msg.id, from, msg.ttl, msg.hops});
      return;
    }
    const Tick at = t + topo_.latency.delay(from, out.target);
    queue_.push(t, at, Event{Event::Type::deliver, out.target, std::move(out.message)});
  }

  void on_deliver(VmId to, const GossipMessage& msg, Tick t) {
    const auto kind = trace_kind(msg.kind);
    if (!topo_.vm(to).alive) {
      ++tier(report_.per_round[round_of(t)], msg.kind).dropped;
      emit({t, TraceKind::drop, to, kind, msg.id, msg.sender, msg.ttl, msg.hops});
      return;
    }
    emit({t, TraceKind::deliver, to, kind, msg.id, msg.sender, msg.ttl, msg.hops});
    relay_.clear();
    on_receive(nodes_[to.value], msg, params_, t, rng_, relay_);
    for (auto& o : relay_) send(to, std::move(o), t);
  }

  void apply_churn(const ChurnEvent& c, Tick t) {
    if (c.action == ChurnEvent::Action::leave) {
      const auto& gone = topo_.vm(c.vm);
      if (!gone.alive) return;
      const GroupId group = gone.group;
      const RegionId region = gone.region;
      remove_vm(topo_, c.vm);
      if (sc_.scheme == Scheme::central) return;
      refresh_peers(sc_.scheme == Scheme::flat ? std::nullopt : std::optional<GroupId>(group));
      replace_contacts(c.vm, group, region);
      return;
    }

    const auto features = make_profile_vector(sc_.features, c.profile, rng_);
    const VmId id = add_vm(topo_, c.region, features, sc_.latency, rng_);
    std::uniform_int_distribution<Tick> phase(0, params_.t_gossip - 1);
    phase_.push_back(phase(rng_));
    usage_.push_back(workload_.initial(rng_));
    group_contacts_.emplace_back();
    region_contacts_.emplace_back();
    draw_contacts(id);
    if (sc_.scheme == Scheme::central) return;

    nodes_.push_back(make_node(id));
    refresh_peers(sc_.scheme == Scheme::flat ? std::nullopt : std::optional<GroupId>(topo_.vm(id).group));
    // First firing at the next tick congruent to the VM's phase.
    Tick first = t - t % params_.t_gossip + phase_.back();
    if (first <= t) first += params_.t_gossip;
    if (first < sc_.end_tick()) queue_.push(t, first, Event{Event::Type::timer, id, {}});
  }

  // Rebuilds peer lists after a membership change; nullopt means everyone.
  void refresh_peers(std::optional<GroupId> group) {
    for (auto& node : nodes_) {
      const auto& v = topo_.vm(node.id);
      if (!v.alive || (group && v.group != *group)) continue;
      node.set_peers(peers_of(node.id), params_.epsilon_latency);
    }
  }

  void replace_contacts(VmId gone, GroupId group, RegionId region) {
    for (auto& node : nodes_) {
      if (!topo_.vm(node.id).alive) continue;
      if (auto it = node.group_contacts.find(group); it != node.group_contacts.end() && it->second == gone) {
        if (auto c = pick_member(topo_.members(group))) {
          it->second = *c;
        } else {
          node.group_contacts.erase(it);
        }
      }
      if (auto it = node.region_contacts.find(region); it != node.region_contacts.end() && it->second == gone) {
        if (auto c = pick_member(topo_.alive_in_region(region))) {
          it->second = *c;
        } else {
          node.region_contacts.erase(it);
        }
      }
    }
  }

  void snapshot(std::uint32_t round) {
    CoverageSnapshot s;
    s.round = round;
    for (RegionId r : topo_.regions) {
      s.required_groups.push_back(topo_.live_groups(r));
      if (!s.required_groups.back().empty()) s.required_regions.push_back(r);
    }
    for (const auto& v : topo_.vms) {
      if (v.alive) s.alive.push_back(v.id);
    }
    for (const auto& node : nodes_) {
      if (!topo_.vm(node.id).alive) continue;
      NodeCoverage c{node.id, node.region, {}, {}, {}};
      if (sc_.scheme == Scheme::flat) {
        c.origins.reserve(node.records.size());
        for (const auto& r : node.records) c.origins.push_back(r.origin);
      } else {
        for (const auto& [g, d] : node.digests.groups) c.group_keys.push_back(g);
        for (const auto& [r, d] : node.digests.regions) c.region_keys.push_back(r);
      }
      s.nodes.push_back(std::move(c));
    }
    if (!converged_at_ && is_covered(s, sc_.scheme)) converged_at_ = round;
    if (keep_snapshots_) snapshots_.push_back(std::move(s));
  }

  // Polls are booked per cycle; the trace shows each request and response
  // as a send followed by a delivery one tick later.
  void run_central() {
    const Tick end = sc_.end_tick();
    const std::uint32_t legs = sc_.central.messages_per_poll;
    std::vector<TraceEvent> events;
    std::size_t next_churn = 0;
    MessageId next_id = 0;
    for (Tick t = 0; t < end; t += sc_.central.t_poll) {
      while (next_churn < sc_.churn.size() && sc_.churn[next_churn].tick <= t) {
        apply_churn(sc_.churn[next_churn++], t);
      }
      const auto alive = topo_.alive_count();
      report_.per_round[round_of(t)].intra_group.initiated += centralized_cycle(alive, sc_.central);
      for (const auto& v : topo_.vms) {
        if (!v.alive) continue;
        for (std::uint32_t leg = 0; leg < legs; ++leg) {
          const Tick sent = t + leg;
          const MessageId id = next_id++;
          events.push_back({sent, TraceKind::send, v.id, TraceMessageKind::poll, id});
          if (sent + 1 < end) {
            events.push_back({sent + 1, TraceKind::deliver, v.id, TraceMessageKind::poll, id});
          } else {
            ++in_flight_[static_cast<std::size_t>(TraceMessageKind::poll)];
          }
        }
      }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const TraceEvent& a, const TraceEvent& b) { return a.tick < b.tick; });
    for (const auto& e : events) emit(e);
    report_.convergence_round = std::nullopt;
  }

  const Scenario& sc_;
  ProtocolParams params_;
  Rng rng_;
  std::vector<Outgoing> relay_;  // scratch for on_deliver
  Workload workload_;
  CalendarQueue queue_;
  bool keep_snapshots_;
  TraceFanout sink_;

  Topology topo_;
  std::vector<Tick> phase_;
  std::vector<std::map<GroupId, VmId>> group_contacts_;
  std::vector<std::map<RegionId, VmId>> region_contacts_;
  std::vector<ResourceUsage> usage_;
  std::vector<NodeState> nodes_;
  MetricsReport report_;
  std::vector<CoverageSnapshot> snapshots_;
  std::optional<std::uint32_t> converged_at_;
  PerKindCount in_flight_{};
};

}  // namespace

RunResult run(const Scenario& scenario, const RunOptions& options) {
  scenario.validate();
  return Engine(scenario, options).run();
}

std::pair<MetricsReport, EventTrace> run_traced(const Scenario& scenario) {
  EventTrace trace;
  RunOptions options;
  options.sinks.push_back(&trace);
  auto result = run(scenario, options);
  return {std::move(result.report), std::move(trace)};
}

}  // namespace gossipmon
