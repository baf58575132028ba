#include "gossipmon/trace.hpp"

#include <algorithm>
#include <ostream>

namespace gossipmon {

std::string_view to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::send: return "send";
    case TraceKind::deliver: return "deliver";
    case TraceKind::drop: return "drop";
    case TraceKind::timer: return "timer";
    case TraceKind::sample: return "sample";
  }
  return "unknown";
}

std::string_view to_string(TraceMessageKind kind) {
  switch (kind) {
    case TraceMessageKind::none: return "none";
    case TraceMessageKind::intra_group: return "intra_group";
    case TraceMessageKind::inter_group: return "inter_group";
    case TraceMessageKind::inter_cloud: return "inter_cloud";
    case TraceMessageKind::poll: return "poll";
  }
  return "unknown";
}

std::string to_json_line(const TraceEvent& e) {
  std::string s;
  s.reserve(96);
  s += "{\"tick\":";
  s += std::to_string(e.tick);
  s += ",\"kind\":\"";
  s += to_string(e.kind);
  s += "\",\"node\":";
  s += std::to_string(e.node.value);
  if (e.msg_kind == TraceMessageKind::none) {
    s += ",\"msg_kind\":null,\"msg_id\":null}";
  } else {
    s += ",\"msg_kind\":\"";
    s += to_string(e.msg_kind);
    s += "\",\"msg_id\":";
    s += std::to_string(e.msg_id);
    s += '}';
  }
  return s;
}

void JsonLinesTraceWriter::record(const TraceEvent& event) { out_ << to_json_line(event) << '\n'; }

void TraceAudit::fail(std::string what) {
  // Keep the first few; one broken invariant tends to repeat.
  if (violations_.size() < 16) violations_.push_back(std::move(what));
}

void TraceAudit::record(const TraceEvent& e) {
  ++events_;
  if (e.tick < last_tick_) {
    fail("tick went backwards at " + std::to_string(e.tick));
  }
  last_tick_ = e.tick;
  if (e.kind == TraceKind::timer || e.kind == TraceKind::sample) return;

  const int k = static_cast<int>(e.msg_kind);
  auto& tally = tallies_[k];
  auto& pending = this->pending(k, e.msg_id);

  if (e.msg_kind == TraceMessageKind::intra_group) {
    if (e.kind == TraceKind::send && e.hops == 0 && pending.initial_ttl < 0) {
      pending.initial_ttl = e.ttl;
    }
    if (pending.initial_ttl < 0) {
      fail("relay of intra_group message " + std::to_string(e.msg_id) + " without an initiation");
    } else if (e.hops > pending.initial_ttl || e.hops + e.ttl != pending.initial_ttl || e.ttl < 0) {
      fail("intra_group message " + std::to_string(e.msg_id) + " exceeded its hop budget");
    }
    if (e.hops > max_depth_) max_depth_ = e.hops;
  }

  switch (e.kind) {
    case TraceKind::send:
      ++tally.sends;
      ++pending.unmatched;
      break;
    case TraceKind::deliver:
    case TraceKind::drop:
      if (e.kind == TraceKind::deliver) {
        ++tally.delivers;
      } else {
        ++tally.drops;
      }
      if (--pending.unmatched < 0) {
        fail(std::string(to_string(e.kind)) + " of message " + std::to_string(e.msg_id) +
             " without a matching send");
      }
      break;
    default:
      break;
  }
}

TraceAudit::Pending& TraceAudit::pending(int kind, MessageId id) {
  auto& by_origin = pending_[kind];
  const auto origin = static_cast<std::size_t>(id >> 32);
  const auto counter = static_cast<std::size_t>(id & 0xffffffffU);
  if (origin >= by_origin.size()) by_origin.resize(origin + 1);
  auto& slots = by_origin[origin];
  if (counter >= slots.size()) slots.resize(std::max(counter + 1, 2 * slots.size()));
  return slots[counter];
}

std::uint64_t TraceAudit::in_flight() const {
  std::uint64_t n = 0;
  for (const auto& t : tallies_) n += t.in_flight();
  return n;
}

bool TraceAudit::conserved(const PerKindCount& in_flight_at_end) const {
  for (std::size_t k = 0; k < kTraceMessageKinds; ++k) {
    const auto& t = tallies_[k];
    if (t.sends != t.delivers + t.drops + in_flight_at_end[k]) return false;
  }
  return true;
}

}  // namespace gossipmon
