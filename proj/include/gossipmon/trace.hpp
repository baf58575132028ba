#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gossipmon/ids.hpp"

namespace gossipmon {

enum class TraceKind : std::uint8_t { send, deliver, drop, timer, sample };

// Message kinds as they appear in traces. `poll` is the centralized scheme's
// collector traffic; `none` marks timer and sample events.
enum class TraceMessageKind : std::uint8_t { none, intra_group, inter_group, inter_cloud, poll };

inline constexpr std::size_t kTraceMessageKinds = 5;

// Indexed by TraceMessageKind.
using PerKindCount = std::array<std::uint64_t, kTraceMessageKinds>;

std::string_view to_string(TraceKind kind);
std::string_view to_string(TraceMessageKind kind);

struct TraceEvent {
  Tick tick{0};
  TraceKind kind{TraceKind::timer};
  VmId node;  // sender for send, receiver for deliver and drop
  TraceMessageKind msg_kind{TraceMessageKind::none};
  MessageId msg_id{0};
  // Not serialised; used by TraceAudit.
  VmId peer;
  int ttl{0};
  int hops{0};

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void record(const TraceEvent& event) = 0;
};

// In-memory trace.
class EventTrace : public TraceSink {
 public:
  void record(const TraceEvent& event) override { events_.push_back(event); }
  const std::vector<TraceEvent>& events() const noexcept { return events_; }

 private:
  std::vector<TraceEvent> events_;
};

// {"tick":..,"kind":..,"node":..,"msg_kind":..,"msg_id":..}; msg_kind and
// msg_id are null for timer and sample events.
std::string to_json_line(const TraceEvent& event);

class JsonLinesTraceWriter : public TraceSink {
 public:
  explicit JsonLinesTraceWriter(std::ostream& out) : out_(out) {}
  void record(const TraceEvent& event) override;

 private:
  std::ostream& out_;
};

struct KindTally {
  std::uint64_t sends{0};
  std::uint64_t delivers{0};
  std::uint64_t drops{0};

  std::uint64_t in_flight() const { return sends - delivers - drops; }
};

/// Streaming checker for the trace invariants:
///  - ticks never decrease;
///  - every deliver or drop is preceded by an unmatched send of the same id;
///  - an intra-group copy never travels more hops than the ttl it started
///    with, and hops + ttl stays equal to that initial ttl.
class TraceAudit : public TraceSink {
 public:
  void record(const TraceEvent& event) override;

  bool ok() const noexcept { return violations_.empty(); }
  const std::vector<std::string>& violations() const noexcept { return violations_; }
  const KindTally& tally(TraceMessageKind kind) const { return tallies_[static_cast<int>(kind)]; }
  std::uint64_t in_flight() const;
  // sends == delivers + drops + in_flight_at_end, per message kind.
  bool conserved(const PerKindCount& in_flight_at_end) const;
  int max_relay_depth() const noexcept { return max_depth_; }
  std::uint64_t events() const noexcept { return events_; }

 private:
  void fail(std::string what);

  struct Pending {
    std::int64_t unmatched{0};
    int initial_ttl{-1};
  };

  Tick last_tick_{0};
  std::uint64_t events_{0};
  int max_depth_{0};
  KindTally tallies_[kTraceMessageKinds];
  Pending& pending(int kind, MessageId id);

  // Indexed by origin, then by per-origin counter (the two halves of an id).
  std::vector<std::vector<Pending>> pending_[kTraceMessageKinds];
  std::vector<std::string> violations_;
};

// Forwards every event to several sinks.
class TraceFanout : public TraceSink {
 public:
  void add(TraceSink* sink) { sinks_.push_back(sink); }
  bool empty() const noexcept { return sinks_.empty(); }
  void record(const TraceEvent& event) override {
    for (auto* s : sinks_) s->record(event);
  }

 private:
  std::vector<TraceSink*> sinks_;
};

}  // namespace gossipmon
