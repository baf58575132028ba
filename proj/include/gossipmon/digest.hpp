#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <variant>

#include "gossipmon/ids.hpp"
#include "gossipmon/usage.hpp"

namespace gossipmon {

using Scope = std::variant<GroupId, RegionId>;

struct MetricStats {
  double sum{0.0};
  double min{0.0};
  double max{0.0};

  friend bool operator==(const MetricStats&, const MetricStats&) = default;
};

/// Summary of the VMs in one group or one region.
///
/// `seq` is assigned by the emitting leader and is the only freshness signal:
/// of two digests for the same scope the larger seq wins.
struct AggregateDigest {
  Scope scope;
  std::uint64_t seq{0};
  std::uint32_t contributing{0};
  MetricStats cpu;
  MetricStats mem;
  MetricStats disk;
  MetricStats net;
  Tick freshest{0};

  double mean_cpu() const { return cpu.sum / contributing; }
  double mean_mem() const { return mem.sum / contributing; }
  double mean_disk() const { return disk.sum / contributing; }
  double mean_net() const { return net.sum / contributing; }

  friend bool operator==(const AggregateDigest&, const AggregateDigest&) = default;
};

// Digest over the records with now - stamp <= staleness_window. Returns
// nullopt when no record is fresh. Throws InvalidInput if the window is < 1.
std::optional<AggregateDigest> compute_aggregate(const OriginRecordSet& records, Tick now,
                                                 Tick staleness_window, Scope scope,
                                                 std::uint64_t seq);

// Sum of sums, min of mins, max of maxes, sum of counts. nullopt for no input.
std::optional<AggregateDigest> combine_digests(std::span<const AggregateDigest> parts, Scope scope,
                                               std::uint64_t seq);

struct DigestSet {
  std::map<GroupId, AggregateDigest> groups;
  std::map<RegionId, AggregateDigest> regions;

  // Stores `digest` under its scope key unless a digest with an equal or
  // higher seq is already held. Returns true when the set changed.
  bool merge(const AggregateDigest& digest);
  bool merge_from(const DigestSet& other);

  const AggregateDigest* group(GroupId id) const;
  const AggregateDigest* region(RegionId id) const;

  friend bool operator==(const DigestSet&, const DigestSet&) = default;
};

// Per key the higher seq wins; equal seq keeps a's entry.
DigestSet merge_digest_sets(const DigestSet& a, const DigestSet& b);

}  // namespace gossipmon
