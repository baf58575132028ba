#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gossipmon/ids.hpp"
#include "gossipmon/scenario.hpp"

namespace gossipmon {

struct TierCounts {
  std::uint64_t initiated{0};
  std::uint64_t forwarded{0};
  std::uint64_t dropped{0};  // subset of initiated + forwarded

  std::uint64_t sent() const noexcept { return initiated + forwarded; }
  TierCounts& operator+=(const TierCounts& o);
  friend bool operator==(const TierCounts&, const TierCounts&) = default;
};

struct RoundCounts {
  TierCounts intra_group;
  TierCounts inter_group;
  TierCounts inter_cloud;

  std::uint64_t total() const noexcept {
    return intra_group.sent() + inter_group.sent() + inter_cloud.sent();
  }
  std::uint64_t dropped() const noexcept {
    return intra_group.dropped + inter_group.dropped + inter_cloud.dropped;
  }
  RoundCounts& operator+=(const RoundCounts& o);
  friend bool operator==(const RoundCounts&, const RoundCounts&) = default;
};

/// Message counts of one run. Round r (1-based) covers ticks
/// [(r-1) * t_gossip, r * t_gossip). The centralized scheme books its polls
/// under intra_group.
struct MetricsReport {
  Scheme scheme{Scheme::layered};
  std::uint32_t population{0};
  std::uint32_t groups{0};
  std::uint32_t regions{0};
  std::uint32_t rounds{0};
  std::uint64_t seed{0};
  std::vector<RoundCounts> per_round;
  std::optional<std::uint32_t> convergence_round;
  std::optional<double> overhead_ratio;  // percent, set only for paired comparisons

  RoundCounts totals() const;
  std::uint64_t total_messages() const { return totals().total(); }

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// 100 * (scheme_total - central_total) / central_total. Throws InvalidInput
// when central_total is 0.
double overhead_ratio(std::uint64_t scheme_total, std::uint64_t central_total);

struct NodeCoverage {
  VmId id;
  RegionId region;
  std::vector<GroupId> group_keys;
  std::vector<RegionId> region_keys;
  std::vector<VmId> origins;

  friend bool operator==(const NodeCoverage&, const NodeCoverage&) = default;
};

/// What every alive VM knew at the end of `round`, plus what it needed to
/// know: the live groups of each region, the live regions, the alive VMs.
struct CoverageSnapshot {
  std::uint32_t round{0};
  std::vector<std::vector<GroupId>> required_groups;  // indexed by region
  std::vector<RegionId> required_regions;
  std::vector<VmId> alive;
  std::vector<NodeCoverage> nodes;

  friend bool operator==(const CoverageSnapshot&, const CoverageSnapshot&) = default;
};

// Layered: every node holds a digest for each live group of its own region
// and for each live region. Flat: every node's records cover every alive VM.
// Central never converges in this sense.
bool is_covered(const CoverageSnapshot& snapshot, Scheme scheme);

// First snapshot round that is covered, or nullopt.
std::optional<std::uint32_t> convergence_round(std::span<const CoverageSnapshot> snapshots,
                                               Scheme scheme);

}  // namespace gossipmon
