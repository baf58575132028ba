#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "gossipmon/baselines.hpp"
#include "gossipmon/ids.hpp"
#include "gossipmon/protocol.hpp"

namespace gossipmon {

enum class Scheme { layered, flat, central };

std::string_view to_string(Scheme scheme);
// Throws InvalidInput for an unknown name.
Scheme parse_scheme(std::string_view name);

struct LatencyRange {
  double lo{0.0};
  double hi{0.0};

  double midpoint() const { return (lo + hi) / 2.0; }
};

struct LatencyModel {
  LatencyRange intra_group{0.5, 2.0};
  LatencyRange intra_region{1.0, 5.0};
  LatencyRange inter_region{50.0, 150.0};
  double loss_intra{0.01};
  // Inter-region transport is modelled as reliable.
  double loss_inter_region{0.0};
};

// VM i of a region gets application profile (i mod profiles_per_region): a
// one-hot vector over the profiles, plus uniform [0, noise] on every entry.
struct FeatureSpec {
  std::uint32_t profiles_per_region{1};
  double noise{0.0};
  double tau{0.8};
};

// Per-metric bounded random walk, stepped once per local sample.
struct WorkloadSpec {
  std::optional<Tick> freeze_tick;  // no steps at or after this tick
  double step_pct{5.0};
  double step_net{50.0};
  double max_net{10000.0};
};

struct ChurnEvent {
  enum class Action { join, leave };

  Tick tick{0};
  Action action{Action::leave};
  VmId vm;                     // leave
  RegionId region;             // join
  std::uint32_t profile{0};    // join
};

struct Scenario {
  std::uint32_t population{0};
  std::vector<std::uint32_t> region_counts;  // sums to population
  Scheme scheme{Scheme::layered};
  std::uint32_t rounds{1};
  std::uint64_t seed{0};
  FeatureSpec features;
  ProtocolParams protocol;
  CentralizedParams central;
  LatencyModel latency;
  WorkloadSpec workload;
  std::vector<ChurnEvent> churn;

  std::size_t region_count() const noexcept { return region_counts.size(); }
  Tick end_tick() const noexcept { return static_cast<Tick>(rounds) * protocol.t_gossip; }

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Even split of `population` over `regions`, remainder to the first regions.
std::vector<std::uint32_t> split_population(std::uint32_t population, std::uint32_t regions);

}  // namespace gossipmon
