#pragma once

#include <cstdint>
#include <vector>

#include "gossipmon/grouping.hpp"
#include "gossipmon/ids.hpp"
#include "gossipmon/scenario.hpp"

namespace gossipmon {

enum class PairClass { intra_group, intra_region, inter_region };

// Uniform draw from the class's range.
double sample_latency(const LatencyModel& model, PairClass cls, Rng& rng);

// Symmetric per-pair latency in milliseconds, fixed for the whole run.
class LatencyTable {
 public:
  void resize(std::size_t n);
  void set(VmId a, VmId b, double ms);
  double ms(VmId a, VmId b) const { return ms_[index(a, b)]; }
  // Delivery delay in ticks: round(ms), at least 1.
  Tick delay(VmId a, VmId b) const { return ticks_[index(a, b)]; }
  std::size_t size() const noexcept { return n_; }

  friend bool operator==(const LatencyTable&, const LatencyTable&) = default;

 private:
  std::size_t index(VmId a, VmId b) const { return a.value * n_ + b.value; }

  std::size_t n_{0};
  std::vector<double> ms_;
  std::vector<Tick> ticks_;
};

struct VmDescriptor {
  VmId id;
  RegionId region;
  GroupId group;
  FeatureVector features;
  bool alive{true};
};

/// VMs nested in groups nested in regions. Group ids are global and
/// numbered region by region; groups never span regions.
struct Topology {
  std::vector<VmDescriptor> vms;  // indexed by VmId
  std::vector<RegionId> regions;
  std::vector<GroupAssignment> assignment;  // one per region
  LatencyTable latency;

  const VmDescriptor& vm(VmId id) const { return vms.at(id.value); }
  std::size_t group_count() const;
  std::size_t alive_count() const;
  RegionId region_of(GroupId group) const;
  const Group& group(GroupId id) const;
  // Alive members in id order.
  std::vector<VmId> members(GroupId group) const;
  std::vector<VmId> alive_in_region(RegionId region) const;
  // Ids of groups in the region that still have an alive member.
  std::vector<GroupId> live_groups(RegionId region) const;
  PairClass pair_class(VmId a, VmId b) const;
};

// One-hot profile vector plus noise; draws from rng only when noise > 0.
FeatureVector make_profile_vector(const FeatureSpec& spec, std::uint32_t profile, Rng& rng);

/// Groups each region with assign_groups and samples every pair latency.
/// Deterministic for a given rng state. Throws ConfigError for an invalid
/// scenario.
Topology build_topology(const Scenario& scenario, Rng& rng);

// Seeds a fresh generator from scenario.seed.
Topology build_topology(const Scenario& scenario);

// A VM arriving mid-run joins the most similar existing group of its region.
VmId add_vm(Topology& topo, RegionId region, const FeatureVector& features,
            const LatencyModel& model, Rng& rng);

void remove_vm(Topology& topo, VmId id);

}  // namespace gossipmon
