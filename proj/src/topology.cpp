#include "gossipmon/topology.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gossipmon/errors.hpp"

namespace gossipmon {

double sample_latency(const LatencyModel& model, PairClass cls, Rng& rng) {
  const LatencyRange& r = cls == PairClass::intra_group    ? model.intra_group
                          : cls == PairClass::intra_region ? model.intra_region
                                                           : model.inter_region;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

void LatencyTable::resize(std::size_t n) {
  std::vector<double> ms(n * n, 0.0);
  std::vector<Tick> ticks(n * n, 1);
  for (std::size_t a = 0; a < std::min(n, n_); ++a) {
    for (std::size_t b = 0; b < std::min(n, n_); ++b) {
      ms[a * n + b] = ms_[a * n_ + b];
      ticks[a * n + b] = ticks_[a * n_ + b];
    }
  }
  n_ = n;
  ms_ = std::move(ms);
  ticks_ = std::move(ticks);
}

void LatencyTable::set(VmId a, VmId b, double ms) {
  const Tick t = std::max<Tick>(1, std::llround(ms));
  ms_[index(a, b)] = ms_[index(b, a)] = ms;
  ticks_[index(a, b)] = ticks_[index(b, a)] = t;
}

std::size_t Topology::group_count() const {
  std::size_t n = 0;
  for (const auto& a : assignment) n += a.groups.size();
  return n;
}

std::size_t Topology::alive_count() const {
  return static_cast<std::size_t>(
      std::count_if(vms.begin(), vms.end(), [](const VmDescriptor& v) { return v.alive; }));
}

const Group& Topology::group(GroupId id) const {
  for (const auto& a : assignment) {
    if (const auto* g = a.find(id)) return *g;
  }
  throw std::out_of_range("unknown group " + std::to_string(id.value));
}

RegionId Topology::region_of(GroupId id) const {
  for (std::size_t r = 0; r < assignment.size(); ++r) {
    if (assignment[r].find(id)) return regions[r];
  }
  throw std::out_of_range("unknown group " + std::to_string(id.value));
}

std::vector<VmId> Topology::members(GroupId id) const {
  std::vector<VmId> out;
  for (VmId m : group(id).members) {
    if (vm(m).alive) out.push_back(m);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<VmId> Topology::alive_in_region(RegionId region) const {
  std::vector<VmId> out;
  for (const auto& v : vms) {
    if (v.alive && v.region == region) out.push_back(v.id);
  }
  return out;
}

std::vector<GroupId> Topology::live_groups(RegionId region) const {
  std::vector<GroupId> out;
  for (const auto& g : assignment.at(region.value).groups) {
    if (std::any_of(g.members.begin(), g.members.end(), [&](VmId m) { return vm(m).alive; })) {
      out.push_back(g.id);
    }
  }
  return out;
}

PairClass Topology::pair_class(VmId a, VmId b) const {
  const auto& va = vm(a);
  const auto& vb = vm(b);
  if (va.region != vb.region) return PairClass::inter_region;
  return va.group == vb.group ? PairClass::intra_group : PairClass::intra_region;
}

FeatureVector make_profile_vector(const FeatureSpec& spec, std::uint32_t profile, Rng& rng) {
  std::vector<double> dims(spec.profiles_per_region, 0.0);
  dims.at(profile) = 1.0;
  if (spec.noise > 0.0) {
    std::uniform_real_distribution<double> jitter(0.0, spec.noise);
    for (double& d : dims) d += jitter(rng);
  }
  return FeatureVector(std::move(dims));
}

Topology build_topology(const Scenario& scenario, Rng& rng) {
  scenario.validate();
  Topology topo;
  topo.vms.reserve(scenario.population);

  std::uint32_t next_id = 0;
  std::uint32_t next_group = 0;
  for (std::uint32_t r = 0; r < scenario.region_count(); ++r) {
    const RegionId region{r};
    topo.regions.push_back(region);
    std::vector<std::pair<VmId, FeatureVector>> members;
    for (std::uint32_t i = 0; i < scenario.region_counts[r]; ++i) {
      const VmId id{next_id++};
      auto features = make_profile_vector(scenario.features, i % scenario.features.profiles_per_region, rng);
      topo.vms.push_back(VmDescriptor{id, region, GroupId{}, features});
      members.emplace_back(id, std::move(features));
    }
    auto groups = assign_groups(members, scenario.features.tau, GroupId{next_group});
    next_group += static_cast<std::uint32_t>(groups.groups.size());
    for (const auto& g : groups.groups) {
      for (VmId m : g.members) topo.vms[m.value].group = g.id;
    }
    topo.assignment.push_back(std::move(groups));
  }

  topo.latency.resize(topo.vms.size());
  for (std::uint32_t a = 0; a < topo.vms.size(); ++a) {
    for (std::uint32_t b = a + 1; b < topo.vms.size(); ++b) {
      topo.latency.set(VmId{a}, VmId{b},
                       sample_latency(scenario.latency, topo.pair_class(VmId{a}, VmId{b}), rng));
    }
  }
  return topo;
}

Topology build_topology(const Scenario& scenario) {
  Rng rng(scenario.seed);
  return build_topology(scenario, rng);
}

VmId add_vm(Topology& topo, RegionId region, const FeatureVector& features,
            const LatencyModel& model, Rng& rng) {
  auto& assignment = topo.assignment.at(region.value);
  const std::size_t gi = nearest_group(assignment, features);
  const VmId id{static_cast<std::uint32_t>(topo.vms.size())};
  join_group(assignment, gi, id, features);
  topo.vms.push_back(VmDescriptor{id, region, assignment.groups[gi].id, features});

  topo.latency.resize(topo.vms.size());
  for (std::uint32_t other = 0; other < id.value; ++other) {
    topo.latency.set(VmId{other}, id, sample_latency(model, topo.pair_class(VmId{other}, id), rng));
  }
  return id;
}

void remove_vm(Topology& topo, VmId id) { topo.vms.at(id.value).alive = false; }

}  // namespace gossipmon
