#include "gossipmon/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "gossipmon/errors.hpp"

namespace gossipmon {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

void check_range(const LatencyRange& r, const std::string& field) {
  require(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo > 0.0 && r.lo <= r.hi, field,
          "expected 0 < lo <= hi");
}

void check_probability(double p, const std::string& field) {
  require(std::isfinite(p) && p >= 0.0 && p < 1.0, field, "probability must be in [0,1)");
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::layered: return "layered";
    case Scheme::flat: return "flat";
    case Scheme::central: return "central";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "layered") return Scheme::layered;
  if (name == "flat") return Scheme::flat;
  if (name == "central") return Scheme::central;
  throw InvalidInput("unknown scheme '" + std::string(name) + "'");
}

std::vector<std::uint32_t> split_population(std::uint32_t population, std::uint32_t regions) {
  std::vector<std::uint32_t> counts(regions, regions ? population / regions : 0);
  for (std::uint32_t i = 0; regions && i < population % regions; ++i) ++counts[i];
  return counts;
}

void Scenario::validate() const {
  require(population >= 1, "population", "must be >= 1");
  require(!region_counts.empty(), "regions", "must be >= 1");
  const auto sum = std::accumulate(region_counts.begin(), region_counts.end(), std::uint64_t{0});
  require(sum == population, "region_counts", "must sum to population");
  for (std::size_t i = 0; i < region_counts.size(); ++i) {
    require(region_counts[i] >= 1, "region_counts[" + std::to_string(i) + "]", "must be >= 1");
  }
  require(rounds >= 1, "rounds", "must be >= 1");

  require(features.profiles_per_region >= 1, "features.profiles_per_region", "must be >= 1");
  require(std::isfinite(features.noise) && features.noise >= 0.0, "features.noise",
          "must be finite and >= 0");
  require(features.tau > 0.0 && features.tau <= 1.0, "features.tau", "must be in (0,1]");

  const auto& p = protocol;
  require(p.t_gossip >= 1, "protocol.t_gossip", "must be >= 1");
  require(p.beta > 0.0 && p.beta <= 1.0, "protocol.beta", "must be in (0,1]");
  require(p.f_max >= 1, "protocol.f_max", "must be >= 1");
  require(p.k_group >= 1, "protocol.k_group", "must be >= 1");
  require(p.k_cloud >= 1, "protocol.k_cloud", "must be >= 1");
  require(p.staleness_window >= 1, "protocol.staleness_window", "must be >= 1");
  require(std::isfinite(p.epsilon_latency) && p.epsilon_latency > 0.0, "protocol.epsilon_latency",
          "must be > 0");

  require(central.t_poll >= 1, "central.t_poll", "must be >= 1");
  require(central.messages_per_poll == 1 || central.messages_per_poll == 2,
          "central.messages_per_poll", "must be 1 or 2");

  check_range(latency.intra_group, "latency.intra_group");
  check_range(latency.intra_region, "latency.intra_region");
  check_range(latency.inter_region, "latency.inter_region");
  require(latency.intra_group.midpoint() <= latency.intra_region.midpoint() &&
              latency.intra_region.midpoint() <= latency.inter_region.midpoint(),
          "latency", "ranges must be ordered intra_group <= intra_region <= inter_region by midpoint");
  check_probability(latency.loss_intra, "latency.loss_intra");
  check_probability(latency.loss_inter_region, "latency.loss_inter_region");

  require(!workload.freeze_tick || *workload.freeze_tick >= 0, "workload.freeze_tick", "must be >= 0");
  require(std::isfinite(workload.step_pct) && workload.step_pct >= 0.0, "workload.step_pct",
          "must be >= 0");
  require(std::isfinite(workload.step_net) && workload.step_net >= 0.0, "workload.step_net",
          "must be >= 0");
  require(std::isfinite(workload.max_net) && workload.max_net > 0.0, "workload.max_net",
          "must be > 0");

  std::uint32_t known = population;
  std::set<std::uint32_t> departed;
  Tick last = 0;
  for (std::size_t i = 0; i < churn.size(); ++i) {
    const auto& c = churn[i];
    const std::string field = "churn[" + std::to_string(i) + "]";
    require(c.tick >= last, field + ".tick", "churn events must be in tick order");
    require(c.tick >= 0 && c.tick < end_tick(), field + ".tick", "must fall inside the run");
    last = c.tick;
    if (c.action == ChurnEvent::Action::join) {
      require(c.region.value < region_counts.size(), field + ".region", "unknown region");
      require(c.profile < features.profiles_per_region, field + ".profile", "unknown profile");
      ++known;
    } else {
      require(c.vm.value < known, field + ".vm", "unknown vm");
      require(departed.insert(c.vm.value).second, field + ".vm", "vm already left");
    }
  }
}

}  // namespace gossipmon
