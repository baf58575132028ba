#include "gossipmon/metrics.hpp"

#include <algorithm>

#include "gossipmon/errors.hpp"

namespace gossipmon {

namespace {

template <typename T>
bool includes(const std::vector<T>& have, const std::vector<T>& need) {
  // Both sorted.
  return std::includes(have.begin(), have.end(), need.begin(), need.end());
}

}  // namespace

TierCounts& TierCounts::operator+=(const TierCounts& o) {
  initiated += o.initiated;
  forwarded += o.forwarded;
  dropped += o.dropped;
  return *this;
}

RoundCounts& RoundCounts::operator+=(const RoundCounts& o) {
  intra_group += o.intra_group;
  inter_group += o.inter_group;
  inter_cloud += o.inter_cloud;
  return *this;
}

RoundCounts MetricsReport::totals() const {
  RoundCounts sum;
  for (const auto& r : per_round) sum += r;
  return sum;
}

double overhead_ratio(std::uint64_t scheme_total, std::uint64_t central_total) {
  if (central_total == 0) throw InvalidInput("overhead ratio against an empty centralized total");
  return 100.0 * (static_cast<double>(scheme_total) - static_cast<double>(central_total)) /
         static_cast<double>(central_total);
}

bool is_covered(const CoverageSnapshot& snapshot, Scheme scheme) {
  if (scheme == Scheme::central) return false;
  for (const auto& node : snapshot.nodes) {
    if (scheme == Scheme::flat) {
      if (!includes(node.origins, snapshot.alive)) return false;
      continue;
    }
    if (node.region.value >= snapshot.required_groups.size()) return false;
    if (!includes(node.group_keys, snapshot.required_groups[node.region.value])) return false;
    if (!includes(node.region_keys, snapshot.required_regions)) return false;
  }
  return true;
}

std::optional<std::uint32_t> convergence_round(std::span<const CoverageSnapshot> snapshots,
                                               Scheme scheme) {
  for (const auto& s : snapshots) {
    if (is_covered(s, scheme)) return s.round;
  }
  return std::nullopt;
}

}  // namespace gossipmon
