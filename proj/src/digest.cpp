#include "gossipmon/digest.hpp"

#include <algorithm>

#include "gossipmon/errors.hpp"

namespace gossipmon {

namespace {

void fold(MetricStats& stats, double value, bool first) {
  if (first) {
    stats = MetricStats{value, value, value};
    return;
  }
  stats.sum += value;
  stats.min = std::min(stats.min, value);
  stats.max = std::max(stats.max, value);
}

void fold(MetricStats& into, const MetricStats& part, bool first) {
  if (first) {
    into = part;
    return;
  }
  into.sum += part.sum;
  into.min = std::min(into.min, part.min);
  into.max = std::max(into.max, part.max);
}

template <typename Key>
bool merge_entry(std::map<Key, AggregateDigest>& into, Key key, const AggregateDigest& digest) {
  auto [it, inserted] = into.try_emplace(key, digest);
  if (inserted) return true;
  if (digest.seq <= it->second.seq) return false;
  it->second = digest;
  return true;
}

}  // namespace

std::optional<AggregateDigest> compute_aggregate(const OriginRecordSet& records, Tick now,
                                                 Tick staleness_window, Scope scope,
                                                 std::uint64_t seq) {
  if (staleness_window < 1) throw InvalidInput("staleness_window must be >= 1");
  AggregateDigest digest{.scope = scope, .seq = seq};
  for (const auto& r : records) {
    if (now - r.stamp > staleness_window) continue;
    const bool first = digest.contributing == 0;
    fold(digest.cpu, r.usage.cpu_pct, first);
    fold(digest.mem, r.usage.mem_pct, first);
    fold(digest.disk, r.usage.disk_pct, first);
    fold(digest.net, r.usage.net_kbps, first);
    digest.freshest = first ? r.stamp : std::max(digest.freshest, r.stamp);
    ++digest.contributing;
  }
  if (digest.contributing == 0) return std::nullopt;
  return digest;
}

std::optional<AggregateDigest> combine_digests(std::span<const AggregateDigest> parts, Scope scope,
                                               std::uint64_t seq) {
  AggregateDigest out{.scope = scope, .seq = seq};
  bool first = true;
  for (const auto& p : parts) {
    if (p.contributing == 0) continue;
    fold(out.cpu, p.cpu, first);
    fold(out.mem, p.mem, first);
    fold(out.disk, p.disk, first);
    fold(out.net, p.net, first);
    out.freshest = first ? p.freshest : std::max(out.freshest, p.freshest);
    out.contributing += p.contributing;
    first = false;
  }
  if (first) return std::nullopt;
  return out;
}

bool DigestSet::merge(const AggregateDigest& digest) {
  if (const auto* g = std::get_if<GroupId>(&digest.scope)) return merge_entry(groups, *g, digest);
  return merge_entry(regions, std::get<RegionId>(digest.scope), digest);
}

bool DigestSet::merge_from(const DigestSet& other) {
  bool changed = false;
  for (const auto& [key, d] : other.groups) changed |= merge_entry(groups, key, d);
  for (const auto& [key, d] : other.regions) changed |= merge_entry(regions, key, d);
  return changed;
}

const AggregateDigest* DigestSet::group(GroupId id) const {
  auto it = groups.find(id);
  return it == groups.end() ? nullptr : &it->second;
}

const AggregateDigest* DigestSet::region(RegionId id) const {
  auto it = regions.find(id);
  return it == regions.end() ? nullptr : &it->second;
}

DigestSet merge_digest_sets(const DigestSet& a, const DigestSet& b) {
  DigestSet out = a;
  out.merge_from(b);
  return out;
}

}  // namespace gossipmon
