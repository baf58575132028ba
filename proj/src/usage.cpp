#include "gossipmon/usage.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "gossipmon/errors.hpp"

namespace gossipmon {

namespace {

bool is_percentage(double v) { return std::isfinite(v) && v >= 0.0 && v <= 100.0; }

bool origin_less(const UsageRecord& r, VmId id) { return r.origin < id; }

}  // namespace

bool ResourceUsage::valid() const noexcept {
  return is_percentage(cpu_pct) && is_percentage(mem_pct) && is_percentage(disk_pct) &&
         std::isfinite(net_kbps) && net_kbps >= 0.0;
}

void validate_usage(const ResourceUsage& usage) {
  if (!is_percentage(usage.cpu_pct)) throw InvalidInput("cpu_pct out of [0,100]");
  if (!is_percentage(usage.mem_pct)) throw InvalidInput("mem_pct out of [0,100]");
  if (!is_percentage(usage.disk_pct)) throw InvalidInput("disk_pct out of [0,100]");
  if (!std::isfinite(usage.net_kbps) || usage.net_kbps < 0.0) {
    throw InvalidInput("net_kbps must be a non-negative rate");
  }
}

OriginRecordSet::OriginRecordSet(std::vector<UsageRecord> records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const UsageRecord& a, const UsageRecord& b) { return a.origin < b.origin; });
  records_.reserve(records.size());
  for (const auto& r : records) {
    if (!records_.empty() && records_.back().origin == r.origin) {
      if (r.stamp > records_.back().stamp) records_.back() = r;
    } else {
      records_.push_back(r);
    }
  }
  reindex();
}

void OriginRecordSet::reindex() {
  origins_.resize(records_.size());
  stamps_.resize(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    origins_[i] = records_[i].origin;
    stamps_[i] = records_[i].stamp;
  }
}

const UsageRecord* OriginRecordSet::find(VmId origin) const noexcept {
  auto it = std::lower_bound(records_.begin(), records_.end(), origin, origin_less);
  if (it == records_.end() || it->origin != origin) return nullptr;
  return &*it;
}

bool OriginRecordSet::upsert(const UsageRecord& record) {
  auto it = std::lower_bound(records_.begin(), records_.end(), record.origin, origin_less);
  if (it != records_.end() && it->origin == record.origin) {
    if (record.stamp <= it->stamp) return false;
    *it = record;
    stamps_[static_cast<std::size_t>(it - records_.begin())] = record.stamp;
    return true;
  }
  const auto at = it - records_.begin();
  records_.insert(it, record);
  origins_.insert(origins_.begin() + at, record.origin);
  stamps_.insert(stamps_.begin() + at, record.stamp);
  return true;
}

bool OriginRecordSet::merge_from(const OriginRecordSet& other) {
  const auto& theirs = other.records_;
  // In steady state both sides hold the same origins; update in place and
  // only fall back to a full rebuild when `other` knows an origin we lack.
  static_assert(sizeof(VmId) == sizeof(std::uint32_t));
  bool changed = false;
  const std::size_t n = records_.size();
  if (theirs.size() == n &&
      (n == 0 || std::memcmp(origins_.data(), other.origins_.data(), n * sizeof(VmId)) == 0)) {
    const Tick* mine = stamps_.data();
    const Tick* other_stamps = other.stamps_.data();
    constexpr std::size_t kBlock = 16;
    for (std::size_t lo = 0; lo < n; lo += kBlock) {
      const std::size_t hi = std::min(n, lo + kBlock);
      // Sign bit of the OR is set iff some stamp in the block is newer.
      Tick acc = 0;
      for (std::size_t i = lo; i < hi; ++i) acc |= mine[i] - other_stamps[i];
      if (acc >= 0) continue;
      for (std::size_t i = lo; i < hi; ++i) {
        if (other_stamps[i] > mine[i]) {
          records_[i] = theirs[i];
          stamps_[i] = other_stamps[i];
          changed = true;
        }
      }
    }
    return changed;
  }
  std::size_t i = 0;
  std::size_t j = 0;
  while (j < theirs.size()) {
    while (i < records_.size() && records_[i].origin < theirs[j].origin) ++i;
    if (i == records_.size() || records_[i].origin != theirs[j].origin) break;
    if (theirs[j].stamp > records_[i].stamp) {
      records_[i] = theirs[j];
      stamps_[i] = theirs[j].stamp;
      changed = true;
    }
    ++i;
    ++j;
  }
  if (j == theirs.size()) return changed;

  std::vector<UsageRecord> merged;
  merged.reserve(records_.size() + theirs.size() - j);
  std::size_t a = 0;
  std::size_t b = j;
  while (a < records_.size() || b < theirs.size()) {
    if (b == theirs.size() || (a < records_.size() && records_[a].origin < theirs[b].origin)) {
      merged.push_back(records_[a++]);
    } else if (a == records_.size() || theirs[b].origin < records_[a].origin) {
      merged.push_back(theirs[b++]);
    } else {
      merged.push_back(theirs[b].stamp > records_[a].stamp ? theirs[b] : records_[a]);
      ++a;
      ++b;
    }
  }
  records_ = std::move(merged);
  reindex();
  return true;
}

OriginRecordSet merge_usage_records(const OriginRecordSet& a, const OriginRecordSet& b) {
  OriginRecordSet result = a;
  result.merge_from(b);
  return result;
}

}  // namespace gossipmon
