#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gossipmon/ids.hpp"

namespace gossipmon {

// Point-in-time utilisation sample of one VM.
struct ResourceUsage {
  double cpu_pct{0.0};
  double mem_pct{0.0};
  double disk_pct{0.0};
  double net_kbps{0.0};

  bool valid() const noexcept;

  friend bool operator==(const ResourceUsage&, const ResourceUsage&) = default;
};

// Throws InvalidInput unless every percentage is in [0,100] and net_kbps >= 0.
void validate_usage(const ResourceUsage& usage);

struct UsageRecord {
  VmId origin;
  Tick stamp{0};
  ResourceUsage usage;

  friend bool operator==(const UsageRecord&, const UsageRecord&) = default;
};

/// At most one record per origin VM, kept sorted by origin.
///
/// Reconciliation is last-writer-wins on the logical stamp. When two records
/// for the same origin carry the same stamp the one already held is kept, so
/// merging into a set never replaces a record with an equally old one.
class OriginRecordSet {
 public:
  OriginRecordSet() = default;

  // Duplicate origins collapse to the record with the largest stamp (first
  // occurrence on ties).
  explicit OriginRecordSet(std::vector<UsageRecord> records);

  const UsageRecord* find(VmId origin) const noexcept;
  bool contains(VmId origin) const noexcept { return find(origin) != nullptr; }

  // Inserts the record, or replaces the held one if `record` is strictly newer.
  // Returns true when the set changed.
  bool upsert(const UsageRecord& record);

  // Merges every record of `other` into this set. Returns true when at least
  // one record was added or replaced.
  bool merge_from(const OriginRecordSet& other);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  std::span<const UsageRecord> records() const noexcept { return records_; }
  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }

  friend bool operator==(const OriginRecordSet& a, const OriginRecordSet& b) {
    return a.records_ == b.records_;
  }

 private:
  void reindex();

  std::vector<UsageRecord> records_;
  // Column copies of origin and stamp so the common merge case scans a few
  // compact arrays instead of whole records.
  std::vector<VmId> origins_;
  std::vector<Tick> stamps_;
};

// Pure form of OriginRecordSet::merge_from; ties keep `a`'s record.
OriginRecordSet merge_usage_records(const OriginRecordSet& a, const OriginRecordSet& b);

}  // namespace gossipmon
