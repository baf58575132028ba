#pragma once

#include <span>
#include <utility>
#include <vector>

#include "gossipmon/ids.hpp"

namespace gossipmon {

/// Application profile of a VM: one non-negative weight per known
/// application tag (webserver, hadoop-node, ...).
class FeatureVector {
 public:
  FeatureVector() = default;
  // Throws InvalidInput if empty, any entry is negative or non-finite, or no
  // entry is strictly positive.
  explicit FeatureVector(std::vector<double> dims);

  std::size_t size() const noexcept { return dims_.size(); }
  double operator[](std::size_t i) const { return dims_[i]; }
  std::span<const double> dims() const noexcept { return dims_; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::vector<double> dims_;
};

// Cosine of the angle between u and v, clamped to [0,1]. Throws InvalidInput
// on dimensionality mismatch or a zero vector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);
double cosine_similarity(const FeatureVector& u, const FeatureVector& v);

struct Group {
  GroupId id;
  std::vector<VmId> members;
  std::vector<double> centroid;  // arithmetic mean of member vectors
};

struct GroupAssignment {
  std::vector<Group> groups;

  const Group* find(GroupId id) const;
  // Group holding `vm`, or nullptr.
  const Group* group_of(VmId vm) const;
  std::size_t vm_count() const;
};

/// Greedy leader clustering in input order: each VM joins the first existing
/// group whose running centroid has similarity >= tau, otherwise it founds a
/// new group. Group ids are numbered from `first_id` in creation order.
GroupAssignment assign_groups(std::span<const std::pair<VmId, FeatureVector>> vms, double tau,
                              GroupId first_id = GroupId{0});

// Index into `assignment.groups` of the group whose centroid is most similar
// to `v` (first on ties). Used to place VMs that arrive after the initial
// assignment. Throws InvalidInput when there are no groups.
std::size_t nearest_group(const GroupAssignment& assignment, const FeatureVector& v);

// Adds `vm` to group `index` and updates its centroid.
void join_group(GroupAssignment& assignment, std::size_t index, VmId vm, const FeatureVector& v);

}  // namespace gossipmon
