#include "gossipmon/grouping.hpp"

#include <algorithm>
#include <cmath>

#include "gossipmon/errors.hpp"

namespace gossipmon {

FeatureVector::FeatureVector(std::vector<double> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw InvalidInput("feature vector has no dimensions");
  bool any_positive = false;
  for (double d : dims_) {
    if (!std::isfinite(d) || d < 0.0) {
      throw InvalidInput("feature vector entries must be finite and non-negative");
    }
    any_positive = any_positive || d > 0.0;
  }
  if (!any_positive) throw InvalidInput("feature vector must have a positive entry");
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw InvalidInput("feature vectors differ in dimensionality");
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw InvalidInput("cosine similarity of a zero vector");
  return std::clamp(dot / std::sqrt(nu * nv), 0.0, 1.0);
}

double cosine_similarity(const FeatureVector& u, const FeatureVector& v) {
  return cosine_similarity(u.dims(), v.dims());
}

const Group* GroupAssignment::find(GroupId id) const {
  auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.id == id; });
  return it == groups.end() ? nullptr : &*it;
}

const Group* GroupAssignment::group_of(VmId vm) const {
  for (const auto& g : groups) {
    if (std::find(g.members.begin(), g.members.end(), vm) != g.members.end()) return &g;
  }
  return nullptr;
}

std::size_t GroupAssignment::vm_count() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.members.size();
  return n;
}

void join_group(GroupAssignment& assignment, std::size_t index, VmId vm, const FeatureVector& v) {
  Group& g = assignment.groups.at(index);
  if (g.centroid.size() != v.size()) throw InvalidInput("feature vectors differ in dimensionality");
  const auto n = static_cast<double>(g.members.size());
  for (std::size_t i = 0; i < v.size(); ++i) g.centroid[i] = (g.centroid[i] * n + v[i]) / (n + 1.0);
  g.members.push_back(vm);
}

GroupAssignment assign_groups(std::span<const std::pair<VmId, FeatureVector>> vms, double tau,
                              GroupId first_id) {
  if (vms.empty()) throw InvalidInput("cannot group an empty VM set");
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidInput("tau must be in (0,1]");
  const std::size_t dim = vms.front().second.size();

  GroupAssignment out;
  for (const auto& [vm, features] : vms) {
    if (features.size() != dim || dim == 0) {
      throw InvalidInput("feature vectors differ in dimensionality");
    }
    bool placed = false;
    for (std::size_t gi = 0; gi < out.groups.size(); ++gi) {
      if (cosine_similarity(out.groups[gi].centroid, features.dims()) >= tau) {
        join_group(out, gi, vm, features);
        placed = true;
        break;
      }
    }
    if (!placed) {
      const auto id = GroupId{first_id.value + static_cast<std::uint32_t>(out.groups.size())};
      out.groups.push_back(
          Group{id, {vm}, std::vector<double>(features.dims().begin(), features.dims().end())});
    }
  }
  return out;
}

std::size_t nearest_group(const GroupAssignment& assignment, const FeatureVector& v) {
  if (assignment.groups.empty()) throw InvalidInput("no group to join");
  std::size_t best = 0;
  double best_sim = -1.0;
  for (std::size_t i = 0; i < assignment.groups.size(); ++i) {
    const double s = cosine_similarity(assignment.groups[i].centroid, v.dims());
    if (s > best_sim) {
      best_sim = s;
      best = i;
    }
  }
  return best;
}

}  // namespace gossipmon
