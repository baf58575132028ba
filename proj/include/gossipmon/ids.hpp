#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>

namespace gossipmon {

// Integer identifier that cannot be mixed up with ids of another kind.
template <typename Tag>
struct StrongId {
  std::uint32_t value{0};

  constexpr StrongId() = default;
  constexpr explicit StrongId(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(StrongId, StrongId) = default;
  friend std::ostream& operator<<(std::ostream& os, StrongId id) { return os << id.value; }
};

struct VmTag {};
struct GroupTag {};
struct RegionTag {};

using VmId = StrongId<VmTag>;
using GroupId = StrongId<GroupTag>;
using RegionId = StrongId<RegionTag>;

// Logical simulation time. One tick is one millisecond.
using Tick = std::int64_t;

using MessageId = std::uint64_t;

// Every random draw in a run comes from one generator of this type.
using Rng = std::mt19937_64;

// Uniform in [0, 1). Bit-identical to std::generate_canonical<double, 53>
// over Rng, which libstdc++ evaluates with two long double logs per call.
inline double uniform01(Rng& rng) {
  static_assert(Rng::min() == 0 && Rng::max() == ~std::uint64_t{0});
  const double x = static_cast<double>(rng()) * 0x1p-64;
  return x < 1.0 ? x : 0x1.fffffffffffffp-1;
}

}  // namespace gossipmon

template <typename Tag>
struct std::hash<gossipmon::StrongId<Tag>> {
  std::size_t operator()(gossipmon::StrongId<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
