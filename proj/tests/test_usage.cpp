#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "gossipmon/errors.hpp"
#include "gossipmon/usage.hpp"

using namespace gossipmon;

namespace {

ResourceUsage usage(double cpu, double mem = 10, double disk = 20, double net = 300) {
  return ResourceUsage{cpu, mem, disk, net};
}

UsageRecord rec(std::uint32_t vm, Tick stamp, double cpu) {
  return UsageRecord{VmId{vm}, stamp, usage(cpu)};
}

// Random set over origins [0, origins) with stamps in [0, max_stamp].
OriginRecordSet random_set(Rng& rng, std::uint32_t origins, Tick max_stamp) {
  std::uniform_int_distribution<std::uint32_t> count(0, origins);
  std::uniform_int_distribution<std::uint32_t> origin(0, origins - 1);
  std::uniform_int_distribution<Tick> stamp(0, max_stamp);
  std::uniform_real_distribution<double> pct(0, 100);
  std::vector<UsageRecord> v;
  const auto n = count(rng);
  for (std::uint32_t i = 0; i < n; ++i) {
    v.push_back(UsageRecord{VmId{origin(rng)}, stamp(rng), usage(pct(rng), pct(rng))});
  }
  return OriginRecordSet(std::move(v));
}

// Distinct stamps across every set drawn from the same counter.
OriginRecordSet random_distinct(Rng& rng, std::uint32_t origins, Tick& next_stamp) {
  std::uniform_int_distribution<std::uint32_t> count(0, origins);
  std::uniform_int_distribution<std::uint32_t> origin(0, origins - 1);
  std::uniform_real_distribution<double> pct(0, 100);
  std::map<std::uint32_t, UsageRecord> m;
  const auto n = count(rng);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto o = origin(rng);
    m[o] = UsageRecord{VmId{o}, next_stamp++, usage(pct(rng))};
  }
  std::vector<UsageRecord> v;
  for (auto& [k, r] : m) v.push_back(r);
  return OriginRecordSet(std::move(v));
}

// Brute force: walk the union of origins and pick per origin by the rule.
std::map<std::uint32_t, UsageRecord> union_oracle(const OriginRecordSet& a,
                                                  const OriginRecordSet& b) {
  std::set<std::uint32_t> origins;
  for (const auto& r : a.records()) origins.insert(r.origin.value);
  for (const auto& r : b.records()) origins.insert(r.origin.value);
  std::map<std::uint32_t, UsageRecord> out;
  for (auto o : origins) {
    const UsageRecord* ra = nullptr;
    const UsageRecord* rb = nullptr;
    for (const auto& r : a.records()) {
      if (r.origin.value == o) ra = &r;
    }
    for (const auto& r : b.records()) {
      if (r.origin.value == o) rb = &r;
    }
    if (ra && rb) {
      out[o] = rb->stamp > ra->stamp ? *rb : *ra;
    } else {
      out[o] = ra ? *ra : *rb;
    }
  }
  return out;
}

std::map<std::uint32_t, UsageRecord> as_map(const OriginRecordSet& s) {
  std::map<std::uint32_t, UsageRecord> out;
  for (const auto& r : s.records()) out[r.origin.value] = r;
  return out;
}

}  // namespace

TEST_CASE("usage validation") {
  CHECK(usage(0, 0, 0, 0).valid());
  CHECK(usage(100, 100, 100, 1e9).valid());
  CHECK_FALSE(usage(-1).valid());
  CHECK_FALSE(usage(100.5).valid());
  CHECK_FALSE(ResourceUsage{1, 1, 1, -1}.valid());
  CHECK_THROWS_AS(validate_usage(usage(101)), InvalidInput);
  CHECK_THROWS_AS(validate_usage(ResourceUsage{1, 1, 1, std::nan("")}), InvalidInput);
  CHECK_NOTHROW(validate_usage(usage(50)));
}

TEST_CASE("record set keeps one record per origin, sorted") {
  OriginRecordSet s({rec(5, 3, 1), rec(2, 1, 2), rec(5, 7, 3), rec(5, 7, 4)});
  REQUIRE(s.size() == 2);
  CHECK(s.records()[0].origin == VmId{2});
  CHECK(s.records()[1].origin == VmId{5});
  // newest wins, first occurrence on a tie
  CHECK(s.find(VmId{5})->stamp == 7);
  CHECK(s.find(VmId{5})->usage.cpu_pct == 3);
  CHECK(s.find(VmId{9}) == nullptr);
}

TEST_CASE("upsert only replaces with strictly newer") {
  OriginRecordSet s;
  CHECK(s.upsert(rec(1, 5, 10)));
  CHECK_FALSE(s.upsert(rec(1, 5, 20)));
  CHECK(s.find(VmId{1})->usage.cpu_pct == 10);
  CHECK_FALSE(s.upsert(rec(1, 4, 30)));
  CHECK(s.upsert(rec(1, 6, 40)));
  CHECK(s.find(VmId{1})->usage.cpu_pct == 40);
  CHECK(s.upsert(rec(0, 1, 1)));
  CHECK(s.records()[0].origin == VmId{0});
}

TEST_CASE("merge with empty is identity") {
  OriginRecordSet x({rec(1, 3, 1), rec(4, 2, 2)});
  CHECK(merge_usage_records(x, {}) == x);
  CHECK(merge_usage_records({}, x) == x);
}

TEST_CASE("newer stamp wins") {
  OriginRecordSet a({rec(1, 5, 11)});
  OriginRecordSet b({rec(1, 9, 22)});
  const auto m = merge_usage_records(a, b);
  REQUIRE(m.size() == 1);
  CHECK(m.find(VmId{1})->stamp == 9);
  CHECK(m.find(VmId{1})->usage.cpu_pct == 22);
}

TEST_CASE("tie keeps the held record") {
  OriginRecordSet a({rec(1, 5, 11)});
  OriginRecordSet b({rec(1, 5, 22)});
  CHECK(merge_usage_records(a, b).find(VmId{1})->usage.cpu_pct == 11);
  CHECK(merge_usage_records(b, a).find(VmId{1})->usage.cpu_pct == 22);
  CHECK_FALSE(a.merge_from(b));
}

TEST_CASE("merge_from reports change") {
  OriginRecordSet a({rec(1, 5, 1), rec(3, 5, 1)});
  CHECK_FALSE(a.merge_from(OriginRecordSet({rec(1, 4, 9)})));
  CHECK(a.merge_from(OriginRecordSet({rec(3, 6, 9)})));
  CHECK(a.merge_from(OriginRecordSet({rec(2, 1, 9)})));
  CHECK(a.size() == 3);
  CHECK_FALSE(a.merge_from(a));
}

TEST_CASE("merge matches brute-force union on 1000 random pairs") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_set(rng, 12, 20);
    const auto b = random_set(rng, 12, 20);
    const auto m = merge_usage_records(a, b);
    REQUIRE(as_map(m) == union_oracle(a, b));
    // sorted, unique origins
    for (std::size_t k = 1; k < m.size(); ++k) {
      REQUIRE(m.records()[k - 1].origin < m.records()[k].origin);
    }
  }
}

TEST_CASE("merge algebra on random sets") {
  Rng rng(12);
  Tick next = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_distinct(rng, 10, next);
    const auto b = random_distinct(rng, 10, next);
    const auto c = random_distinct(rng, 10, next);
    REQUIRE(merge_usage_records(a, b) == merge_usage_records(b, a));
    REQUIRE(merge_usage_records(merge_usage_records(a, b), c) ==
            merge_usage_records(a, merge_usage_records(b, c)));
    REQUIRE(merge_usage_records(a, a) == a);
  }
  // associativity also holds with tied stamps
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_set(rng, 8, 4);
    const auto b = random_set(rng, 8, 4);
    const auto c = random_set(rng, 8, 4);
    REQUIRE(merge_usage_records(merge_usage_records(a, b), c) ==
            merge_usage_records(a, merge_usage_records(b, c)));
  }
}

TEST_CASE("in-place merge of equal origin sets matches the oracle") {
  Rng rng(13);
  std::uniform_int_distribution<Tick> stamp(0, 6);
  for (int i = 0; i < 200; ++i) {
    std::vector<UsageRecord> va;
    std::vector<UsageRecord> vb;
    for (std::uint32_t o = 0; o < 40; ++o) {
      va.push_back(rec(o, stamp(rng), 1));
      vb.push_back(rec(o, stamp(rng), 2));
    }
    const OriginRecordSet a(va);
    const OriginRecordSet b(vb);
    auto m = a;
    const bool changed = m.merge_from(b);
    REQUIRE(as_map(m) == union_oracle(a, b));
    REQUIRE(changed == !(m == a));
    // a later upsert still sees the merged stamps
    const auto before = m.find(VmId{7})->stamp;
    REQUIRE_FALSE(m.upsert(rec(7, before, 3)));
    REQUIRE(m.upsert(rec(7, before + 1, 3)));
  }
}
