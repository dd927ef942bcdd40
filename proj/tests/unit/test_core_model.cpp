#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "freqcache/core_model.hpp"

using namespace freqcache;

namespace {

CacheAllocation alloc(int M, std::vector<int> q) { return CacheAllocation{M, std::move(q)}; }

SystemConfig small_cfg(int L, int B_C) {
  SystemConfig c;
  c.library_size = L;
  c.cache_files = B_C;
  return c;
}

bool has_kind(const AllocationReport& r, ViolationKind k) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const Violation& v) { return v.kind == k; });
}

// Random feasible allocation: nonincreasing, bounded by M, within capacity.
CacheAllocation random_feasible(std::mt19937_64& rng, int L, int M, int B_C) {
  std::vector<int> q(L);
  long budget = static_cast<long>(M) * B_C;
  int cap = M;
  for (int l = 0; l < L; ++l) {
    const int hi = static_cast<int>(std::min<long>(cap, budget));
    q[l] = std::uniform_int_distribution<int>(0, std::max(hi, 0))(rng);
    cap = q[l];
    budget -= q[l];
  }
  return alloc(M, q);
}

// Random nonincreasing allocation that uses the whole capacity M * B_C (needs L >= B_C).
CacheAllocation random_full(std::mt19937_64& rng, int L, int M, int B_C) {
  std::vector<int> q(L, 0);
  for (long unit = 0; unit < static_cast<long>(M) * B_C; ++unit) {
    std::vector<int> open;
    for (int l = 0; l < L; ++l)
      if (q[l] < M && (l == 0 || q[l - 1] > q[l])) open.push_back(l);
    q[open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)]]++;
  }
  return alloc(M, q);
}

}  // namespace

TEST_CASE("zipf popularity") {
  SUBCASE("uniform when the exponent is zero") {
    const auto p = zipf_popularity(3, 0.0);
    REQUIRE(p.size() == 3);
    for (std::size_t l = 0; l < 3; ++l) CHECK(p[l] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  }
  SUBCASE("single file") {
    const auto p = zipf_popularity(1, 2.0);
    CHECK(p[0] == 1.0);
  }
  SUBCASE("head of the reference library matches direct series summation") {
    const auto p = zipf_popularity(1000, 0.8);
    CHECK(p[0] == doctest::Approx(0.064642033437517894809).epsilon(1e-13));
  }
  SUBCASE("rejects an empty library") { CHECK_THROWS_AS(zipf_popularity(0, 0.8), std::invalid_argument); }
  SUBCASE("normalized, strictly decreasing and idempotent under renormalization") {
    for (double g : {0.2, 0.8, 1.6}) {
      const auto p = zipf_popularity(200, g);
      const auto probs = p.probs();
      CHECK(std::accumulate(probs.begin(), probs.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
      for (std::size_t l = 1; l < p.size(); ++l) CHECK(p[l] < p[l - 1]);
      const auto again = Popularity::from_weights(probs);
      for (std::size_t l = 0; l < p.size(); ++l) CHECK(again[l] == doctest::Approx(p[l]).epsilon(1e-15));
    }
  }
  SUBCASE("from_weights rejects increasing, negative and all-zero weights") {
    const std::vector<double> inc{1.0, 2.0}, neg{1.0, -0.5}, zero{0.0, 0.0};
    CHECK_THROWS_AS(Popularity::from_weights(inc), std::invalid_argument);
    CHECK_THROWS_AS(Popularity::from_weights(neg), std::invalid_argument);
    CHECK_THROWS_AS(Popularity::from_weights(zero), std::invalid_argument);
  }
}

TEST_CASE("placement of the six-file, three-group allocation") {
  const auto map = build_placement(alloc(3, {3, 2, 2, 2, 0, 0}), 3);
  CHECK(map.groups_of(0) == std::vector<int>{0, 1, 2});
  CHECK(map.groups_of(1) == std::vector<int>{0, 1});
  CHECK(map.groups_of(2) == std::vector<int>{0, 2});
  CHECK(map.groups_of(3) == std::vector<int>{1, 2});
  CHECK(map.groups_of(4).empty());
  CHECK(map.groups_of(5).empty());
  for (int m = 0; m < 3; ++m) CHECK(map.files_in(m).size() == 3);
  CHECK(map.files_in(0) == std::vector<int>{0, 1, 2});
  CHECK(map.files_in(1) == std::vector<int>{0, 1, 3});
  CHECK(map.files_in(2) == std::vector<int>{0, 2, 3});
  CHECK(map.stores(2, 3));
  CHECK_FALSE(map.stores(0, 3));
  CHECK_FALSE(map.cached(4));
}

TEST_CASE("placement small cases") {
  SUBCASE("single group holds every cached file") {
    const auto map = build_placement(alloc(1, {1, 1, 0}), 2);
    CHECK(map.groups_of(0) == std::vector<int>{0});
    CHECK(map.groups_of(1) == std::vector<int>{0});
    CHECK(map.groups_of(2).empty());
  }
  SUBCASE("wrap-around in the cache matrix") {
    const auto map = build_placement(alloc(3, {2, 2, 2}), 2);
    CHECK(map.groups_of(0) == std::vector<int>{0, 1});
    CHECK(map.groups_of(1) == std::vector<int>{0, 2});  // {2, 0} sorted
    CHECK(map.groups_of(2) == std::vector<int>{1, 2});
  }
  SUBCASE("infeasible allocations are rejected") {
    CHECK_THROWS_AS(build_placement(alloc(2, {1, 2}), 2), std::invalid_argument);
    CHECK_THROWS_AS(build_placement(alloc(2, {2, 2, 2}), 2), std::invalid_argument);
    CHECK_THROWS_AS(build_placement(alloc(2, {3}), 2), std::invalid_argument);
    CHECK_THROWS_AS(build_placement(alloc(0, {0}), 2), std::invalid_argument);
  }
}

TEST_CASE("allocation validation report") {
  CHECK(validate_allocation(alloc(3, {3, 2, 2, 2, 0, 0}), small_cfg(6, 3)).feasible());

  const auto ordering = validate_allocation(alloc(2, {1, 2}), small_cfg(2, 2));
  CHECK_FALSE(ordering.feasible());
  CHECK(has_kind(ordering, ViolationKind::Ordering));

  const auto capacity = validate_allocation(alloc(2, {2, 2, 2}), small_cfg(3, 2));
  CHECK(has_kind(capacity, ViolationKind::Capacity));
  CHECK(capacity.summary().find("6 > M*B_C = 4") != std::string::npos);

  // Every violated constraint is listed, not just the first.
  const auto many = validate_allocation(alloc(2, {1, 3, 5}), small_cfg(4, 1));
  CHECK(has_kind(many, ViolationKind::Ordering));
  CHECK(has_kind(many, ViolationKind::Bounds));
  CHECK(has_kind(many, ViolationKind::Capacity));
  CHECK(has_kind(many, ViolationKind::Length));

  CHECK(has_kind(validate_allocation(alloc(0, {0, 0}), small_cfg(2, 1)), ViolationKind::GroupCount));
}

TEST_CASE("system config validation") {
  SystemConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.users_per_bs() == doctest::Approx(10.0));
  CHECK(c.rate_ratio() == doctest::Approx(5e-3));
  auto bad = c;
  bad.pathloss_exp = 2.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.cache_files = c.library_size + 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.bs_density = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.backhaul_files = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("placement properties over random feasible allocations") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const int M = std::uniform_int_distribution<int>(1, 6)(rng);
    const int B_C = std::uniform_int_distribution<int>(1, 5)(rng);
    const int L = std::uniform_int_distribution<int>(1, 12)(rng);
    const auto a = (trial % 2 == 0 && L >= B_C) ? random_full(rng, L, M, B_C)
                                                : random_feasible(rng, L, M, B_C);
    REQUIRE(validate_allocation(a, small_cfg(L, B_C)).feasible());
    const auto map = build_placement(a, B_C);
    long filled = 0;
    for (int l = 0; l < L; ++l) {
      // |groups_of(l)| = q_l and the groups are distinct.
      const auto& g = map.groups_of(l);
      CHECK(static_cast<int>(g.size()) == a.q[l]);
      CHECK(std::adjacent_find(g.begin(), g.end()) == g.end());
      for (int m : g) CHECK(map.stores(m, l));
    }
    for (int m = 0; m < M; ++m) {
      const auto& files = map.files_in(m);
      CHECK(static_cast<int>(files.size()) <= B_C);
      for (int l : files) {
        const auto& g = map.groups_of(l);
        CHECK(std::binary_search(g.begin(), g.end(), m));
      }
      filled += static_cast<long>(files.size());
    }
    CHECK(filled == a.total());
    if (a.total() == static_cast<long>(M) * B_C)
      for (int m = 0; m < M; ++m) CHECK(static_cast<int>(map.files_in(m).size()) == B_C);
  }
}
