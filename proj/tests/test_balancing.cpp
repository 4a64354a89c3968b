#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "oreal/balancing.hpp"
#include "oreal/bruteforce.hpp"

using namespace oreal;

TEST_CASE("class_counts") {
  const std::vector<ClassId> labels{2, 2, 0};
  CHECK(class_counts(labels, 3) == ClassCounts{1, 0, 2});
  CHECK(class_counts({}, 3) == ClassCounts{0, 0, 0});
  const std::vector<ClassId> ones(10, 1);
  CHECK(class_counts(ones, 2) == ClassCounts{0, 10});
  const std::vector<ClassId> bad{3};
  CHECK_THROWS_AS(class_counts(bad, 3), Error);
}

TEST_CASE("items_per_class examples") {
  const ClassCounts a{3, 0, 1};
  CHECK(items_per_class(a, 3) == DebtVector{0, 2, 1});
  CHECK(balanced_level(a, items_per_class(a, 3)) == 2);
  const ClassCounts z{0, 0, 0};
  CHECK(items_per_class(z, 6) == DebtVector{2, 2, 2});
  const ClassCounts b{5, 5};
  CHECK(items_per_class(b, 3) == DebtVector{2, 1});
  CHECK(items_per_class(b, 0) == DebtVector{0, 0});
}

TEST_CASE("items_per_class rejects bad input") {
  const ClassCounts a{1, 2};
  CHECK_THROWS_AS(items_per_class(a, -1), Error);
  const ClassCounts neg{1, -2};
  CHECK_THROWS_AS(items_per_class(neg, 1), Error);
  CHECK_THROWS_AS(items_per_class({}, 1), Error);
}

TEST_CASE("items_per_class matches exhaustive search on small cases") {
  for (std::size_t classes = 1; classes <= 4; ++classes) {
    const auto sweep = oracle::sweep_items_per_class(classes, 6, 6);
    CHECK(sweep.cases > 0);
    CHECK(sweep.mismatches == 0);
  }
}

TEST_CASE("exhaustive search agrees with hand-computed optima") {
  const ClassCounts a{3, 0, 1};
  CHECK(oracle::best_balanced_level(a, 3) == 2);
  const ClassCounts b{5, 5};
  CHECK(oracle::best_balanced_level(b, 3) == 6);
}

TEST_CASE("items_per_class conserves budget, is monotone and permutation equivariant") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::int64_t> count(0, 40);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t classes = 1 + trial % 6;
    ClassCounts n(classes);
    for (auto& v : n) v = count(rng);
    std::int64_t prev = std::numeric_limits<std::int64_t>::min();
    for (std::int64_t q = 0; q <= 30; ++q) {
      const auto d = items_per_class(n, q);
      CHECK(std::accumulate(d.begin(), d.end(), std::int64_t{0}) == q);
      for (const auto x : d) CHECK(x >= 0);
      const auto level = balanced_level(n, d);
      CHECK(level >= prev);
      prev = level;
    }

    std::vector<std::size_t> perm(classes);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    ClassCounts permuted(classes);
    for (std::size_t c = 0; c < classes; ++c) permuted[c] = n[perm[c]];
    const std::int64_t q = trial % 25;
    const auto d = items_per_class(n, q);
    const auto dp = items_per_class(permuted, q);
    const auto level = balanced_level(n, d);
    CHECK(balanced_level(permuted, dp) == level);
    for (std::size_t c = 0; c < classes; ++c) {
      if (dp[c] == d[perm[c]]) continue;
      // only classes sitting at the water level may trade the remainder
      CHECK(permuted[c] + dp[c] >= level);
      CHECK(permuted[c] + dp[c] <= level + 1);
      CHECK(n[perm[c]] + d[perm[c]] <= level + 1);
    }
  }
}
