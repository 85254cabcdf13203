#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "dopewolfe/combinatorics.hpp"

using namespace dopewolfe;

namespace {

// Independent oracle: enumerate every K-subset, then sort colexicographically
// (compare reversed item sequences).
std::vector<std::vector<int>> all_subsets_colex(int n, int k) {
  std::vector<std::vector<int>> subsets;
  std::vector<int> current;
  std::function<void(int)> recurse = [&](int next) {
    if (static_cast<int>(current.size()) == k) {
      subsets.push_back(current);
      return;
    }
    for (int i = next; i < n; ++i) {
      current.push_back(i);
      recurse(i + 1);
      current.pop_back();
    }
  };
  recurse(0);
  std::sort(subsets.begin(), subsets.end(), [](const auto& a, const auto& b) {
    return std::lexicographical_compare(a.rbegin(), a.rend(), b.rbegin(), b.rend());
  });
  return subsets;
}

}  // namespace

TEST_CASE("binomial basics and overflow") {
  REQUIRE(binomial(4, 2) == uint128(6));
  REQUIRE(binomial(5, 0) == uint128(1));
  REQUIRE(binomial(0, 0) == uint128(1));
  REQUIRE(binomial(5, 6) == uint128(0));
  REQUIRE(binomial(100, 10) == parse_uint128("17310309456440"));
  REQUIRE_THROWS_AS(binomial(500, 250), capacity_error);
  REQUIRE_THROWS_AS(binomial(-1, 0), validation_error);
}

TEST_CASE("rank: colexicographic combinadic order") {
  SubsetCollection coll(4, 2);
  REQUIRE(coll.cardinality() == uint128(6));
  REQUIRE(coll.rank({0, {0, 1}}) == uint128(0));
  REQUIRE(coll.rank({0, {2, 3}}) == uint128(5));
  REQUIRE(coll.rank({0, {1, 2}}) == uint128(2));  // frozen from the enumeration oracle

  const auto oracle = all_subsets_colex(4, 2);
  for (std::size_t i = 0; i < oracle.size(); ++i)
    REQUIRE(coll.rank({0, oracle[i]}) == uint128(i));
}

TEST_CASE("unrank inverts rank") {
  SubsetCollection coll(4, 2);
  REQUIRE(coll.unrank(0).items == std::vector<int>{0, 1});
  REQUIRE(coll.unrank(5).items == std::vector<int>{2, 3});
  REQUIRE(coll.unrank(2).items == std::vector<int>{1, 2});
  REQUIRE_THROWS_AS(coll.unrank(6), std::out_of_range);
}

TEST_CASE("exhaustive round-trip and ordering against the oracle") {
  for (int n = 1; n <= 9; ++n) {
    for (int k = 1; k <= n; ++k) {
      SubsetCollection coll(n, k);
      const auto oracle = all_subsets_colex(n, k);
      REQUIRE(coll.cardinality() == uint128(oracle.size()));
      for (std::size_t i = 0; i < oracle.size(); ++i) {
        const Subset s = coll.unrank(i);
        REQUIRE(s.items == oracle[i]);
        REQUIRE(coll.rank(s) == uint128(i));
      }
    }
  }
}

TEST_CASE("for_each_subset_colex visits the oracle order") {
  for (int n : {1, 4, 6}) {
    for (int k = 1; k <= n; ++k) {
      const auto oracle = all_subsets_colex(n, k);
      std::size_t at = 0;
      for_each_subset_colex(n, k, [&](const std::vector<int>& items) {
        REQUIRE(at < oracle.size());
        REQUIRE(items == oracle[at]);
        ++at;
      });
      REQUIRE(at == oracle.size());
    }
  }
}

TEST_CASE("multi-list index blocks are contiguous and disjoint") {
  SubsetCollection coll({4, 7, 5}, 2);
  REQUIRE(coll.list_count() == 3);
  REQUIRE(coll.list_offset(0) == uint128(0));
  REQUIRE(coll.list_offset(1) == binomial(4, 2));
  REQUIRE(coll.list_offset(2) == binomial(4, 2) + binomial(7, 2));
  REQUIRE(coll.cardinality() == binomial(4, 2) + binomial(7, 2) + binomial(5, 2));

  // every index round-trips, and the list is recovered from the block
  for (uint128 i = 0; i < coll.cardinality(); ++i) {
    const Subset s = coll.unrank(i);
    REQUIRE(coll.rank(s) == i);
    REQUIRE(uint128(i) >= coll.list_offset(s.list_id));
    REQUIRE(uint128(i) < coll.list_offset(s.list_id) + coll.list_cardinality(s.list_id));
  }

  // within-list ranks are the single-list ranks shifted by the offset
  SubsetCollection middle(7, 2);
  for (uint128 i = 0; i < middle.cardinality(); ++i) {
    Subset s = middle.unrank(i);
    s.list_id = 1;
    REQUIRE(coll.rank(s) == coll.list_offset(1) + i);
  }
}

TEST_CASE("subset validation errors") {
  SubsetCollection coll({4, 7}, 2);
  REQUIRE_THROWS_AS(coll.rank({0, {0, 1, 2}}), validation_error);  // wrong size
  REQUIRE_THROWS_AS(coll.rank({0, {1, 4}}), validation_error);     // out of range for list 0
  REQUIRE_NOTHROW(coll.rank({1, {1, 4}}));
  REQUIRE_THROWS_AS(coll.rank({0, {2, 1}}), validation_error);  // not increasing
  REQUIRE_THROWS_AS(coll.rank({0, {1, 1}}), validation_error);  // duplicate
  REQUIRE_THROWS_AS(coll.rank({2, {0, 1}}), validation_error);  // bad list
  REQUIRE_THROWS_AS(SubsetCollection(3, 4), validation_error);  // K > N
}

TEST_CASE("collection capacity failure is loud") {
  REQUIRE_THROWS_AS(SubsetCollection(500, 250), capacity_error);
}

TEST_CASE("sampling: full collection when R equals the cardinality") {
  SubsetCollection coll(5, 3);
  Rng rng(7);
  const auto subsets = coll.sample_subcollection(10, rng);
  REQUIRE(subsets.size() == 10);
  std::set<std::vector<int>> unique;
  for (const auto& s : subsets) unique.insert(s.items);
  REQUIRE(unique.size() == 10);
}

TEST_CASE("sampling: distinct, valid, and repeatable under a fixed seed") {
  SubsetCollection coll(5, 2);
  Rng rng_a(123), rng_b(123);
  const auto first = coll.sample_subcollection(3, rng_a);
  const auto second = coll.sample_subcollection(3, rng_b);
  REQUIRE(first.size() == 3);
  std::set<uint128> indices;
  for (const auto& s : first) {
    REQUIRE_NOTHROW(coll.validate(s));
    indices.insert(coll.rank(s));
  }
  REQUIRE(indices.size() == 3);
  for (std::size_t i = 0; i < first.size(); ++i) REQUIRE(first[i] == second[i]);

  REQUIRE_THROWS_AS(coll.sample_subcollection(11, rng_a), validation_error);
  REQUIRE_THROWS_AS(coll.sample_subcollection(0, rng_a), validation_error);
}

TEST_CASE("sampling marginals are uniform (3-sigma binomial band)") {
  SubsetCollection coll(5, 2);
  const int draws = 100000;
  std::map<uint128, int> counts;
  Rng rng(2024);
  for (int i = 0; i < draws; ++i) counts[coll.sample_indices(1, rng)[0]] += 1;
  const double p = 0.1;
  const double sigma = std::sqrt(p * (1 - p) / draws);
  for (uint128 i = 0; i < coll.cardinality(); ++i) {
    const double freq = counts[i] / static_cast<double>(draws);
    REQUIRE(std::abs(freq - p) <= 3 * sigma);
  }
}

TEST_CASE("128-bit string round trip") {
  REQUIRE(to_string(uint128(0)) == "0");
  REQUIRE(to_string((uint128(1) << 100)) == "1267650600228229401496703205376");
  REQUIRE(parse_uint128("1267650600228229401496703205376") == (uint128(1) << 100));
  REQUIRE_THROWS_AS(parse_uint128("not-a-number"), validation_error);
  REQUIRE_THROWS_AS(parse_uint128("999999999999999999999999999999999999999999"), capacity_error);
}
