#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "dopewolfe/errors.hpp"
#include "dopewolfe/int128.hpp"
#include "dopewolfe/random.hpp"

namespace dopewolfe {

/// A K-subset of one list. Items are strictly increasing indices local to
/// the list (always in [0, list size)); list_id is 0 for single-list problems.
struct Subset {
  int list_id = 0;
  std::vector<int> items;

  friend bool operator==(const Subset& a, const Subset& b) {
    return a.list_id == b.list_id && a.items == b.items;
  }
};

/// Checked n-choose-k in 128-bit arithmetic. Throws capacity_error when an
/// intermediate product leaves the 128-bit range (conservative by at most a
/// factor of n relative to the true value).
inline uint128 binomial(int n, int k) {
  if (n < 0 || k < 0) throw validation_error("binomial: negative argument");
  if (k > n) return 0;
  const int kk = std::min(k, n - k);
  uint128 result = 1;
  for (int i = 1; i <= kk; ++i) {
    uint128 next;
    if (__builtin_mul_overflow(result, uint128(n - kk + i), &next))
      throw capacity_error("binomial(" + std::to_string(n) + "," + std::to_string(k) +
                           ") exceeds the 128-bit index range");
    result = next / uint128(i);
  }
  return result;
}

/// Calls fn(items) for every K-subset of [0, n) in colexicographic order.
/// items is reused between calls; fn must not hold a reference.
template <class Fn>
void for_each_subset_colex(int n, int k, Fn&& fn) {
  if (k < 0 || k > n) return;
  std::vector<int> items(k);
  std::iota(items.begin(), items.end(), 0);
  for (;;) {
    fn(static_cast<const std::vector<int>&>(items));
    if (k == 0) return;
    // colex successor: bump the lowest item with room, reset those below it
    int i = 0;
    while (i < k) {
      const int limit = (i + 1 < k) ? items[i + 1] : n;
      if (items[i] + 1 < limit) break;
      ++i;
    }
    if (i == k) return;
    ++items[i];
    std::iota(items.begin(), items.begin() + i, 0);
  }
}

/// Bijective indexing of all K-subsets of one or more lists. Subsets of list
/// m occupy the contiguous index block [offset(m), offset(m) + C(N_m, K)),
/// ordered colexicographically (combinadics) within the block.
class SubsetCollection {
 public:
  SubsetCollection(int n_items, int subset_size)
      : SubsetCollection(std::vector<int>{n_items}, subset_size) {}

  SubsetCollection(std::vector<int> list_sizes, int subset_size)
      : list_sizes_(std::move(list_sizes)), k_(subset_size) {
    if (list_sizes_.empty()) throw validation_error("subset collection: at least one list required");
    if (k_ < 1) throw validation_error("subset collection: subset size must be >= 1");
    offsets_.reserve(list_sizes_.size() + 1);
    offsets_.push_back(0);
    for (std::size_t m = 0; m < list_sizes_.size(); ++m) {
      const int n = list_sizes_[m];
      if (n < k_)
        throw validation_error("subset collection: list " + std::to_string(m) + " has " +
                               std::to_string(n) + " items, fewer than subset size " +
                               std::to_string(k_));
      uint128 next;
      if (__builtin_add_overflow(offsets_.back(), binomial(n, k_), &next))
        throw capacity_error("subset collection cardinality exceeds the 128-bit index range");
      offsets_.push_back(next);
    }
  }

  int k() const { return k_; }
  int list_count() const { return static_cast<int>(list_sizes_.size()); }
  int list_size(int list) const { return list_sizes_[list]; }
  const std::vector<int>& list_sizes() const { return list_sizes_; }
  uint128 cardinality() const { return offsets_.back(); }
  uint128 list_offset(int list) const { return offsets_[list]; }
  uint128 list_cardinality(int list) const { return offsets_[list + 1] - offsets_[list]; }

  void validate(const Subset& subset) const {
    if (subset.list_id < 0 || subset.list_id >= list_count())
      throw validation_error("subset list_id " + std::to_string(subset.list_id) + " out of range");
    if (static_cast<int>(subset.items.size()) != k_)
      throw validation_error("subset has " + std::to_string(subset.items.size()) +
                             " items, expected " + std::to_string(k_));
    const int n = list_sizes_[subset.list_id];
    int prev = -1;
    for (int item : subset.items) {
      if (item < 0 || item >= n)
        throw validation_error("subset item " + std::to_string(item) + " outside [0, " +
                               std::to_string(n) + ")");
      if (item <= prev) throw validation_error("subset items must be strictly increasing");
      prev = item;
    }
  }

  /// Combinadic (colexicographic) rank plus the subset's list offset.
  uint128 rank(const Subset& subset) const {
    validate(subset);
    uint128 r = 0;
    for (int i = 0; i < k_; ++i) r += binomial(subset.items[i], i + 1);
    return offsets_[subset.list_id] + r;
  }

  Subset unrank(uint128 index) const {
    if (index >= cardinality())
      throw std::out_of_range("subset index " + to_string(index) + " >= cardinality " +
                              to_string(cardinality()));
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
    const int list = static_cast<int>(it - offsets_.begin()) - 1;
    uint128 x = index - offsets_[list];

    Subset subset;
    subset.list_id = list;
    subset.items.resize(k_);
    for (int i = k_; i >= 1; --i) {
      // largest c with C(c, i) <= x, found by walking C(c, i) upward
      int c = i - 1;
      uint128 value = 0;  // C(c, i)
      for (;;) {
        uint128 next;
        if (c + 1 == i) {
          next = 1;
        } else {
          uint128 t;
          if (__builtin_mul_overflow(value, uint128(c + 1), &t)) break;  // next certainly > x
          next = t / uint128(c + 1 - i);
        }
        if (next > x) break;
        value = next;
        ++c;
      }
      subset.items[i - 1] = c;
      x -= value;
    }
    return subset;
  }

  /// R distinct indices drawn uniformly from [0, cardinality), ascending.
  /// Rejection sampling; intended for R well below the cardinality.
  std::vector<uint128> sample_indices(std::uint64_t count, Rng& rng) const {
    if (count < 1) throw validation_error("sample size must be >= 1");
    if (uint128(count) > cardinality())
      throw validation_error("sample size " + std::to_string(count) + " exceeds cardinality " +
                             to_string(cardinality()));
    std::vector<uint128> indices;
    indices.reserve(count);
    if (uint128(count) == cardinality()) {
      for (uint128 i = 0; i < cardinality(); ++i) indices.push_back(i);
      return indices;
    }
    std::set<uint128> seen;
    while (seen.size() < count) seen.insert(uniform_below_u128(rng, cardinality()));
    indices.assign(seen.begin(), seen.end());
    return indices;
  }

  std::vector<Subset> sample_subcollection(std::uint64_t count, Rng& rng) const {
    std::vector<Subset> subsets;
    subsets.reserve(count);
    for (uint128 index : sample_indices(count, rng)) subsets.push_back(unrank(index));
    return subsets;
  }

 private:
  std::vector<int> list_sizes_;
  int k_;
  std::vector<uint128> offsets_;  // size list_count()+1, offsets_[0] = 0
};

}  // namespace dopewolfe
