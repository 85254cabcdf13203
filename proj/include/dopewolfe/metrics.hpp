#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "dopewolfe/errors.hpp"
#include "dopewolfe/features.hpp"

namespace dopewolfe {

enum class GainKind { linear, exponential };

struct GainSpec {
  GainKind kind = GainKind::linear;
  double temperature = 0.1;  // exponential gain: exp(relevance / temperature)

  double operator()(double relevance) const {
    return kind == GainKind::linear ? relevance : std::exp(relevance / temperature);
  }
};

struct EvaluationReport {
  double ranking_loss = 0.0;
  double ndcg = 0.0;
  int ndcg_cutoff = 0;
  GainSpec gain;
  std::vector<double> per_list_loss;
  std::vector<double> per_list_ndcg;
};

namespace detail {
inline void check_permutation(const std::vector<int>& perm, const char* label) {
  std::vector<char> seen(perm.size(), 0);
  for (int v : perm) {
    if (v < 0 || v >= static_cast<int>(perm.size()) || seen[v])
      throw validation_error(std::string(label) + " is not a permutation");
    seen[v] = 1;
  }
}

/// Merge-sort inversion count (pairs out of ascending order).
inline std::uint64_t count_inversions(std::vector<int>& values) {
  const std::size_t n = values.size();
  std::vector<int> buffer(n);
  std::uint64_t inversions = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, out = lo;
      while (i < mid && j < hi) {
        if (values[i] <= values[j]) {
          buffer[out++] = values[i++];
        } else {
          inversions += mid - i;  // values[i..mid) all exceed values[j]
          buffer[out++] = values[j++];
        }
      }
      while (i < mid) buffer[out++] = values[i++];
      while (j < hi) buffer[out++] = values[j++];
      std::copy(buffer.begin() + lo, buffer.begin() + hi, values.begin() + lo);
    }
  }
  return inversions;
}
}  // namespace detail

/// Items of one list sorted by descending score x_k . theta, ties broken by
/// ascending item index. Local indices, one vector per list.
inline std::vector<std::vector<int>> induced_permutation(const Eigen::VectorXd& theta,
                                                         const ItemFeatureMatrix& features) {
  std::vector<std::vector<int>> result(features.list_count());
  const Eigen::VectorXd scores = features.rows() * theta;
  for (int m = 0; m < features.list_count(); ++m) {
    auto& perm = result[m];
    perm.resize(features.list_size(m));
    std::iota(perm.begin(), perm.end(), 0);
    const int offset = features.list_offset(m);
    std::sort(perm.begin(), perm.end(), [&](int a, int b) {
      const double sa = scores[offset + a], sb = scores[offset + b];
      return sa != sb ? sa > sb : a < b;
    });
  }
  return result;
}

/// Fraction of item pairs the two permutations order differently (normalized
/// Kendall tau distance). O(N log N) by inversion counting.
inline double ranking_loss(const std::vector<int>& sigma_hat, const std::vector<int>& true_order) {
  const std::size_t n = sigma_hat.size();
  if (n < 2) throw validation_error("ranking loss needs at least 2 items");
  if (true_order.size() != n)
    throw validation_error("ranking loss: permutations have different lengths");
  detail::check_permutation(sigma_hat, "sigma_hat");
  detail::check_permutation(true_order, "true_order");

  std::vector<int> position(n);
  for (std::size_t p = 0; p < n; ++p) position[sigma_hat[p]] = static_cast<int>(p);
  std::vector<int> sequence(n);
  for (std::size_t p = 0; p < n; ++p) sequence[p] = position[true_order[p]];

  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  return static_cast<double>(detail::count_inversions(sequence)) / static_cast<double>(pairs);
}

/// Ranking loss against real-valued true scores. Pairs tied in true score
/// carry no order information and are excluded from both numerator and
/// denominator; returns 0 when every pair is tied.
inline double ranking_loss_against_scores(const std::vector<int>& sigma_hat,
                                          const std::vector<double>& true_scores) {
  const std::size_t n = sigma_hat.size();
  if (n < 2) throw validation_error("ranking loss needs at least 2 items");
  if (true_scores.size() != n)
    throw validation_error("ranking loss: scores/permutation length mismatch");
  detail::check_permutation(sigma_hat, "sigma_hat");

  std::uint64_t misordered = 0, comparable = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const double sa = true_scores[sigma_hat[a]], sb = true_scores[sigma_hat[b]];
      if (sa == sb) continue;
      ++comparable;
      if (sa < sb) ++misordered;  // placed earlier despite a lower true score
    }
  if (comparable == 0) return 0.0;
  return static_cast<double>(misordered) / static_cast<double>(comparable);
}

/// NDCG at cutoff k with discount log2(position + 1). A list whose ideal DCG
/// is zero carries no information and scores 1.
inline double ndcg_at_k(const std::vector<int>& sigma_hat, const std::vector<double>& relevance,
                        int k, GainSpec gain = {}) {
  const std::size_t n = sigma_hat.size();
  if (k < 1) throw validation_error("ndcg cutoff must be >= 1");
  if (relevance.size() != n) throw validation_error("ndcg: relevance/permutation length mismatch");
  for (double rel : relevance)
    if (!std::isfinite(rel)) throw validation_error("ndcg: relevance must be finite");
  detail::check_permutation(sigma_hat, "sigma_hat");

  const std::size_t cutoff = std::min<std::size_t>(k, n);
  double dcg = 0.0;
  for (std::size_t p = 0; p < cutoff; ++p)
    dcg += gain(relevance[sigma_hat[p]]) / std::log2(static_cast<double>(p) + 2.0);

  std::vector<double> ideal = relevance;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double ideal_dcg = 0.0;
  for (std::size_t p = 0; p < cutoff; ++p)
    ideal_dcg += gain(ideal[p]) / std::log2(static_cast<double>(p) + 2.0);

  if (ideal_dcg == 0.0) return 1.0;
  return dcg / ideal_dcg;
}

}  // namespace dopewolfe
