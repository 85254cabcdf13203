#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "dopewolfe/combinatorics.hpp"
#include "dopewolfe/features.hpp"
#include "dopewolfe/int128.hpp"

namespace dopewolfe {

/// Sparse distribution over subset indices of a collection. Support is tiny
/// relative to the collection; the map keeps indices in ascending order so
/// iteration (and tie handling downstream) is deterministic.
struct DesignDistribution {
  SubsetCollection collection;
  std::map<uint128, double> weights;

  void validate() const {
    double total = 0.0;
    for (const auto& [index, weight] : weights) {
      if (index >= collection.cardinality())
        throw validation_error("design weight on index " + to_string(index) +
                               " outside the collection");
      if (!(weight >= 0.0)) throw validation_error("design weights must be nonnegative");
      total += weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw validation_error("design weights sum to " + std::to_string(total) + ", expected 1");
  }

  std::size_t support_size() const { return weights.size(); }
};

/// z_{jk} = x_j - x_k for two items of the same list (global row indices).
inline Eigen::VectorXd pair_difference(const ItemFeatureMatrix& features, int j, int k) {
  if (j == k) throw validation_error("pair difference requires two distinct items");
  if (features.list_of(j) != features.list_of(k))
    throw validation_error("pair difference across lists (items " + std::to_string(j) + ", " +
                           std::to_string(k) + ")");
  return features.row(j) - features.row(k);
}

/// d x r matrix whose columns are z_{jk} for the C(K,2) pairs of the subset,
/// ordered lexicographically by (j, k) with j < k.
inline Eigen::MatrixXd subset_matrix(const ItemFeatureMatrix& features, const Subset& subset) {
  const int k = static_cast<int>(subset.items.size());
  const int r = k * (k - 1) / 2;
  Eigen::MatrixXd a(features.dim(), r);
  int col = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const int gi = features.global_index(subset.list_id, subset.items[i]);
      const int gj = features.global_index(subset.list_id, subset.items[j]);
      a.col(col++) = features.row(gi) - features.row(gj);
    }
  return a;
}

/// Regularized information matrix of a design with its inverse and log-det.
struct InfoMatrixState {
  Eigen::MatrixXd V;
  Eigen::MatrixXd V_inv;
  double gamma = 0.0;
  double log_det = 0.0;

  /// max |V * V_inv - I|, for on-demand consistency checks.
  double inverse_residual() const {
    const long d = V.rows();
    return (V * V_inv - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  }
};

namespace detail {
inline double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

inline int symmetric_rank(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
  return static_cast<int>((es.eigenvalues().array() > 1e-12 * scale).count());
}
}  // namespace detail

/// V = sum_S pi(S) A_S A_S^T + gamma I, inverted by direct factorization.
inline InfoMatrixState information_matrix(const DesignDistribution& pi,
                                          const ItemFeatureMatrix& features, double gamma) {
  if (gamma < 0.0) throw validation_error("gamma must be nonnegative");
  if (features.list_sizes() != pi.collection.list_sizes())
    throw validation_error("design collection does not match the feature lists");
  pi.validate();

  const int d = features.dim();
  InfoMatrixState state;
  state.gamma = gamma;
  state.V = gamma * Eigen::MatrixXd::Identity(d, d);
  for (const auto& [index, weight] : pi.weights) {
    if (weight == 0.0) continue;
    const Eigen::MatrixXd a = subset_matrix(features, pi.collection.unrank(index));
    state.V.noalias() += weight * (a * a.transpose());
  }

  Eigen::LLT<Eigen::MatrixXd> llt(state.V);
  if (llt.info() != Eigen::Success) {
    const int rank = detail::symmetric_rank(state.V);
    throw singular_matrix_error("information matrix is singular: support spans rank " +
                                std::to_string(rank) + " of " + std::to_string(d) +
                                (gamma == 0.0 ? " with gamma = 0" : ""));
  }
  state.V_inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  state.V_inv = ((state.V_inv + state.V_inv.transpose()) / 2.0).eval();
  state.log_det = detail::log_det_from_llt(llt);
  return state;
}

/// Cached pair derivatives D_{jk} = z_{jk}^T V_inv z_{jk} for every within-
/// list pair. Entry (j, k), j < k, of list m lives at pair_index(j, k).
struct PairGradientTable {
  std::vector<std::vector<double>> lists;

  static std::size_t pair_index(int j, int k) {
    return static_cast<std::size_t>(k) * (k - 1) / 2 + j;
  }
  double at(int list, int j, int k) const { return lists[list][pair_index(j, k)]; }
};

inline PairGradientTable pair_gradient_table(const Eigen::MatrixXd& V_inv,
                                             const ItemFeatureMatrix& features) {
  PairGradientTable table;
  table.lists.resize(features.list_count());
  for (int m = 0; m < features.list_count(); ++m) {
    const int n = features.list_size(m);
    const auto x = features.rows().middleRows(features.list_offset(m), n);
    const Eigen::MatrixXd w = x * V_inv;  // row j holds x_j^T V_inv
    auto& values = table.lists[m];
    values.resize(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int k = 1; k < n; ++k)
      for (int j = 0; j < k; ++j)
        values[PairGradientTable::pair_index(j, k)] =
            (x.row(j) - x.row(k)).dot(w.row(j) - w.row(k));
  }
  return table;
}

/// Partial derivative of the log-det objective in the direction of a subset:
/// the sum of the subset's C(K,2) cached pair entries, <A_S A_S^T, V_inv>.
inline double subset_gradient(const PairGradientTable& table, int list_id,
                              const std::vector<int>& items) {
  const auto& values = table.lists[list_id];
  const int k = static_cast<int>(items.size());
  double total = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      total += values[PairGradientTable::pair_index(items[i], items[j])];
  return total;
}

inline double subset_gradient(const PairGradientTable& table, const Subset& subset) {
  return subset_gradient(table, subset.list_id, subset.items);
}

}  // namespace dopewolfe
