#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dopewolfe/combinatorics.hpp"
#include "dopewolfe/design_objective.hpp"
#include "dopewolfe/errors.hpp"
#include "dopewolfe/features.hpp"
#include "dopewolfe/random.hpp"

namespace dopewolfe {

enum class LmoMode { randomized, full };

struct SolverConfig {
  std::uint64_t lmo_sample_size = 100000;  // R, clamped to the cardinality
  int iterations = 1000;
  double gamma = 1e-6;
  double alpha_tol = 1e-16;
  LmoMode lmo_mode = LmoMode::randomized;
  std::uint64_t seed = 0;
  int inverse_refresh_period = 0;  // 0 = never re-factorize
  bool refresh_gamma = false;      // on refresh, reset the decayed gamma to its initial value
  double stop_gap = 0.0;           // >0: stop in full mode once max_S G(S) - d drops below

  void validate() const {
    if (lmo_sample_size < 1) throw validation_error("solver: lmo_sample_size must be >= 1");
    if (iterations < 1) throw validation_error("solver: iterations must be >= 1");
    if (!(alpha_tol > 0.0 && alpha_tol < 1.0))
      throw validation_error("solver: alpha_tol must be in (0, 1)");
    if (gamma < 0.0) throw validation_error("solver: gamma must be >= 0");
    if (inverse_refresh_period < 0)
      throw validation_error("solver: inverse_refresh_period must be >= 0");
  }
};

struct IterationRecord {
  double objective = 0.0;  // after this iteration's update
  uint128 chosen_index = 0;
  double alpha = 0.0;
  double max_gradient = 0.0;  // best LMO candidate score
  std::size_t support_size = 0;
  double seconds = 0.0;  // elapsed since solve() started
};

struct SolverTrace {
  double initial_objective = 0.0;
  std::vector<IterationRecord> iterations;
};

/// Objective change g((1-alpha) pi + alpha e_S) - g(pi) without touching the
/// d x d factorization: d log(1-alpha) + log det(I_r + a/(1-a) A^T V_inv A).
inline double update_log_det(const Eigen::MatrixXd& V_inv, const Eigen::MatrixXd& A,
                             double alpha) {
  if (!(alpha >= 0.0) || alpha >= 1.0)
    throw std::domain_error("update_log_det: alpha must be in [0, 1)");
  if (alpha == 0.0) return 0.0;
  const long d = V_inv.rows();
  const long r = A.cols();
  const double scale = alpha / (1.0 - alpha);
  Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(r, r) + scale * (A.transpose() * V_inv * A);
  inner = ((inner + inner.transpose()) / 2.0).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(inner);
  if (llt.info() != Eigen::Success)
    throw numerical_error("update_log_det: inner matrix is not positive definite");
  return static_cast<double>(d) * std::log1p(-alpha) + detail::log_det_from_llt(llt);
}

/// Woodbury update of the inverse: ((1-alpha) V + alpha A A^T)^{-1} from
/// V^{-1} and an r x r solve. Output is symmetrized.
inline Eigen::MatrixXd update_inverse(const Eigen::MatrixXd& V_inv, const Eigen::MatrixXd& A,
                                      double alpha) {
  if (!(alpha >= 0.0) || alpha >= 1.0)
    throw std::domain_error("update_inverse: alpha must be in [0, 1)");
  if (alpha == 0.0) return V_inv;
  const long r = A.cols();
  const Eigen::MatrixXd V_tilde = V_inv / (1.0 - alpha);
  const Eigen::MatrixXd U = std::sqrt(alpha) * (V_tilde * A);  // = V~ A~, d x r
  Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(r, r) + alpha * (A.transpose() * V_tilde * A);
  inner = ((inner + inner.transpose()) / 2.0).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(inner);
  if (llt.info() != Eigen::Success)
    throw numerical_error("update_inverse: inner matrix is not positive definite");
  Eigen::MatrixXd result = V_tilde - U * llt.solve(U.transpose());
  return ((result + result.transpose()) / 2.0).eval();
}

struct GoldenSearchResult {
  double alpha = 0.0;
  int iterations = 0;  // bracket shrinks performed
};

/// Golden-section maximization of a unimodal objective on [0, 1]: two probe
/// evaluations up front, then exactly one per bracket shrink until the
/// bracket is narrower than tol. Probes stay strictly inside (0, 1).
template <class F>
GoldenSearchResult golden_section_max(F&& objective, double tol) {
  if (!(tol > 0.0 && tol < 1.0)) throw validation_error("golden search: tol must be in (0, 1)");
  const double inv_phi = 2.0 / (1.0 + std::sqrt(5.0));
  const double inv_phi2 = inv_phi * inv_phi;
  double a = 0.0, b = 1.0, h = 1.0;
  double c = a + inv_phi2 * h;
  double d = a + inv_phi * h;
  double fc = objective(c);
  double fd = objective(d);
  int shrinks = 0;
  while (std::abs(b - a) >= tol) {
    h *= inv_phi;
    // Ties (within a few ulps of the evaluations) keep the left bracket, so
    // numerically flat objectives resolve to alpha ~ 0 instead of wandering.
    const double tie =
        8 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(fc) + std::abs(fd));
    if (fc >= fd - tie) {
      b = d;
      d = c;
      fd = fc;
      c = a + inv_phi2 * h;
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * h;
      fd = objective(d);
    }
    ++shrinks;
  }
  return {(a + b) / 2.0, shrinks};
}

/// Line search for the Frank-Wolfe stepsize: maximizes the low-rank log-det
/// delta of mixing the current design with the one-hot design on A's subset.
inline GoldenSearchResult golden_search(const Eigen::MatrixXd& V_inv, const Eigen::MatrixXd& A,
                                        double alpha_tol) {
  return golden_section_max([&](double alpha) { return update_log_det(V_inv, A, alpha); },
                            alpha_tol);
}

/// One uniformly chosen subset per list when gamma > 0 (the regularizer
/// covers the rank gap). With gamma = 0, seeds ceil(d / C(K,2)) subsets and
/// insists on a full-rank information matrix, retrying a bounded number of
/// draws before giving up.
inline DesignDistribution default_initial_design(const SubsetCollection& collection,
                                                 const ItemFeatureMatrix& features, double gamma,
                                                 Rng& rng) {
  if (gamma > 0.0) {
    DesignDistribution pi{collection, {}};
    const double w = 1.0 / collection.list_count();
    for (int m = 0; m < collection.list_count(); ++m) {
      const uint128 index =
          collection.list_offset(m) + uniform_below_u128(rng, collection.list_cardinality(m));
      pi.weights[index] += w;
    }
    return pi;
  }

  const int r = collection.k() * (collection.k() - 1) / 2;
  std::uint64_t need = std::max<std::uint64_t>(1, (features.dim() + r - 1) / r);
  if (uint128(need) > collection.cardinality())
    need = static_cast<std::uint64_t>(collection.cardinality());
  for (int attempt = 0; attempt < 32; ++attempt) {
    DesignDistribution pi{collection, {}};
    for (uint128 index : collection.sample_indices(need, rng))
      pi.weights[index] = 1.0 / static_cast<double>(need);
    try {
      information_matrix(pi, features, 0.0);
      return pi;
    } catch (const singular_matrix_error&) {
      continue;
    }
  }
  throw singular_matrix_error(
      "initial design: could not seed a full-rank information matrix with gamma = 0");
}

struct SolveResult {
  DesignDistribution design;
  SolverTrace trace;
  Eigen::MatrixXd final_V_inv;
  double final_gamma = 0.0;  // initial gamma decayed by prod(1 - alpha_t)
  double final_objective = 0.0;
};

namespace detail {
inline std::map<uint128, double> materialize_design(const std::map<uint128, double>& raw,
                                                    double multiplier) {
  std::map<uint128, double> weights;
  for (const auto& [index, weight] : raw) weights[index] = weight * multiplier;
  return weights;
}
}  // namespace detail

/// Frank-Wolfe on the simplex of subset distributions maximizing
/// log det(V_pi + gamma I). Per iteration: draw the LMO candidate set (a
/// uniform sub-collection, or everything in full mode), score candidates
/// against the cached pair-derivative table, take the best subset (ties to
/// the lowest index), golden-section the stepsize, then apply sparse iterate
/// and Woodbury inverse updates.
inline SolveResult solve(const ItemFeatureMatrix& features, const SubsetCollection& collection,
                         std::optional<DesignDistribution> pi0, const SolverConfig& config) {
  config.validate();
  if (features.list_sizes() != collection.list_sizes())
    throw validation_error("solver: collection does not match the feature lists");

  Rng rng = make_rng(config.seed, {0x501feu});
  DesignDistribution initial =
      pi0 ? std::move(*pi0) : default_initial_design(collection, features, config.gamma, rng);

  InfoMatrixState state;
  try {
    state = information_matrix(initial, features, config.gamma);
  } catch (const singular_matrix_error& e) {
    throw singular_matrix_error(std::string("solver initialization: ") + e.what());
  }

  const int d = features.dim();
  Eigen::MatrixXd V_inv = state.V_inv;
  double objective = state.log_det;
  double gamma_eff = config.gamma;

  // Sparse iterate as multiplier * raw: the (1 - alpha) rescale folds into
  // the multiplier, so an update is O(1) plus one map insert.
  std::map<uint128, double> raw = initial.weights;
  double multiplier = 1.0;

  const std::uint64_t sample_size =
      collection.cardinality() > uint128(config.lmo_sample_size)
          ? config.lmo_sample_size
          : static_cast<std::uint64_t>(collection.cardinality());
  const bool enumerate_all =
      config.lmo_mode == LmoMode::full || uint128(sample_size) == collection.cardinality();

  SolverTrace trace;
  trace.initial_objective = objective;
  trace.iterations.reserve(config.iterations);
  const auto t_start = std::chrono::steady_clock::now();

  for (int t = 0; t < config.iterations; ++t) {
    const PairGradientTable table = pair_gradient_table(V_inv, features);

    // LMO over the candidate set. Candidates are visited in ascending index
    // order, so keeping the first strict maximum breaks ties toward the
    // lowest index in both modes.
    double best_score = -std::numeric_limits<double>::infinity();
    uint128 best_index = 0;
    Subset best_subset;
    if (enumerate_all) {
      for (int m = 0; m < collection.list_count(); ++m) {
        uint128 index = collection.list_offset(m);
        for_each_subset_colex(collection.list_size(m), collection.k(),
                              [&](const std::vector<int>& items) {
                                const double score = subset_gradient(table, m, items);
                                if (score > best_score) {
                                  best_score = score;
                                  best_index = index;
                                  best_subset = Subset{m, items};
                                }
                                ++index;
                              });
      }
    } else {
      for (uint128 index : collection.sample_indices(sample_size, rng)) {
        Subset s = collection.unrank(index);
        const double score = subset_gradient(table, s);
        if (score > best_score) {
          best_score = score;
          best_index = index;
          best_subset = std::move(s);
        }
      }
    }

    if (config.lmo_mode == LmoMode::full && config.stop_gap > 0.0 &&
        best_score - d <= config.stop_gap)
      break;

    const Eigen::MatrixXd A = subset_matrix(features, best_subset);
    const double alpha = golden_search(V_inv, A, config.alpha_tol).alpha;
    const double delta = update_log_det(V_inv, A, alpha);
    objective += delta;
    if (!std::isfinite(objective))
      throw numerical_error("solver: non-finite objective at iteration " + std::to_string(t) +
                            " (delta " + std::to_string(delta) + ")");

    multiplier *= (1.0 - alpha);
    if (alpha > 0.0) raw[best_index] += alpha / multiplier;
    if (multiplier < 1e-250) {  // fold in before the multiplier underflows
      for (auto& [index, weight] : raw) weight *= multiplier;
      multiplier = 1.0;
    }

    V_inv = update_inverse(V_inv, A, alpha);
    gamma_eff *= (1.0 - alpha);

    if (config.inverse_refresh_period > 0 && (t + 1) % config.inverse_refresh_period == 0) {
      if (config.refresh_gamma) gamma_eff = config.gamma;
      const InfoMatrixState refreshed = information_matrix(
          DesignDistribution{collection, detail::materialize_design(raw, multiplier)}, features,
          gamma_eff);
      V_inv = refreshed.V_inv;
      objective = refreshed.log_det;
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    trace.iterations.push_back({objective, best_index, alpha, best_score, raw.size(), seconds});
  }

  SolveResult result{DesignDistribution{collection, detail::materialize_design(raw, multiplier)},
                     std::move(trace), std::move(V_inv), gamma_eff, objective};
  result.design.validate();
  return result;
}

}  // namespace dopewolfe
