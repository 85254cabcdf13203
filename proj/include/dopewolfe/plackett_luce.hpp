#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "dopewolfe/combinatorics.hpp"
#include "dopewolfe/errors.hpp"
#include "dopewolfe/features.hpp"
#include "dopewolfe/random.hpp"

namespace dopewolfe {

/// One elicited K-way ranking: a subset plus the order the rater assigned.
/// ranking[k] is the position within subset.items of the item ranked k-th
/// (most preferred first), so it is a permutation of 0..K-1.
struct RankingObservation {
  Subset subset;
  std::vector<int> ranking;

  void validate() const {
    const std::size_t k = subset.items.size();
    if (ranking.size() != k) throw validation_error("ranking length does not match subset size");
    std::vector<char> seen(k, 0);
    for (int slot : ranking) {
      if (slot < 0 || slot >= static_cast<int>(k) || seen[slot])
        throw validation_error("ranking is not a permutation of the subset");
      seen[slot] = 1;
    }
  }
};

enum class LikelihoodMode { kwise, pairwise_broken };

struct MleConfig {
  int max_iterations = 300;
  double stepsize_min = 1e-8;
  double stepsize_max = 5e4;
  double initial_stepsize = 1e-3;
  double gradient_tolerance = 1e-8;
  bool constrain_unit_ball = true;
  LikelihoodMode likelihood_mode = LikelihoodMode::kwise;

  void validate() const {
    if (max_iterations < 1) throw validation_error("mle: max_iterations must be >= 1");
    if (!(stepsize_min > 0.0) || !(stepsize_max > 0.0) || !(initial_stepsize > 0.0))
      throw validation_error("mle: stepsizes must be positive");
    if (stepsize_min > stepsize_max)
      throw validation_error("mle: stepsize_min must not exceed stepsize_max");
    if (gradient_tolerance < 0.0) throw validation_error("mle: gradient tolerance must be >= 0");
  }
};

namespace detail {
inline double softplus(double u) {  // log(1 + e^u), overflow-safe
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}
inline double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}
}  // namespace detail

/// log P(sigma) for scores already arranged in ranked order (most preferred
/// first): sum over stages k of s_k - logsumexp(s_k..s_{K-1}). One backward
/// pass keeps the running suffix log-sum-exp rescaled to its max.
inline double log_permutation_probability(const Eigen::VectorXd& ordered_scores) {
  if (!ordered_scores.allFinite()) throw validation_error("scores must be finite");
  const int k = static_cast<int>(ordered_scores.size());
  double suffix_max = -std::numeric_limits<double>::infinity();
  double suffix_sum = 0.0;  // sum of exp(s_j - suffix_max) over the suffix
  double log_prob = 0.0;
  for (int i = k - 1; i >= 0; --i) {
    const double s = ordered_scores[i];
    if (s > suffix_max) {
      suffix_sum = suffix_sum * std::exp(suffix_max - s) + 1.0;
      suffix_max = s;
    } else {
      suffix_sum += std::exp(s - suffix_max);
    }
    log_prob += s - (suffix_max + std::log(suffix_sum));
  }
  return log_prob;
}

inline double permutation_probability(const Eigen::VectorXd& ordered_scores) {
  return std::exp(log_permutation_probability(ordered_scores));
}

/// Samples a ranking by sequential softmax without replacement; the result
/// is distributed exactly as permutation_probability prescribes. Returns
/// slot indices into the score vector, most preferred first.
inline std::vector<int> sample_ranking_slots(const Eigen::VectorXd& scores, Rng& rng) {
  if (!scores.allFinite()) throw validation_error("scores must be finite");
  const int k = static_cast<int>(scores.size());
  std::vector<int> remaining(k);
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<int> order;
  order.reserve(k);
  std::vector<double> probs;
  while (remaining.size() > 1) {
    double max_score = -std::numeric_limits<double>::infinity();
    for (int slot : remaining) max_score = std::max(max_score, scores[slot]);
    probs.clear();
    double total = 0.0;
    for (int slot : remaining) {
      total += std::exp(scores[slot] - max_score);
      probs.push_back(total);
    }
    const double u = uniform_real01(rng) * total;
    std::size_t pick = 0;
    while (pick + 1 < probs.size() && u >= probs[pick]) ++pick;
    order.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<long>(pick));
  }
  order.push_back(remaining.front());
  return order;
}

inline RankingObservation sample_ranking(const Eigen::VectorXd& theta,
                                         const ItemFeatureMatrix& features, const Subset& subset,
                                         Rng& rng) {
  const int k = static_cast<int>(subset.items.size());
  Eigen::VectorXd scores(k);
  for (int i = 0; i < k; ++i)
    scores[i] = features.row(features.global_index(subset.list_id, subset.items[i])).dot(theta);
  return RankingObservation{subset, sample_ranking_slots(scores, rng)};
}

namespace detail {
/// Feature rows of one observation in ranked order, as a K x d matrix.
inline Eigen::MatrixXd ranked_features(const RankingObservation& obs,
                                       const ItemFeatureMatrix& features) {
  const int k = static_cast<int>(obs.ranking.size());
  Eigen::MatrixXd f(k, features.dim());
  for (int i = 0; i < k; ++i)
    f.row(i) = features.row(features.global_index(obs.subset.list_id, obs.subset.items[obs.ranking[i]]));
  return f;
}
}  // namespace detail

inline double negative_log_likelihood(const Eigen::VectorXd& theta,
                                      const std::vector<RankingObservation>& observations,
                                      const ItemFeatureMatrix& features,
                                      LikelihoodMode mode = LikelihoodMode::kwise) {
  if (observations.empty()) throw validation_error("negative log-likelihood of no observations");
  double nll = 0.0;
  for (const auto& obs : observations) {
    const Eigen::MatrixXd f = detail::ranked_features(obs, features);
    if (mode == LikelihoodMode::kwise) {
      nll -= log_permutation_probability(f * theta);
    } else {
      // break the K-way ranking into its K(K-1)/2 ordered pairs
      const int k = static_cast<int>(f.rows());
      for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
          nll += detail::softplus(-(f.row(a) - f.row(b)).dot(theta));
    }
  }
  return nll;
}

inline Eigen::VectorXd nll_gradient(const Eigen::VectorXd& theta,
                                    const std::vector<RankingObservation>& observations,
                                    const ItemFeatureMatrix& features,
                                    LikelihoodMode mode = LikelihoodMode::kwise) {
  if (observations.empty()) throw validation_error("gradient of no observations");
  const int d = features.dim();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
  for (const auto& obs : observations) {
    const Eigen::MatrixXd f = detail::ranked_features(obs, features);
    const int k = static_cast<int>(f.rows());
    if (mode == LikelihoodMode::kwise) {
      const Eigen::VectorXd scores = f * theta;
      // backward pass: suffix softmax-weighted feature means, rescaled in place
      double suffix_max = -std::numeric_limits<double>::infinity();
      double suffix_sum = 0.0;
      Eigen::VectorXd suffix_features = Eigen::VectorXd::Zero(d);
      for (int i = k - 1; i >= 0; --i) {
        const double s = scores[i];
        if (s > suffix_max) {
          const double scale = std::exp(suffix_max - s);
          suffix_sum = suffix_sum * scale + 1.0;
          suffix_features = suffix_features * scale + f.row(i).transpose();
          suffix_max = s;
        } else {
          const double w = std::exp(s - suffix_max);
          suffix_sum += w;
          suffix_features += w * f.row(i).transpose();
        }
        grad += suffix_features / suffix_sum - f.row(i).transpose();
      }
    } else {
      for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) {
          const Eigen::VectorXd z = f.row(a) - f.row(b);
          grad -= detail::sigmoid(-z.dot(theta)) * z;
        }
    }
  }
  return grad;
}

struct FitResult {
  Eigen::VectorXd theta;
  double nll = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Gradient descent from theta = 0 with the Barzilai-Borwein long step
/// (dx.dx / dx.dg, falling back to the initial stepsize when the secant
/// denominator is not positive), clipped to the configured range. Iterates
/// are optionally projected onto the unit ball. Returns the iterate with the
/// lowest negative log-likelihood seen.
inline FitResult fit_mle(const std::vector<RankingObservation>& observations,
                         const ItemFeatureMatrix& features, const MleConfig& config) {
  config.validate();
  if (observations.empty()) throw validation_error("cannot fit a model to no observations");
  for (const auto& obs : observations) obs.validate();

  const int d = features.dim();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd grad = nll_gradient(theta, observations, features, config.likelihood_mode);

  FitResult best;
  best.theta = theta;
  best.nll = negative_log_likelihood(theta, observations, features, config.likelihood_mode);

  Eigen::VectorXd prev_theta = theta, prev_grad = grad;
  int iter = 0;
  for (; iter < config.max_iterations; ++iter) {
    if (grad.norm() <= config.gradient_tolerance) break;

    double step = config.initial_stepsize;
    if (iter > 0) {
      const Eigen::VectorXd dx = theta - prev_theta;
      const Eigen::VectorXd dg = grad - prev_grad;
      const double denom = dx.dot(dg);
      if (denom > 0.0) step = dx.squaredNorm() / denom;
    }
    step = std::clamp(step, config.stepsize_min, config.stepsize_max);

    prev_theta = theta;
    prev_grad = grad;
    theta -= step * grad;
    if (config.constrain_unit_ball) {
      const double norm = theta.norm();
      if (norm > 1.0) theta /= norm;
    }

    const double nll = negative_log_likelihood(theta, observations, features, config.likelihood_mode);
    if (!std::isfinite(nll))
      throw numerical_error("non-finite negative log-likelihood at MLE iteration " +
                            std::to_string(iter + 1));
    if (nll < best.nll) {
      best.nll = nll;
      best.theta = theta;
    }
    grad = nll_gradient(theta, observations, features, config.likelihood_mode);
  }

  best.iterations = iter;
  best.gradient_norm = grad.norm();
  return best;
}

}  // namespace dopewolfe
