#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dopewolfe/metrics.hpp"
#include "dopewolfe/random.hpp"

using namespace dopewolfe;
using Catch::Approx;

namespace {

std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[uniform_below_u64(rng, i + 1)]);
  return perm;
}

// O(N^2) oracle: count item pairs ordered differently by the two permutations.
double brute_force_loss(const std::vector<int>& sigma_hat, const std::vector<int>& true_order) {
  const int n = static_cast<int>(sigma_hat.size());
  std::vector<int> pos_hat(n), pos_true(n);
  for (int p = 0; p < n; ++p) {
    pos_hat[sigma_hat[p]] = p;
    pos_true[true_order[p]] = p;
  }
  long long bad = 0;
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y)
      if ((pos_true[x] < pos_true[y]) != (pos_hat[x] < pos_hat[y])) ++bad;
  return static_cast<double>(bad) / (static_cast<double>(n) * (n - 1) / 2);
}

}  // namespace

TEST_CASE("induced permutation") {
  SECTION("descending scores with index tie-breaks") {
    Eigen::MatrixXd rows(4, 2);
    rows << 0.0, 1.0, 0.0, 3.0, 0.0, 3.0, 0.0, 2.0;
    ItemFeatureMatrix features(std::move(rows), {});
    Eigen::VectorXd theta(2);
    theta << 0.0, 1.0;
    const auto perms = induced_permutation(theta, features);
    REQUIRE(perms.size() == 1);
    REQUIRE(perms[0] == std::vector<int>{1, 2, 3, 0});
  }
  SECTION("strictly decreasing true scores induce the identity") {
    // items already in optimal order: scores 4 > 3 > 2 > 1 along the index
    Eigen::MatrixXd rows(4, 1);
    rows << 4.0, 3.0, 2.0, 1.0;
    ItemFeatureMatrix features(std::move(rows), {});
    Eigen::VectorXd theta(1);
    theta << 1.0;
    REQUIRE(induced_permutation(theta, features)[0] == std::vector<int>{0, 1, 2, 3});
  }
  SECTION("theta = 0 falls back to index order") {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Random(5, 3);
    ItemFeatureMatrix features(std::move(rows), {});
    const auto perms = induced_permutation(Eigen::VectorXd::Zero(3), features);
    REQUIRE(perms[0] == std::vector<int>{0, 1, 2, 3, 4});
  }
  SECTION("scores are non-increasing along the output") {
    Rng rng(5);
    Eigen::MatrixXd rows(8, 3);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 3; ++j) rows(i, j) = gaussian(rng);
    ItemFeatureMatrix features(std::move(rows), {4, 4});
    Eigen::VectorXd theta(3);
    for (int j = 0; j < 3; ++j) theta[j] = gaussian(rng);
    const auto perms = induced_permutation(theta, features);
    REQUIRE(perms.size() == 2);
    for (int m = 0; m < 2; ++m) {
      const auto& perm = perms[m];
      for (std::size_t p = 0; p + 1 < perm.size(); ++p) {
        const double here = features.row(features.global_index(m, perm[p])).dot(theta);
        const double next = features.row(features.global_index(m, perm[p + 1])).dot(theta);
        REQUIRE(here >= next);
      }
    }
  }
}

TEST_CASE("ranking loss closed forms") {
  const std::vector<int> order{0, 1, 2};
  REQUIRE(ranking_loss(order, order) == 0.0);
  REQUIRE(ranking_loss({2, 1, 0}, order) == 1.0);
  REQUIRE(ranking_loss({0, 2, 1}, order) == Approx(1.0 / 3.0));
  REQUIRE_THROWS_AS(ranking_loss({0}, {0}), validation_error);
  REQUIRE_THROWS_AS(ranking_loss({0, 0}, {0, 1}), validation_error);
}

TEST_CASE("ranking loss properties") {
  Rng rng(11);
  SECTION("identity and reversal for arbitrary permutations") {
    for (int round = 0; round < 20; ++round) {
      const int n = 2 + static_cast<int>(uniform_below_u64(rng, 30));
      const auto sigma = random_permutation(n, rng);
      auto reversed = sigma;
      std::reverse(reversed.begin(), reversed.end());
      REQUIRE(ranking_loss(sigma, sigma) == 0.0);
      REQUIRE(ranking_loss(reversed, sigma) == 1.0);
    }
  }
  SECTION("invariant under simultaneous relabeling") {
    for (int round = 0; round < 20; ++round) {
      const int n = 2 + static_cast<int>(uniform_below_u64(rng, 20));
      const auto sigma = random_permutation(n, rng);
      const auto tau = random_permutation(n, rng);
      const auto relabel = random_permutation(n, rng);
      auto sigma2 = sigma, tau2 = tau;
      for (int i = 0; i < n; ++i) {
        sigma2[i] = relabel[sigma[i]];
        tau2[i] = relabel[tau[i]];
      }
      REQUIRE(ranking_loss(sigma, tau) == ranking_loss(sigma2, tau2));
    }
  }
  SECTION("merge counting agrees exactly with the brute-force pair count") {
    for (int round = 0; round < 100; ++round) {
      const int n = 2 + static_cast<int>(uniform_below_u64(rng, 199));
      const auto sigma = random_permutation(n, rng);
      const auto tau = random_permutation(n, rng);
      REQUIRE(ranking_loss(sigma, tau) == brute_force_loss(sigma, tau));
    }
  }
}

TEST_CASE("ranking loss against scores excludes ties") {
  // items 0..3 with true scores (2, 1, 1, 0); the (1,2) pair is excluded
  const std::vector<double> scores{2.0, 1.0, 1.0, 0.0};
  REQUIRE(ranking_loss_against_scores({0, 1, 2, 3}, scores) == 0.0);
  REQUIRE(ranking_loss_against_scores({0, 2, 1, 3}, scores) == 0.0);  // swapped tied pair
  REQUIRE(ranking_loss_against_scores({3, 1, 2, 0}, scores) == 1.0);  // all comparable flipped
  REQUIRE(ranking_loss_against_scores({1, 0, 2, 3}, scores) == Approx(1.0 / 5.0));
  REQUIRE(ranking_loss_against_scores({1, 0}, {0.5, 0.5}) == 0.0);  // fully tied list

  SECTION("no ties: agrees with the permutation form") {
    Rng rng(13);
    for (int round = 0; round < 20; ++round) {
      const int n = 2 + static_cast<int>(uniform_below_u64(rng, 20));
      const auto sigma = random_permutation(n, rng);
      std::vector<double> distinct(n);
      for (int i = 0; i < n; ++i) distinct[i] = gaussian(rng);
      std::vector<int> true_order(n);
      std::iota(true_order.begin(), true_order.end(), 0);
      std::sort(true_order.begin(), true_order.end(),
                [&](int a, int b) { return distinct[a] > distinct[b]; });
      REQUIRE(ranking_loss_against_scores(sigma, distinct) ==
              Approx(ranking_loss(sigma, true_order)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ndcg closed forms") {
  SECTION("perfect ordering scores one") {
    REQUIRE(ndcg_at_k({0, 1, 2}, {3.0, 2.0, 1.0}, 3) == Approx(1.0));
  }
  SECTION("two items reversed, linear gain") {
    REQUIRE(ndcg_at_k({1, 0}, {1.0, 0.0}, 2, {GainKind::linear, 0.0}) ==
            Approx(1.0 / std::log2(3.0)).epsilon(1e-12));
  }
  SECTION("ideal ordering scores one under both gains") {
    Rng rng(17);
    for (int round = 0; round < 10; ++round) {
      const int n = 2 + static_cast<int>(uniform_below_u64(rng, 12));
      std::vector<double> rel(n);
      for (int i = 0; i < n; ++i) rel[i] = uniform_real01(rng) * 3.0;
      std::vector<int> ideal(n);
      std::iota(ideal.begin(), ideal.end(), 0);
      std::sort(ideal.begin(), ideal.end(), [&](int a, int b) { return rel[a] > rel[b]; });
      REQUIRE(ndcg_at_k(ideal, rel, n, {GainKind::linear, 0.0}) == Approx(1.0).epsilon(1e-12));
      REQUIRE(ndcg_at_k(ideal, rel, n, {GainKind::exponential, 0.1}) ==
              Approx(1.0).epsilon(1e-12));
    }
  }
  SECTION("degenerate all-zero relevance scores one") {
    REQUIRE(ndcg_at_k({1, 0, 2}, {0.0, 0.0, 0.0}, 3, {GainKind::linear, 0.0}) == 1.0);
  }
  SECTION("cutoff above the list length is clamped") {
    REQUIRE(ndcg_at_k({0, 1}, {1.0, 0.0}, 10) == Approx(1.0));
  }
  SECTION("argument validation") {
    REQUIRE_THROWS_AS(ndcg_at_k({0, 1}, {1.0, 0.0}, 0), validation_error);
    REQUIRE_THROWS_AS(ndcg_at_k({0, 1}, {1.0}, 1), validation_error);
  }
}

TEST_CASE("ndcg stays in [0,1] and improves when an inversion is corrected") {
  Rng rng(23);
  for (int round = 0; round < 50; ++round) {
    const int n = 3 + static_cast<int>(uniform_below_u64(rng, 12));
    std::vector<double> rel(n);
    for (int i = 0; i < n; ++i) rel[i] = uniform_real01(rng) * 2.0;
    auto sigma = random_permutation(n, rng);
    GainSpec gain = (round % 2 == 0) ? GainSpec{GainKind::linear, 0.0}
                                     : GainSpec{GainKind::exponential, 0.1};
    const double before = ndcg_at_k(sigma, rel, n, gain);
    REQUIRE(before >= 0.0);
    REQUIRE(before <= 1.0 + 1e-12);

    for (int p = 0; p + 1 < n; ++p) {
      if (rel[sigma[p]] < rel[sigma[p + 1]]) {
        std::swap(sigma[p], sigma[p + 1]);
        const double after = ndcg_at_k(sigma, rel, n, gain);
        REQUIRE(after >= before - 1e-12);
        break;
      }
    }
  }
}
