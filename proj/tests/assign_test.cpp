//
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "support.hpp"

using namespace tfgm;
using namespace tfgm::testing;

namespace {

std::vector<std::optional<NodeIndex>> targets(std::initializer_list<NodeIndex> t) {
  return {t.begin(), t.end()};
}

// First optimum in lexicographic enumeration order.
Assignment brute_force(const Matrix &u) {
  std::optional<Assignment> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for_each_injective_map(std::size_t(u.rows()), std::size_t(u.cols()),
                         [&](std::span<const NodeIndex> t) {
                           const Assignment a = to_assignment(t);
                           const double v = objective(u, a);
                           if (v > best_value) {
                             best_value = v;
                             best = a;
                           }
                         });
  return *best;
}

Matrix random_integer_matrix(std::size_t r, std::size_t c, int range, std::mt19937_64 &rng) {
  std::uniform_int_distribution<int> dist(-range, range);
  Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = dist(rng);
  return m;
}

}  // namespace

TEST(Hungarian, DominantDiagonal) {
  const auto a = solve_hungarian(rows({{0.9, 0.1}, {0.2, 0.8}}));
  EXPECT_EQ(a.target_of, targets({0, 1}));
  EXPECT_TRUE(a.injective);
  EXPECT_NEAR(objective(rows({{0.9, 0.1}, {0.2, 0.8}}), a), 1.7, 1e-15);
}

TEST(Hungarian, RectangularExample) {
  const Matrix u = rows({{1, 2, 3}, {3, 1, 2}});
  const auto a = solve_hungarian(u);
  EXPECT_EQ(a.target_of, targets({2, 0}));
  EXPECT_EQ(objective(u, a), 6.0);
  EXPECT_EQ(enumerate_assignments(2, 3).size(), 6u);
}

TEST(Hungarian, AllTiesGoLexicographic) {
  EXPECT_EQ(solve_hungarian(Matrix::Zero(2, 2)).target_of, targets({0, 1}));
  EXPECT_EQ(solve_hungarian(Matrix::Zero(3, 5)).target_of, targets({0, 1, 2}));
}

TEST(Hungarian, MoreSourcesThanTargetsLeavesSurplusUnmatched) {
  const Matrix u = rows({{1, 0}, {0, 5}, {4, 0}});
  const auto a = solve_hungarian(u);
  EXPECT_TRUE(a.injective);
  EXPECT_EQ(objective(u, a), 9.0);
  EXPECT_EQ(a.target_of[0], std::nullopt);
}

TEST(Hungarian, RejectsNonFinite) {
  Matrix u = Matrix::Zero(2, 2);
  u(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve_hungarian(u), Error);
  u(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(solve_argmax(u), Error);
}

TEST(Hungarian, EmptyInputs) {
  EXPECT_TRUE(solve_hungarian(Matrix(0, 3)).target_of.empty());
  const auto a = solve_hungarian(Matrix(2, 0));
  EXPECT_EQ(a.target_of, (std::vector<std::optional<NodeIndex>>{std::nullopt, std::nullopt}));
}

TEST(HungarianProperties, MatchesBruteForceIncludingTieBreak) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t ns = 1 + rng() % 6;
    const std::size_t nt = ns + rng() % (8 - ns);
    // Small integer ranges force many ties.
    const Matrix u = random_integer_matrix(ns, nt, 1 + int(rng() % 3), rng);
    const auto a = solve_hungarian(u);
    const auto b = brute_force(u);
    ASSERT_EQ(objective(u, a), objective(u, b)) << u;
    ASSERT_EQ(a.target_of, b.target_of) << u;
  }
}

TEST(HungarianProperties, TallMatricesReachTheOptimum) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t nt = 1 + rng() % 6;
    const std::size_t ns = nt + 1 + rng() % 2;
    const Matrix u = random_integer_matrix(ns, nt, 5, rng);
    const auto a = solve_hungarian(u);
    EXPECT_TRUE(is_injective(a));
    EXPECT_EQ(objective(u, a), objective(u.transpose(), brute_force(u.transpose())));
  }
}

TEST(HungarianProperties, ConstantShift) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> shift(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t ns = 1 + rng() % 6, nt = ns + rng() % 3;
    // Dyadic entries keep the shifted sums exact.
    const Matrix u = random_integer_matrix(ns, nt, 8, rng) / 8.0;
    const double c = std::round(shift(rng) * 4) / 4;
    const Matrix shifted = (u.array() + c).matrix();
    const auto a = solve_hungarian(u);
    const auto b = solve_hungarian(shifted);
    EXPECT_EQ(a.target_of, b.target_of);
    EXPECT_EQ(objective(shifted, b), objective(u, a) + c * double(ns));
  }
}

TEST(HungarianProperties, ContinuousRandomMatrices) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t ns = 1 + rng() % 7, nt = ns + rng() % (9 - ns);
    const Matrix u = gaussian(ns, nt, rng);
    EXPECT_NEAR(objective(u, solve_hungarian(u)), objective(u, brute_force(u)), 1e-12);
  }
}

TEST(HungarianProperties, LargerMatricesStayInjectiveAndBeatGreedy) {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix u = gaussian(150, 170, rng);
    const auto a = solve_hungarian(u);
    EXPECT_TRUE(is_injective(a));
    std::vector<char> taken(170, 0);
    double greedy = 0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      Eigen::Index best = -1;
      for (Eigen::Index j = 0; j < u.cols(); ++j)
        if (!taken[std::size_t(j)] && (best < 0 || u(i, j) > u(i, best))) best = j;
      taken[std::size_t(best)] = 1;
      greedy += u(i, best);
    }
    EXPECT_GE(objective(u, a), greedy);
  }
}

TEST(Argmax, Examples) {
  const auto a = solve_argmax(rows({{0.9, 0.1}, {0.8, 0.2}}));
  EXPECT_EQ(a.target_of, targets({0, 0}));
  EXPECT_FALSE(a.injective);
  EXPECT_EQ(solve_argmax(rows({{0.9, 0.1}, {0.2, 0.8}})).target_of, targets({0, 1}));
  EXPECT_EQ(solve_argmax(rows({{0.5, 0.5}})).target_of, targets({0}));
}

TEST(Metrics, Accuracy) {
  EXPECT_EQ(accuracy(make_assignment({1, 0}), truth_of({{0, 1}, {1, 2}})), 0.5);
  EXPECT_EQ(accuracy(make_assignment({0, 1, 2}), identity_truth(3)), 1.0);
  EXPECT_EQ(accuracy(make_assignment({1, 2, 0}), identity_truth(3)), 0.0);
  EXPECT_THROW(accuracy(make_assignment({0}), GroundTruth{}), Error);
}

TEST(Metrics, HitsAtK) {
  const auto id = identity_truth(2);
  EXPECT_EQ(hits_at_k(rows({{0.9, 0.1}, {0.3, 0.7}}), id, 1), 1.0);
  EXPECT_EQ(hits_at_k(rows({{0.1, 0.9}, {0.3, 0.7}}), id, 1), 0.5);
  EXPECT_EQ(hits_at_k(rows({{0.1, 0.9}, {0.3, 0.7}}), id, 2), 1.0);
  EXPECT_THROW(hits_at_k(rows({{1}}), identity_truth(1), 0), Error);
}

TEST(Metrics, Mrr) {
  // Ranks {1, 2}.
  EXPECT_EQ(mrr(rows({{0.9, 0.1}, {0.7, 0.3}}), identity_truth(2)), 0.75);
  EXPECT_EQ(mrr(Matrix::Identity(3, 3), identity_truth(3)), 1.0);
  // Ranks {1, 4}.
  const Matrix u = rows({{9, 1, 1, 1}, {4, 1, 3, 2}});
  EXPECT_EQ(mrr(u, truth_of({{0, 0}, {1, 1}})), 0.625);
}

TEST(Metrics, RankCountsEqualEntriesWithSmallerIndex) {
  const Matrix u = rows({{1, 1, 1}});
  EXPECT_EQ(rank_in_row(u, 0, 0), 1u);
  EXPECT_EQ(rank_in_row(u, 0, 2), 3u);
}

TEST(MetricsProperties, ArgmaxAccuracyEqualsHitsAtOne) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    const Matrix u = random_integer_matrix(n, n, 2, rng);
    const auto truth = GroundTruth([&] {
      std::vector<NodePair> p;
      const auto perm = shuffled(n, rng);
      for (NodeIndex i = 0; i < n; ++i) p.push_back({i, perm[i]});
      return p;
    }());
    EXPECT_EQ(accuracy(solve_argmax(u), truth), hits_at_k(u, truth, 1));
  }
}
