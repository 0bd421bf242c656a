//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <random>
#include <vector>

#include "tfgm/tfgm.hpp"

namespace tfgm::testing {

inline Graph make_graph(std::size_t n, std::vector<Edge> edges) {
  return Graph::from_edges(n, edges);
}

inline Graph triangle() { return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}); }
inline Graph path3() { return make_graph(3, {{0, 1}, {1, 2}}); }
inline Graph single_edge() { return make_graph(2, {{0, 1}}); }
inline Graph isolated() { return make_graph(1, {}); }

inline Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  const auto r = static_cast<Eigen::Index>(values.size());
  const auto c = r == 0 ? Eigen::Index{0}
                        : static_cast<Eigen::Index>(values.begin()->size());
  Matrix m(r, c);
  Eigen::Index i = 0;
  for (const auto &row : values) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Matrix gaussian(std::size_t r, std::size_t c, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
  return m;
}

inline Graph random_graph(std::size_t n, double p, std::mt19937_64 &rng) {
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (NodeIndex i = 0; i < n; ++i)
    for (NodeIndex j = i + 1; j < n; ++j)
      if (coin(rng)) edges.emplace_back(i, j);
  return Graph::from_edges(n, edges);
}

inline std::vector<NodeIndex> shuffled(std::size_t n, std::mt19937_64 &rng) {
  std::vector<NodeIndex> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

inline Assignment make_assignment(std::vector<std::optional<NodeIndex>> targets) {
  Assignment a;
  a.target_of = std::move(targets);
  a.injective = is_injective(a);
  return a;
}

inline GroundTruth truth_of(std::vector<NodePair> pairs) {
  return GroundTruth(std::move(pairs));
}

inline GroundTruth identity_truth(std::size_t n) {
  std::vector<NodePair> pairs;
  for (NodeIndex i = 0; i < n; ++i) pairs.push_back({i, i});
  return GroundTruth(std::move(pairs));
}

/// Zachary's karate club, 34 nodes, 78 edges, 0-indexed.
inline Graph karate_club() {
  static const std::vector<Edge> edges{
      {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},
      {0, 8},   {0, 10},  {0, 11},  {0, 12},  {0, 13},  {0, 17},  {0, 19},
      {0, 21},  {0, 31},  {1, 2},   {1, 3},   {1, 7},   {1, 13},  {1, 17},
      {1, 19},  {1, 21},  {1, 30},  {2, 3},   {2, 7},   {2, 8},   {2, 9},
      {2, 13},  {2, 27},  {2, 28},  {2, 32},  {3, 7},   {3, 12},  {3, 13},
      {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},  {6, 16},  {8, 30},
      {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33}, {15, 32},
      {15, 33}, {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32},
      {22, 33}, {23, 25}, {23, 27}, {23, 29}, {23, 32}, {23, 33}, {24, 25},
      {24, 27}, {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31},
      {28, 33}, {29, 32}, {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33},
      {32, 33}};
  return Graph::from_edges(34, edges);
}

}  // namespace tfgm::testing
