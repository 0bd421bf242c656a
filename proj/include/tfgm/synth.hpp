//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tfgm/error.hpp"
#include "tfgm/graph.hpp"
#include "tfgm/matrix.hpp"

namespace tfgm {

// ---------------------------------------------------------------------------
// Degree encoders
// ---------------------------------------------------------------------------

/// One-hot degree rows of width `dim`; every degree must be below `dim`.
inline Matrix onehot_degree_encoding(const Graph &g, std::size_t dim) {
  if (g.num_nodes() > 0 && g.max_degree() >= dim)
    throw Error("one-hot degree width " + std::to_string(dim) +
                " too small for max degree " + std::to_string(g.max_degree()));
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(g.num_nodes()),
                          static_cast<Eigen::Index>(dim));
  for (NodeIndex i = 0; i < g.num_nodes(); ++i)
    x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g.degree(i))) = 1.0;
  return x;
}

/// One-hot degree features over a dimension shared by both graphs
/// (1 + the largest degree in either).
inline std::pair<Matrix, Matrix> onehot_degree_features(const Graph &source,
                                                        const Graph &target) {
  const std::size_t dim = 1 + std::max(source.max_degree(), target.max_degree());
  return {onehot_degree_encoding(source, dim), onehot_degree_encoding(target, dim)};
}

/// Sinusoidal encoding of a scalar position p into `dim` (even) entries:
/// [sin(p w_0), cos(p w_0), sin(p w_1), ...] with w_i = 10000^(-2i/dim).
inline Vector sinusoidal_encoding(double position, std::size_t dim) {
  if (dim < 2 || dim % 2 != 0)
    throw Error("positional encoding dimension must be even and >= 2, got " +
                std::to_string(dim));
  Vector v(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim / 2; ++i) {
    const double freq =
        std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(dim));
    v(static_cast<Eigen::Index>(2 * i)) = std::sin(position / freq);
    v(static_cast<Eigen::Index>(2 * i + 1)) = std::cos(position / freq);
  }
  return v;
}

inline Matrix posenc_degree_encoding(const Graph &g, std::size_t dim) {
  if (dim < 2 || dim % 2 != 0)
    throw Error("positional encoding dimension must be even and >= 2, got " +
                std::to_string(dim));
  Matrix x(static_cast<Eigen::Index>(g.num_nodes()), static_cast<Eigen::Index>(dim));
  std::vector<Vector> cache(g.max_degree() + 1);
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) {
    auto &row = cache[g.degree(i)];
    if (row.size() == 0) row = sinusoidal_encoding(static_cast<double>(g.degree(i)), dim);
    x.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return x;
}

inline std::pair<Matrix, Matrix> posenc_degree_features(const Graph &source,
                                                        const Graph &target,
                                                        std::size_t dim) {
  return {posenc_degree_encoding(source, dim), posenc_degree_encoding(target, dim)};
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// G(n, p): every unordered pair independently with probability p.
inline Graph gen_er(std::size_t n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0))
    throw Error("gen_er: probability must lie in [0,1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (NodeIndex i = 0; i < n; ++i)
    for (NodeIndex j = i + 1; j < n; ++j)
      if (coin(rng)) edges.emplace_back(i, j);
  return Graph::from_edges(n, edges);
}

enum class NoiseKind { Rewire, LowConf };

inline std::string_view to_string(NoiseKind k) {
  return k == NoiseKind::Rewire ? "rewire" : "lowconf";
}

inline NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "rewire") return NoiseKind::Rewire;
  if (name == "lowconf") return NoiseKind::LowConf;
  throw Error("unknown noise kind '" + std::string(name) +
              "' (expected rewire or lowconf)");
}

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Rewire;
  double ratio = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(ratio >= 0.0 && ratio <= 1.0))
      throw Error("noise ratio must lie in [0,1]");
  }
};

/// A target graph derived from a source graph plus the planted
/// correspondence (source node i <-> target node perm[i]).
struct NoisyPair {
  Graph target;
  GroundTruth truth;
  /// Fraction of original edge slots changed (rewire) or added (lowconf).
  double achieved_ratio = 0.0;
  std::size_t operations = 0;
  bool budget_exhausted = false;
};

namespace detail {

inline std::uint64_t edge_key(NodeIndex u, NodeIndex v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v);
}

inline std::vector<NodeIndex> random_permutation(std::size_t n,
                                                 std::mt19937_64 &rng) {
  std::vector<NodeIndex> perm(n);
  std::iota(perm.begin(), perm.end(), NodeIndex{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

inline NoisyPair finish_pair(const Graph &base, std::vector<Edge> edges,
                             std::mt19937_64 &rng) {
  Graph noisy = Graph::from_edges(base.num_nodes(), edges);
  if (base.features()) noisy = noisy.with_features(*base.features());
  if (base.labels()) noisy = noisy.with_labels(*base.labels());
  const auto perm = random_permutation(base.num_nodes(), rng);
  std::vector<NodePair> pairs(base.num_nodes());
  for (NodeIndex i = 0; i < base.num_nodes(); ++i) pairs[i] = {i, perm[i]};
  NoisyPair out;
  out.target = noisy.permuted(perm);
  out.truth = GroundTruth(std::move(pairs));
  return out;
}

}  // namespace detail

/*
 * Degree-preserving rewiring. Repeats double-edge swaps
 * (a,b),(c,d) -> (a,d),(c,b) on disjoint edges whose replacements are absent,
 * until the symmetric difference with the original edge set reaches
 * ratio * |E| or 100 * |E| attempts have been spent. The result is relabelled
 * by a uniformly random permutation which becomes the ground truth.
 */
inline NoisyPair rewire(const Graph &g, double ratio, std::uint64_t seed) {
  NoiseSpec{NoiseKind::Rewire, ratio, seed}.validate();
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges = g.edge_list();
  const std::size_t m = edges.size();
  const double goal = ratio * static_cast<double>(m);
  std::size_t changed = 0, swaps = 0;
  bool exhausted = false;

  if (goal > 0.0) {
    if (m < 2) throw Error("rewire: graph needs at least 2 edges");
    std::unordered_set<std::uint64_t> original, current;
    original.reserve(2 * m);
    for (const auto &[u, v] : edges) original.insert(detail::edge_key(u, v));
    current = original;
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    std::bernoulli_distribution flip(0.5);
    const std::size_t budget = 100 * m;
    std::size_t attempts = 0;
    auto toggle = [&](std::uint64_t key, bool added) {
      // Adding an original edge back, or removing a foreign one, undoes a
      // change; the other two cases create one.
      if (original.count(key) != 0) {
        if (added) --changed; else ++changed;
      } else {
        if (added) ++changed; else --changed;
      }
    };
    while (static_cast<double>(changed) < goal) {
      if (attempts++ >= budget) {
        exhausted = true;
        break;
      }
      const std::size_t e1 = pick(rng), e2 = pick(rng);
      if (e1 == e2) continue;
      auto [a, b] = edges[e1];
      auto [c, d] = edges[e2];
      if (flip(rng)) std::swap(a, b);
      if (flip(rng)) std::swap(c, d);
      if (a == c || a == d || b == c || b == d) continue;
      const auto ad = detail::edge_key(a, d), cb = detail::edge_key(c, b);
      if (current.count(ad) || current.count(cb)) continue;
      const auto ab = detail::edge_key(a, b), cd = detail::edge_key(c, d);
      current.erase(ab);
      current.erase(cd);
      current.insert(ad);
      current.insert(cb);
      toggle(ab, false);
      toggle(cd, false);
      toggle(ad, true);
      toggle(cb, true);
      edges[e1] = {std::min(a, d), std::max(a, d)};
      edges[e2] = {std::min(c, b), std::max(c, b)};
      ++swaps;
    }
  }
  NoisyPair out = detail::finish_pair(g, std::move(edges), rng);
  out.achieved_ratio = m == 0 ? 0.0 : static_cast<double>(changed) / double(m);
  out.operations = swaps;
  out.budget_exhausted = exhausted;
  return out;
}

/// Adds ceil(ratio * |E|) uniformly random absent edges, then relabels by a
/// random permutation. The source is an exact subgraph of the result under
/// the ground truth.
inline NoisyPair add_lowconf(const Graph &g, double ratio, std::uint64_t seed) {
  NoiseSpec{NoiseKind::LowConf, ratio, seed}.validate();
  std::mt19937_64 rng(seed);
  const std::size_t n = g.num_nodes();
  const std::size_t m = g.num_edges();
  const std::size_t slots = n < 2 ? 0 : n * (n - 1) / 2;
  const std::size_t absent = slots - m;
  const auto need = static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(m) - 1e-9));
  if (need > absent) {
    if (absent == 0) throw Error("add_lowconf: graph already complete");
    throw Error("add_lowconf: " + std::to_string(need) +
                " new edges requested but only " + std::to_string(absent) +
                " node pairs are absent");
  }

  std::vector<Edge> edges = g.edge_list();
  if (need > 0) {
    if (2 * need > absent) {
      std::vector<Edge> pool;
      pool.reserve(absent);
      for (NodeIndex u = 0; u < n; ++u)
        for (NodeIndex v = u + 1; v < n; ++v)
          if (!g.has_edge(u, v)) pool.emplace_back(u, v);
      std::shuffle(pool.begin(), pool.end(), rng);
      edges.insert(edges.end(), pool.begin(),
                   pool.begin() + static_cast<std::ptrdiff_t>(need));
    } else {
      std::unordered_set<std::uint64_t> taken;
      for (const auto &[u, v] : edges) taken.insert(detail::edge_key(u, v));
      std::uniform_int_distribution<NodeIndex> node(0, n - 1);
      std::size_t added = 0;
      while (added < need) {
        const NodeIndex u = node(rng), v = node(rng);
        if (u == v || !taken.insert(detail::edge_key(u, v)).second) continue;
        edges.emplace_back(std::min(u, v), std::max(u, v));
        ++added;
      }
    }
  }
  NoisyPair out = detail::finish_pair(g, std::move(edges), rng);
  out.achieved_ratio = m == 0 ? 0.0 : static_cast<double>(need) / double(m);
  out.operations = need;
  return out;
}

inline NoisyPair apply_noise(const Graph &g, const NoiseSpec &spec) {
  spec.validate();
  return spec.kind == NoiseKind::Rewire ? rewire(g, spec.ratio, spec.seed)
                                        : add_lowconf(g, spec.ratio, spec.seed);
}

}  // namespace tfgm
