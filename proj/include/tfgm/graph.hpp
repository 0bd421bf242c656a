//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tfgm/error.hpp"
#include "tfgm/matrix.hpp"

namespace tfgm {

using NodeIndex = std::size_t;
using Edge = std::pair<NodeIndex, NodeIndex>;

/// Counters describing what normalization happened while building a graph
/// from a raw edge list.
struct EdgeListStats {
  std::size_t dropped_self_loops = 0;
  std::size_t duplicate_edges = 0;
};

/*
 * Undirected simple graph in compressed-row form.
 *
 * The adjacency is stored symmetrically: every undirected edge {u,v}
 * appears as (u,v) in row u and as (v,u) in row v. Column indices are
 * strictly increasing inside each row and self-loops are never stored;
 * graph operators add them back uniformly.
 *
 * A Graph is immutable once built. The with_* helpers return modified
 * copies.
 */
class Graph {
 public:
  Graph() : offsets_(1, 0) {}

  /// Builds a graph from an arbitrary edge list. Direction is ignored,
  /// duplicates are merged and self-loops are dropped (and counted).
  static Graph from_edges(std::size_t num_nodes, std::span<const Edge> edges,
                          EdgeListStats *stats = nullptr) {
    std::vector<Edge> directed;
    directed.reserve(edges.size() * 2);
    EdgeListStats local;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      auto [u, v] = edges[k];
      if (u >= num_nodes || v >= num_nodes)
        throw Error("edge " + std::to_string(k) + " (" + std::to_string(u) +
                    "," + std::to_string(v) + "): node index out of range (" +
                    "num_nodes=" + std::to_string(num_nodes) + ")");
      if (u == v) {
        ++local.dropped_self_loops;
        continue;
      }
      directed.emplace_back(u, v);
      directed.emplace_back(v, u);
    }
    std::sort(directed.begin(), directed.end());
    const auto last = std::unique(directed.begin(), directed.end());
    local.duplicate_edges =
        static_cast<std::size_t>(directed.end() - last) / 2;
    directed.erase(last, directed.end());

    Graph g;
    g.num_nodes_ = num_nodes;
    g.offsets_.assign(num_nodes + 1, 0);
    g.columns_.reserve(directed.size());
    for (const auto &[u, v] : directed) {
      ++g.offsets_[u + 1];
      g.columns_.push_back(v);
    }
    for (std::size_t i = 0; i < num_nodes; ++i)
      g.offsets_[i + 1] += g.offsets_[i];
    if (stats) *stats = local;
    return g;
  }

  std::size_t num_nodes() const { return num_nodes_; }
  /// Number of undirected edges.
  std::size_t num_edges() const { return columns_.size() / 2; }

  std::span<const NodeIndex> neighbors(NodeIndex node) const {
    check_node(node);
    return {columns_.data() + offsets_[node],
            columns_.data() + offsets_[node + 1]};
  }

  std::size_t degree(NodeIndex node) const {
    check_node(node);
    return offsets_[node + 1] - offsets_[node];
  }

  bool has_edge(NodeIndex u, NodeIndex v) const {
    const auto row = neighbors(u);
    return std::binary_search(row.begin(), row.end(), v);
  }

  std::span<const std::size_t> row_offsets() const { return offsets_; }
  std::span<const NodeIndex> column_indices() const { return columns_; }

  /// Undirected edges as (u, v) with u < v, sorted.
  std::vector<Edge> edge_list() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (NodeIndex u = 0; u < num_nodes_; ++u)
      for (NodeIndex v : neighbors(u))
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> d(num_nodes_);
    for (NodeIndex i = 0; i < num_nodes_; ++i) d[i] = degree(i);
    return d;
  }

  std::size_t max_degree() const {
    std::size_t m = 0;
    for (NodeIndex i = 0; i < num_nodes_; ++i) m = std::max(m, degree(i));
    return m;
  }

  const std::optional<Matrix> &features() const { return features_; }
  const std::optional<std::vector<std::int64_t>> &labels() const {
    return labels_;
  }
  /// Reserved; no implemented operator consumes edge features.
  const std::optional<Matrix> &edge_features() const { return edge_features_; }

  Graph with_features(Matrix features) const {
    if (static_cast<std::size_t>(features.rows()) != num_nodes_)
      throw Error("feature matrix has " + std::to_string(features.rows()) +
                  " rows, graph has " + std::to_string(num_nodes_) + " nodes");
    Graph g = *this;
    g.features_ = std::move(features);
    return g;
  }

  Graph without_features() const {
    Graph g = *this;
    g.features_.reset();
    return g;
  }

  Graph with_labels(std::vector<std::int64_t> labels) const {
    if (labels.size() != num_nodes_)
      throw Error("label list has " + std::to_string(labels.size()) +
                  " entries, graph has " + std::to_string(num_nodes_) +
                  " nodes");
    for (auto l : labels)
      if (l < 0) throw Error("node labels must be non-negative");
    Graph g = *this;
    g.labels_ = std::move(labels);
    return g;
  }

  Graph with_edge_features(Matrix edge_features) const {
    Graph g = *this;
    g.edge_features_ = std::move(edge_features);
    return g;
  }

  /// Relabels nodes: node i of this graph becomes node perm[i].
  Graph permuted(std::span<const NodeIndex> perm) const {
    if (perm.size() != num_nodes_)
      throw Error("permutation size does not match node count");
    std::vector<Edge> edges;
    edges.reserve(num_edges());
    for (const auto &[u, v] : edge_list()) edges.emplace_back(perm[u], perm[v]);
    Graph g = from_edges(num_nodes_, edges);
    if (features_) {
      Matrix f(features_->rows(), features_->cols());
      for (NodeIndex i = 0; i < num_nodes_; ++i) f.row(perm[i]) = features_->row(i);
      g.features_ = std::move(f);
    }
    if (labels_) {
      std::vector<std::int64_t> l(num_nodes_);
      for (NodeIndex i = 0; i < num_nodes_; ++i) l[perm[i]] = (*labels_)[i];
      g.labels_ = std::move(l);
    }
    return g;
  }

 private:
  void check_node(NodeIndex node) const {
    if (node >= num_nodes_)
      throw Error("node index " + std::to_string(node) +
                  " out of range (num_nodes=" + std::to_string(num_nodes_) +
                  ")");
  }

  std::size_t num_nodes_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<NodeIndex> columns_;
  std::optional<Matrix> features_;
  std::optional<std::vector<std::int64_t>> labels_;
  std::optional<Matrix> edge_features_;
};

inline std::size_t degree(const Graph &graph, NodeIndex node) {
  return graph.degree(node);
}

struct NodePair {
  NodeIndex source = 0;
  NodeIndex target = 0;
  friend bool operator==(const NodePair &, const NodePair &) = default;
};

/*
 * An injective set of (source, target) pairs. The tag distinguishes the
 * evaluation target (GroundTruth) from supervision (AnchorSet) so one cannot
 * be passed where the other is expected.
 */
template <class Tag>
class PairSet {
 public:
  PairSet() = default;
  explicit PairSet(std::vector<NodePair> pairs) : pairs_(std::move(pairs)) {
    std::unordered_set<NodeIndex> sources, targets;
    for (const auto &p : pairs_) {
      if (!sources.insert(p.source).second)
        throw Error("source node " + std::to_string(p.source) +
                    " appears in more than one pair");
      if (!targets.insert(p.target).second)
        throw Error("target node " + std::to_string(p.target) +
                    " appears in more than one pair");
    }
  }

  const std::vector<NodePair> &pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }

  void check_bounds(std::size_t num_source, std::size_t num_target) const {
    for (const auto &p : pairs_)
      if (p.source >= num_source || p.target >= num_target)
        throw Error("pair (" + std::to_string(p.source) + "," +
                    std::to_string(p.target) + ") out of range for graphs of " +
                    std::to_string(num_source) + " and " +
                    std::to_string(num_target) + " nodes");
  }

 private:
  std::vector<NodePair> pairs_;
};

struct GroundTruthTag {};
struct AnchorTag {};
using GroundTruth = PairSet<GroundTruthTag>;
using AnchorSet = PairSet<AnchorTag>;

/// Labelled graphs used by the supervised strategy. Labels must be present
/// and distinct inside each graph.
class TrainingSet {
 public:
  TrainingSet() = default;
  explicit TrainingSet(std::vector<Graph> graphs) : graphs_(std::move(graphs)) {
    for (std::size_t n = 0; n < graphs_.size(); ++n) {
      const auto &labels = graphs_[n].labels();
      if (!labels)
        throw Error("training graph " + std::to_string(n) + " has no labels");
      std::unordered_set<std::int64_t> seen;
      for (auto l : *labels) {
        if (!seen.insert(l).second)
          throw Error("training graph " + std::to_string(n) + " repeats label " +
                      std::to_string(l));
        num_labels_ = std::max<std::size_t>(num_labels_,
                                            static_cast<std::size_t>(l) + 1);
      }
    }
  }

  const std::vector<Graph> &graphs() const { return graphs_; }
  std::size_t size() const { return graphs_.size(); }
  /// One past the largest label seen across all graphs.
  std::size_t num_labels() const { return num_labels_; }

 private:
  std::vector<Graph> graphs_;
  std::size_t num_labels_ = 0;
};

}  // namespace tfgm
