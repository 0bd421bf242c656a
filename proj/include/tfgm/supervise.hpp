//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "tfgm/assign.hpp"
#include "tfgm/embed.hpp"
#include "tfgm/graph.hpp"
#include "tfgm/match.hpp"

namespace tfgm {

/// Supervised strategy: kNN over the training graphs. Default k follows the
/// usual top-10 neighbour setting.
inline constexpr std::size_t kDefaultNeighbours = 10;

struct LabelFeature {
  /// num_nodes x num_labels; row i sums the one-hot labels of the k
  /// training nodes most similar to node i.
  Matrix rows;
  /// Nodes that collected fewer than k candidates (they sum to fewer).
  std::size_t shortfall_nodes = 0;
};

/*
 * Label-discriminative features for every node of `graph`.
 *
 * The graph is matched against each training graph with unsupervised TFGM.
 * Each training graph contributes at most one candidate per node: the node
 * the assignment pairs it with, scored by their similarity. The k best
 * candidates (ties by training-graph order, then label) vote with their
 * one-hot labels.
 */
inline LabelFeature label_feature(const Graph &graph, const TrainingSet &train,
                                  const EmbedConfig &config, std::size_t k,
                                  Solver solver = Solver::Argmax) {
  if (k == 0) throw Error("label_feature: k must be >= 1");
  if (k > train.size())
    throw Error("label_feature: k=" + std::to_string(k) + " exceeds the " +
                std::to_string(train.size()) + " training graphs");
  if (!graph.features()) throw Error("label_feature: graph has no features");

  struct Candidate {
    double score;
    std::size_t graph_index;
    std::int64_t label;
  };
  const std::size_t n = graph.num_nodes();
  std::vector<std::vector<Candidate>> candidates(n);

  const EmbeddingSet query = embed(graph, config);
  for (std::size_t g = 0; g < train.size(); ++g) {
    const Graph &other = train.graphs()[g];
    if (!other.features())
      throw Error("training graph " + std::to_string(g) + " has no features");
    const Matrix u = similarity(query, embed(other, config));
    const Assignment matched = solve(u, solver);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = matched.target_of[i];
      if (!v) continue;
      candidates[i].push_back({u(static_cast<Eigen::Index>(i),
                                 static_cast<Eigen::Index>(*v)),
                               g, (*other.labels())[*v]});
    }
  }

  LabelFeature out;
  out.rows = Matrix::Zero(static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(train.num_labels()));
  for (std::size_t i = 0; i < n; ++i) {
    auto &c = candidates[i];
    std::sort(c.begin(), c.end(), [](const Candidate &a, const Candidate &b) {
      return std::tie(b.score, a.graph_index, a.label) <
             std::tie(a.score, b.graph_index, b.label);
    });
    if (c.size() < k) ++out.shortfall_nodes;
    const std::size_t take = std::min(k, c.size());
    for (std::size_t t = 0; t < take; ++t)
      out.rows(static_cast<Eigen::Index>(i),
               static_cast<Eigen::Index>(c[t].label)) += 1.0;
  }
  return out;
}

struct SupervisedResult {
  Assignment assignment;
  Matrix similarity;
  LabelFeature source;
  LabelFeature target;
};

/// Matches two graphs by the cosine of their label features.
inline SupervisedResult supervised_match(const Graph &source,
                                         const Graph &target,
                                         const TrainingSet &train,
                                         const EmbedConfig &config,
                                         std::size_t k,
                                         Solver solver = Solver::Hungarian,
                                         Solver train_solver = Solver::Argmax) {
  SupervisedResult r;
  r.source = label_feature(source, train, config, k, train_solver);
  r.target = label_feature(target, train, config, k, train_solver);
  r.similarity =
      normalize_rows(r.source.rows) * normalize_rows(r.target.rows).transpose();
  r.assignment = solve(r.similarity, solver);
  return r;
}

struct AnchorOverride {
  Matrix source;
  Matrix target;
  std::size_t row_writes = 0;
};

/// Copies the counterpart's original feature row onto both ends of every
/// anchor pair: exactly two row writes per anchor.
inline AnchorOverride override_anchor_features(const Matrix &source,
                                               const Matrix &target,
                                               const AnchorSet &anchors) {
  if (source.cols() != target.cols())
    throw Error("anchor override: feature widths differ (" +
                std::to_string(source.cols()) + " vs " +
                std::to_string(target.cols()) + ")");
  anchors.check_bounds(static_cast<std::size_t>(source.rows()),
                       static_cast<std::size_t>(target.rows()));
  AnchorOverride out{source, target, 0};
  for (const auto &p : anchors) {
    const auto i = static_cast<Eigen::Index>(p.source);
    const auto j = static_cast<Eigen::Index>(p.target);
    out.source.row(i) = target.row(j);
    out.target.row(j) = source.row(i);
    out.row_writes += 2;
  }
  return out;
}

/*
 * Semi-supervised strategy: run TFGM once with the anchored source features
 * overridden and once with the anchored target features overridden, then sum
 * the two similarity matrices before solving.
 */
inline MatchResult semi_supervised_match(const Graph &source,
                                         const Graph &target,
                                         const AnchorSet &anchors,
                                         const EmbedConfig &config,
                                         Solver solver = Solver::Hungarian) {
  if (!source.features() || !target.features())
    throw Error("semi_supervised_match: both graphs need node features");
  const AnchorOverride ov =
      override_anchor_features(*source.features(), *target.features(), anchors);
  const EmbeddingSet es = embed(source, config);
  const EmbeddingSet et = embed(target, config);
  const EmbeddingSet es_hat = embed(source.with_features(ov.source), config);
  const EmbeddingSet et_hat = embed(target.with_features(ov.target), config);
  MatchResult r;
  r.similarity = similarity(es_hat, et) + similarity(es, et_hat);
  r.assignment = solve(r.similarity, solver);
  return r;
}

}  // namespace tfgm
