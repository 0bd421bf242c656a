//
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace tfgm;
using namespace tfgm::testing;

namespace {

EmbedConfig layers(std::size_t l) {
  EmbedConfig c;
  c.layers = l;
  return c;
}

// Graph with pairwise distinct embedding rows: a path with distinct features.
Graph labelled_path(std::vector<std::int64_t> labels) {
  const std::size_t n = labels.size();
  std::vector<Edge> edges;
  for (NodeIndex i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  Matrix x(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) << std::cos(0.3 * double(i)), std::sin(0.3 * double(i));
  return Graph::from_edges(n, edges).with_features(x).with_labels(std::move(labels));
}

}  // namespace

TEST(LabelFeature, SingleTrainingGraphOneHot) {
  // One node matched to a node labelled 3 out of labels 0..4.
  const Graph train = isolated().with_features(rows({{1.0}})).with_labels({3});
  const TrainingSet ts({train, make_graph(1, {}).with_features(rows({{1.0}})).with_labels({4})});
  const Graph g = isolated().with_features(rows({{2.0}}));
  const auto f = label_feature(g, TrainingSet({train}), layers(0), 1);
  EXPECT_EQ(f.rows.cols(), 4);
  EXPECT_EQ(f.rows, rows({{0, 0, 0, 1}}));
  // With a five-label set the row widens.
  const auto g5 = label_feature(g, ts, layers(0), 1);
  EXPECT_EQ(g5.rows, rows({{0, 0, 0, 1, 0}}));
}

TEST(LabelFeature, VotesAccumulate) {
  const auto x = rows({{1.0}});
  const TrainingSet ts({isolated().with_features(x).with_labels({2}),
                        isolated().with_features(x).with_labels({2}),
                        isolated().with_features(x).with_labels({0})});
  const auto f = label_feature(isolated().with_features(x), ts, layers(0), 3);
  EXPECT_EQ(f.rows, rows({{1, 0, 2}}));
  EXPECT_EQ(f.shortfall_nodes, 0u);
}

TEST(LabelFeature, TopKPrefersHigherScoreThenEarlierGraph) {
  const TrainingSet ts({isolated().with_features(rows({{0.0, 1.0}})).with_labels({0}),
                        isolated().with_features(rows({{1.0, 0.0}})).with_labels({1}),
                        isolated().with_features(rows({{1.0, 0.0}})).with_labels({2})});
  const auto f = label_feature(isolated().with_features(rows({{1.0, 0.0}})), ts, layers(0), 1);
  EXPECT_EQ(f.rows, rows({{0, 1, 0}}));
}

TEST(LabelFeature, IdenticalGraphRecoversOwnLabels) {
  const Graph g = labelled_path({4, 0, 3, 1, 2});
  for (auto solver : {Solver::Argmax, Solver::Hungarian}) {
    const auto f = label_feature(g.without_features().with_features(*g.features()),
                                 TrainingSet({g}), layers(2), 1, solver);
    for (Eigen::Index i = 0; i < 5; ++i) {
      Matrix expected = Matrix::Zero(1, 5);
      expected(0, (*g.labels())[std::size_t(i)]) = 1.0;
      EXPECT_EQ(f.rows.row(i), expected);
    }
  }
}

TEST(LabelFeature, RowsSumToK) {
  std::mt19937_64 rng(83);
  std::vector<Graph> graphs;
  for (int n = 0; n < 6; ++n) {
    const std::size_t size = 4 + rng() % 4;
    std::vector<std::int64_t> labels(size);
    for (std::size_t i = 0; i < size; ++i) labels[i] = std::int64_t(i);
    std::shuffle(labels.begin(), labels.end(), rng);
    graphs.push_back(random_graph(size, 0.4, rng).with_features(gaussian(size, 3, rng)).with_labels(labels));
  }
  const TrainingSet ts(graphs);
  const Graph g = random_graph(5, 0.4, rng).with_features(gaussian(5, 3, rng));
  for (std::size_t k = 1; k <= 6; ++k) {
    const auto f = label_feature(g, ts, layers(2), k);
    EXPECT_EQ(f.shortfall_nodes, 0u);
    for (Eigen::Index i = 0; i < f.rows.rows(); ++i) EXPECT_EQ(f.rows.row(i).sum(), double(k));
    EXPECT_TRUE((f.rows.array() >= 0).all());
  }
}

TEST(LabelFeature, UnmatchedNodesReportShortfall) {
  // A 3-node query against 2-node training graphs under Hungarian leaves one
  // node unmatched per training graph.
  const Graph t = single_edge().with_features(rows({{1, 0}, {0, 1}})).with_labels({0, 1});
  const Graph q = path3().with_features(rows({{1, 0}, {0, 1}, {1, 1}}));
  const auto f = label_feature(q, TrainingSet({t, t}), layers(1), 2, Solver::Hungarian);
  EXPECT_GT(f.shortfall_nodes, 0u);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_LE(f.rows.row(i).sum(), 2.0);
}

TEST(LabelFeature, Preconditions) {
  const Graph t = isolated().with_features(rows({{1.0}})).with_labels({0});
  const Graph g = isolated().with_features(rows({{1.0}}));
  EXPECT_THROW(label_feature(g, TrainingSet({t}), layers(0), 0), Error);
  EXPECT_THROW(label_feature(g, TrainingSet({t}), layers(0), 2), Error);
  EXPECT_THROW(label_feature(isolated(), TrainingSet({t}), layers(0), 1), Error);
}

TEST(SupervisedMatch, CosineOfLabelRows) {
  // The pair is its own training graph, so every node votes for its own label.
  const Graph t = labelled_path({0, 1, 2});
  const auto r = supervised_match(t, t, TrainingSet({t}), layers(1), 1);
  EXPECT_EQ(r.similarity, Matrix::Identity(3, 3));
  EXPECT_EQ(r.assignment.target_of, (std::vector<std::optional<NodeIndex>>{0, 1, 2}));
}

TEST(SupervisedMatch, CosineExamples) {
  // The cosine used by supervised matching on hand-made label rows.
  const Matrix a = normalize_rows(rows({{1, 1, 0}}));
  const Matrix b = normalize_rows(rows({{1, 0, 1}, {0, 0, 1}, {1, 1, 0}}));
  const Matrix u = a * b.transpose();
  EXPECT_NEAR(u(0, 0), 0.5, 1e-15);
  EXPECT_EQ(u(0, 1), 0.0);
  EXPECT_NEAR(u(0, 2), 1.0, 1e-15);
}

TEST(AnchorOverride, TwoWritesPerAnchorFromOriginals) {
  const Matrix xs = rows({{1, 0}, {2, 0}, {3, 0}});
  const Matrix xt = rows({{0, 1}, {0, 2}, {0, 3}});
  // Chained anchors would read overwritten rows if writes were in place.
  const AnchorSet anchors({{0, 1}, {1, 0}});
  const auto ov = override_anchor_features(xs, xt, anchors);
  EXPECT_EQ(ov.row_writes, 4u);
  EXPECT_EQ(ov.source, rows({{0, 2}, {0, 1}, {3, 0}}));
  EXPECT_EQ(ov.target, rows({{2, 0}, {1, 0}, {0, 3}}));
  EXPECT_THROW(override_anchor_features(xs, Matrix::Zero(3, 3), anchors), Error);
  EXPECT_THROW(override_anchor_features(xs, xt, AnchorSet({{0, 5}})), Error);
}

TEST(SemiSupervised, SingleAnchorAtLayerZero) {
  const Graph gs = single_edge().with_features(rows({{1, 0}, {0, 1}}));
  const Graph gt = single_edge().with_features(rows({{0, 1}, {1, 1}}));
  const auto r = semi_supervised_match(gs, gt, AnchorSet({{0, 0}}), layers(0));
  EXPECT_NEAR(r.similarity(0, 0), 2.0, 1e-15);
}

TEST(SemiSupervised, EmptyAnchorsDoubleTheUnsupervisedScore) {
  std::mt19937_64 rng(89);
  const Graph gs = random_graph(7, 0.4, rng).with_features(gaussian(7, 3, rng));
  const Graph gt = random_graph(8, 0.4, rng).with_features(gaussian(8, 3, rng));
  const auto c = layers(3);
  const auto semi = semi_supervised_match(gs, gt, AnchorSet{}, c, Solver::Argmax);
  const auto plain = match(gs, gt, c, Solver::Argmax);
  EXPECT_EQ(semi.similarity, 2.0 * plain.similarity);
  EXPECT_EQ(semi.assignment.target_of, plain.assignment.target_of);
}

TEST(SemiSupervised, FullAnchorsRecoverMappingAtLayerZero) {
  const Graph gs = path3().with_features(rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  const Graph gt = path3().with_features(rows({{1, 1, 0}, {0, 1, 1}, {1, 0, 1}}));
  const AnchorSet anchors({{0, 2}, {1, 0}, {2, 1}});
  const auto r = semi_supervised_match(gs, gt, anchors, layers(0));
  EXPECT_EQ(r.assignment.target_of, (std::vector<std::optional<NodeIndex>>{2, 0, 1}));
  // Matches brute force over all maps.
  double best = -1;
  for (const auto &s : enumerate_assignments(3, 3)) best = std::max(best, objective(r.similarity, s));
  EXPECT_EQ(objective(r.similarity, r.assignment), best);
}

TEST(SemiSupervised, WidthMismatchThrows) {
  const Graph gs = path3().with_features(Matrix::Ones(3, 2));
  const Graph gt = path3().with_features(Matrix::Ones(3, 3));
  EXPECT_THROW(semi_supervised_match(gs, gt, AnchorSet({{0, 0}}), layers(1)), Error);
}
