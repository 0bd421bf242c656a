//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tfgm/error.hpp"
#include "tfgm/graph.hpp"
#include "tfgm/matrix.hpp"
#include "tfgm/operators.hpp"

namespace tfgm {

enum class WeightMode { WeightFree, RandomWeight };
enum class Nonlinearity { None, Relu };

/// Tfgm concatenates every normalized layer 0..L; Basic keeps layer L only.
enum class EmbedMode { Tfgm, Basic };

struct EmbedConfig {
  std::size_t layers = 2;
  OperatorKind op = OperatorKind::SageNorm;
  WeightMode weights = WeightMode::WeightFree;
  /// Seed for RandomWeight. Both graphs of a pair must share it.
  std::uint64_t seed = 0;
  /// Hidden width d for RandomWeight; ignored when weight-free.
  std::size_t hidden_dim = 512;
  Nonlinearity nonlinearity = Nonlinearity::None;
  EmbedMode mode = EmbedMode::Tfgm;
  /// Skip connection H(l) = act(raw(l)) + H(l-1). Basic weight-free only.
  bool residual = false;

  void validate() const {
    if (residual && mode != EmbedMode::Basic)
      throw Error("residual connections are only available in basic mode");
    if (residual && weights != WeightMode::WeightFree)
      throw Error("residual connections require weight-free propagation");
    if (weights == WeightMode::RandomWeight && hidden_dim == 0)
      throw Error("random-weight propagation needs hidden_dim >= 1");
  }
};

inline std::string_view to_string(EmbedMode m) {
  return m == EmbedMode::Tfgm ? "tfgm" : "basic";
}
inline std::string_view to_string(WeightMode m) {
  return m == WeightMode::WeightFree ? "free" : "random";
}
inline std::string_view to_string(Nonlinearity n) {
  return n == Nonlinearity::None ? "none" : "relu";
}

inline EmbedMode parse_embed_mode(std::string_view name) {
  if (name == "tfgm") return EmbedMode::Tfgm;
  if (name == "basic") return EmbedMode::Basic;
  throw Error("unknown mode '" + std::string(name) + "' (expected tfgm or basic)");
}
inline WeightMode parse_weight_mode(std::string_view name) {
  if (name == "free") return WeightMode::WeightFree;
  if (name == "random") return WeightMode::RandomWeight;
  throw Error("unknown weight mode '" + std::string(name) +
              "' (expected free or random)");
}
inline Nonlinearity parse_nonlinearity(std::string_view name) {
  if (name == "none") return Nonlinearity::None;
  if (name == "relu") return Nonlinearity::Relu;
  throw Error("unknown nonlinearity '" + std::string(name) +
              "' (expected none or relu)");
}

/*
 * Gaussian weight matrices W_1..W_L with W_l of shape dims[l-1] x dims[l].
 * Entries are i.i.d. N(0, 1/c) where c is the column count of the matrix.
 * Matrices are filled in order, row-major, from one engine seeded with
 * `seed`, so the result is a pure function of (seed, dims).
 */
inline std::vector<Matrix> random_weights(std::uint64_t seed,
                                          std::size_t layers,
                                          std::span<const std::size_t> dims) {
  if (layers == 0) return {};
  if (dims.size() != layers + 1)
    throw Error("random_weights: expected " + std::to_string(layers + 1) +
                " dimensions, got " + std::to_string(dims.size()));
  std::mt19937_64 rng(seed);
  std::vector<Matrix> out;
  out.reserve(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const auto rows = static_cast<Eigen::Index>(dims[l]);
    const auto cols = static_cast<Eigen::Index>(dims[l + 1]);
    if (cols == 0) throw Error("random_weights: zero output width");
    std::normal_distribution<double> normal(0.0,
                                            1.0 / std::sqrt(double(cols)));
    Matrix w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = normal(rng);
    out.push_back(std::move(w));
  }
  return out;
}

/// Weights used by embed() for a graph with `feature_dim` input columns.
inline std::vector<Matrix> config_weights(const EmbedConfig &config,
                                          std::size_t feature_dim) {
  if (config.weights == WeightMode::WeightFree) return {};
  std::vector<std::size_t> dims(config.layers + 1, config.hidden_dim);
  dims[0] = feature_dim;
  return random_weights(config.seed, config.layers, dims);
}

struct EmbeddingSet {
  /// F(0..L): row-normalized layer outputs (zero rows stay zero).
  std::vector<Matrix> per_layer;
  /// GNN_l(A, X) before activation and normalization; outputs[0] = X.
  std::vector<Matrix> outputs;
  /// Per-node concatenation of the layers the similarity uses.
  Matrix concatenated;
};

/*
 * Propagates the graph features through `config.layers` steps of the
 * configured operator.
 *
 *   raw(l) = op * H(l-1) [* W_l]
 *   H(l)   = act(raw(l))            (+ H(l-1) with residual)
 *   F(l)   = normalize(raw(l))      (normalize(H(l)) with residual)
 *
 * The un-normalized value is carried forward; normalization only affects the
 * stored per-layer copies.
 */
inline EmbeddingSet embed(const Graph &graph, const EmbedConfig &config,
                          std::span<const Matrix> weights) {
  config.validate();
  if (!graph.features())
    throw Error("embed: graph has no node features");
  const Matrix &x = *graph.features();
  const bool random = config.weights == WeightMode::RandomWeight;
  if (random) {
    if (weights.size() != config.layers)
      throw Error("embed: expected " + std::to_string(config.layers) +
                  " weight matrices, got " + std::to_string(weights.size()));
    Eigen::Index width = x.cols();
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (weights[l].rows() != width)
        throw Error("embed: W_" + std::to_string(l + 1) + " has " +
                    std::to_string(weights[l].rows()) + " rows, expected " +
                    std::to_string(width));
      width = weights[l].cols();
    }
  }

  const SparseOperator op = build_operator(graph, config.op);
  EmbeddingSet out;
  out.per_layer.reserve(config.layers + 1);
  out.outputs.reserve(config.layers + 1);
  out.outputs.push_back(x);
  out.per_layer.push_back(normalize_rows(x));

  Matrix h = x;
  for (std::size_t l = 1; l <= config.layers; ++l) {
    Matrix raw = apply(op, h);
    if (random) raw = raw * weights[l - 1];
    Matrix act = config.nonlinearity == Nonlinearity::Relu
                     ? Matrix(raw.cwiseMax(0.0))
                     : raw;
    if (config.residual) {
      h = act + h;
      out.per_layer.push_back(normalize_rows(h));
    } else {
      h = std::move(act);
      out.per_layer.push_back(normalize_rows(raw));
    }
    out.outputs.push_back(std::move(raw));
  }

  if (config.mode == EmbedMode::Basic) {
    out.concatenated = out.per_layer.back();
  } else {
    Eigen::Index width = 0;
    for (const auto &f : out.per_layer) width += f.cols();
    out.concatenated.resize(x.rows(), width);
    Eigen::Index col = 0;
    for (const auto &f : out.per_layer) {
      out.concatenated.middleCols(col, f.cols()) = f;
      col += f.cols();
    }
  }
  return out;
}

inline EmbeddingSet embed(const Graph &graph, const EmbedConfig &config) {
  if (!graph.features())
    throw Error("embed: graph has no node features");
  const auto weights =
      config_weights(config, static_cast<std::size_t>(graph.features()->cols()));
  return embed(graph, config, weights);
}

/// U = O_s O_t^T: per node pair, the sum over layers of cosine similarities.
inline Matrix similarity(const EmbeddingSet &source,
                         const EmbeddingSet &target) {
  if (source.concatenated.cols() != target.concatenated.cols())
    throw Error("similarity: embedding widths differ (" +
                std::to_string(source.concatenated.cols()) + " vs " +
                std::to_string(target.concatenated.cols()) + ")");
  return source.concatenated * target.concatenated.transpose();
}

}  // namespace tfgm
