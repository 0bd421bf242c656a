//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tfgm/error.hpp"
#include "tfgm/graph.hpp"
#include "tfgm/matrix.hpp"

namespace tfgm {

/*
 * One propagation step of a weight-free GCN-flavored network.
 *
 *   Adjacency  A                      (no self-loops)
 *   GcnNorm    D^-1/2 (A+I) D^-1/2    D_ii = 1 + deg(i)
 *   SageNorm   D^-1 (A+I)             mean over the closed neighborhood
 */
enum class OperatorKind { Adjacency, GcnNorm, SageNorm };

inline std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Adjacency: return "adj";
    case OperatorKind::GcnNorm: return "gcn";
    case OperatorKind::SageNorm: return "sage";
  }
  return "?";
}

inline OperatorKind parse_operator_kind(std::string_view name) {
  if (name == "adj" || name == "adjacency") return OperatorKind::Adjacency;
  if (name == "gcn") return OperatorKind::GcnNorm;
  if (name == "sage" || name == "mean") return OperatorKind::SageNorm;
  throw Error("unknown operator '" + std::string(name) +
              "' (expected adj, gcn or sage)");
}

/// Square sparse matrix in compressed-row form with non-negative entries.
class SparseOperator {
 public:
  SparseOperator() : offsets_(1, 0) {}
  SparseOperator(std::size_t n, std::vector<std::size_t> offsets,
                 std::vector<std::size_t> columns, std::vector<double> values)
      : n_(n),
        offsets_(std::move(offsets)),
        columns_(std::move(columns)),
        values_(std::move(values)) {
    if (offsets_.size() != n_ + 1 || columns_.size() != values_.size() ||
        offsets_.back() != columns_.size())
      throw Error("inconsistent compressed-row operator layout");
  }

  std::size_t size() const { return n_; }
  std::size_t nonzeros() const { return values_.size(); }
  std::span<const std::size_t> row_offsets() const { return offsets_; }
  std::span<const std::size_t> column_indices() const { return columns_; }
  std::span<const double> values() const { return values_; }

  /// Entry (i, j); zero when not stored.
  double at(std::size_t i, std::size_t j) const {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k)
      if (columns_[k] == j) return values_[k];
    return 0.0;
  }

  Matrix to_dense() const {
    Matrix d = Matrix::Zero(static_cast<Eigen::Index>(n_),
                            static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k)
        d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(columns_[k])) =
            values_[k];
    return d;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> columns_;
  std::vector<double> values_;
};

inline SparseOperator build_operator(const Graph &graph, OperatorKind kind) {
  const std::size_t n = graph.num_nodes();
  const bool self_loops = kind != OperatorKind::Adjacency;
  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<std::size_t> columns;
  std::vector<double> values;
  columns.reserve(graph.column_indices().size() + (self_loops ? n : 0));
  values.reserve(columns.capacity());

  // Closed-neighborhood size, i.e. the row sum of A + I.
  std::vector<double> closed_degree(n);
  for (std::size_t i = 0; i < n; ++i)
    closed_degree[i] = static_cast<double>(graph.degree(i)) + 1.0;

  auto weight = [&](std::size_t i, std::size_t j) {
    switch (kind) {
      case OperatorKind::Adjacency: return 1.0;
      case OperatorKind::GcnNorm:
        return 1.0 / std::sqrt(closed_degree[i] * closed_degree[j]);
      case OperatorKind::SageNorm: return 1.0 / closed_degree[i];
    }
    return 0.0;
  };

  for (std::size_t i = 0; i < n; ++i) {
    bool diagonal_done = !self_loops;
    for (std::size_t j : graph.neighbors(i)) {
      if (!diagonal_done && j > i) {
        columns.push_back(i);
        values.push_back(weight(i, i));
        diagonal_done = true;
      }
      columns.push_back(j);
      values.push_back(weight(i, j));
    }
    if (!diagonal_done) {
      columns.push_back(i);
      values.push_back(weight(i, i));
    }
    offsets[i + 1] = columns.size();
  }
  return SparseOperator(n, std::move(offsets), std::move(columns),
                        std::move(values));
}

/// Sparse-dense product op * dense. Each output row depends on one operator
/// row only.
inline Matrix apply(const SparseOperator &op, const Matrix &dense) {
  if (static_cast<std::size_t>(dense.rows()) != op.size())
    throw Error("apply: operator is " + std::to_string(op.size()) + "x" +
                std::to_string(op.size()) + " but dense matrix has " +
                std::to_string(dense.rows()) + " rows");
  Matrix out = Matrix::Zero(dense.rows(), dense.cols());
  const auto offsets = op.row_offsets();
  const auto columns = op.column_indices();
  const auto values = op.values();
  for (std::size_t i = 0; i < op.size(); ++i) {
    auto row = out.row(static_cast<Eigen::Index>(i));
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k)
      row.noalias() += values[k] * dense.row(static_cast<Eigen::Index>(columns[k]));
  }
  return out;
}

}  // namespace tfgm
