//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "tfgm/error.hpp"

namespace tfgm {

/// Dense real matrix. Row-major so that node rows are contiguous.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Scales every row to unit Euclidean norm. Rows with zero norm stay zero.
inline Matrix normalize_rows(const Matrix &m) {
  Matrix out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > 0.0)
      out.row(i) /= norm;
    else
      out.row(i).setZero();
  }
  return out;
}

/// Cosine similarity with the convention that a zero vector has cosine 0
/// with everything.
template <class A, class B>
double cosine(const Eigen::MatrixBase<A> &a, const Eigen::MatrixBase<B> &b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

inline bool all_finite(const Matrix &m) {
  return m.allFinite();
}

inline void require_finite(const Matrix &m, const char *what) {
  if (!all_finite(m))
    throw Error(std::string(what) + ": matrix contains non-finite entries");
}

}  // namespace tfgm
