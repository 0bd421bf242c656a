//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tfgm/error.hpp"
#include "tfgm/graph.hpp"
#include "tfgm/matrix.hpp"

namespace tfgm {

/// Map from source nodes to target nodes. `injective` records whether no
/// target repeats, i.e. whether the map is a member of the one-to-one
/// constraint set.
struct Assignment {
  std::vector<std::optional<NodeIndex>> target_of;
  bool injective = true;

  std::size_t size() const { return target_of.size(); }
};

enum class Solver { Hungarian, Argmax };

inline std::string_view to_string(Solver s) {
  return s == Solver::Hungarian ? "hungarian" : "argmax";
}

inline Solver parse_solver(std::string_view name) {
  if (name == "hungarian") return Solver::Hungarian;
  if (name == "argmax") return Solver::Argmax;
  throw Error("unknown solver '" + std::string(name) +
              "' (expected hungarian or argmax)");
}

inline bool is_injective(const Assignment &a) {
  std::vector<NodeIndex> used;
  for (const auto &t : a.target_of)
    if (t) used.push_back(*t);
  std::sort(used.begin(), used.end());
  return std::adjacent_find(used.begin(), used.end()) == used.end();
}

/// Sum of U over matched pairs.
inline double objective(const Matrix &u, const Assignment &a) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.target_of[i])
      total += u(static_cast<Eigen::Index>(i),
                 static_cast<Eigen::Index>(*a.target_of[i]));
  return total;
}

namespace detail {

/*
 * Maximum-weight injective assignment of the rows of `u` into its columns,
 * rows <= cols. Shortest augmenting path Hungarian on costs -u, O(n^2 m).
 *
 * The final potentials (row_pot, col_pot) certify optimality: an injective
 * map is optimal iff it only uses tight cells and leaves unmatched only
 * columns whose potential is zero. The second phase uses that certificate
 * to walk to the lexicographically smallest optimal map, row by row.
 */
inline std::vector<std::size_t> hungarian_rows_le_cols(const Matrix &u) {
  const std::size_t n = static_cast<std::size_t>(u.rows());
  const std::size_t m = static_cast<std::size_t>(u.cols());
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  if (n == 0) return {};

  auto cost = [&](std::size_t i, std::size_t j) {
    return -u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };

  const double inf = std::numeric_limits<double>::infinity();
  // 1-based indexing; column 0 is the virtual root of each search.
  std::vector<double> row_pot(n + 1, 0.0), col_pot(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
  std::vector<double> min_slack(m + 1);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - row_pot[i0] - col_pot[j];
        if (cur < min_slack[j]) {
          min_slack[j] = cur;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          row_pot[owner[j]] += delta;
          col_pot[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> col_of(n, none), row_of(m, none);
  for (std::size_t j = 1; j <= m; ++j)
    if (owner[j] != 0) {
      col_of[owner[j] - 1] = j - 1;
      row_of[j - 1] = owner[j] - 1;
    }

  double scale = 1.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j)
      scale = std::max(scale, std::abs(u(i, j)));
  const double tol = 1e-10 * scale;
  auto tight = [&](std::size_t i, std::size_t j) {
    return cost(i, j) - row_pot[i + 1] - col_pot[j + 1] <= tol;
  };
  auto may_be_free = [&](std::size_t j) { return col_pot[j + 1] >= -tol; };

  // Lexicographic refinement over the set of optimal assignments. Row i
  // tries each smaller tight column j. Rows < i are frozen. If j's owner r
  // exists it needs a new column (augmenting search); then, if i's old
  // column `old` is left empty but may not be, some row must take it and
  // release a column that may be empty (exchange search).
  std::vector<std::size_t> parent(std::max(n, m));
  std::vector<char> seen;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t old = col_of[i];
    for (std::size_t j = 0; j < old; ++j) {
      if (!tight(i, j)) continue;
      const std::size_t r = row_of[j];
      if (r != none && r < i) continue;
      const auto saved_col = col_of;
      const auto saved_row = row_of;
      row_of[old] = none;
      col_of[i] = j;
      row_of[j] = i;

      bool ok = true;
      if (r != none) {
        // Augmenting search: r lost j and needs any tight unowned column.
        col_of[r] = none;
        seen.assign(n, 0);
        std::fill(parent.begin(), parent.end(), none);
        std::deque<std::size_t> queue{r};
        seen[r] = 1;
        std::size_t end_row = none, end_col = none;
        while (!queue.empty() && end_row == none) {
          const std::size_t x = queue.front();
          queue.pop_front();
          for (std::size_t y = 0; y < m; ++y) {
            if (y == col_of[x] || !tight(x, y)) continue;
            const std::size_t z = row_of[y];
            if (z == none) {
              end_row = x;
              end_col = y;
              break;
            }
            if (z <= i || seen[z]) continue;
            seen[z] = 1;
            parent[z] = x;
            queue.push_back(z);
          }
        }
        if (end_row == none) {
          ok = false;
        } else {
          for (std::size_t x = end_row, y = end_col;;) {
            const std::size_t prev = col_of[x];
            col_of[x] = y;
            row_of[y] = x;
            if (x == r) break;
            y = prev;
            x = parent[x];
          }
        }
      }
      if (ok && row_of[old] == none && !may_be_free(old)) {
        // Exchange search: some row > i takes `old`, releasing its column,
        // until a released column may stay empty.
        seen.assign(m, 0);
        std::fill(parent.begin(), parent.end(), none);
        std::deque<std::size_t> queue{old};
        seen[old] = 1;
        std::size_t end_col = none;
        while (!queue.empty() && end_col == none) {
          const std::size_t c = queue.front();
          queue.pop_front();
          for (std::size_t w = i + 1; w < n; ++w) {
            const std::size_t cw = col_of[w];
            if (seen[cw] || !tight(w, c)) continue;
            seen[cw] = 1;
            parent[cw] = c;
            if (may_be_free(cw)) {
              end_col = cw;
              break;
            }
            queue.push_back(cw);
          }
        }
        if (end_col == none) {
          ok = false;
        } else {
          // Each column on the path passes its row to its parent column.
          std::vector<std::size_t> movers;
          for (std::size_t c = end_col; c != old; c = parent[c])
            movers.push_back(row_of[c]);
          row_of[end_col] = none;
          std::size_t c = end_col;
          for (const std::size_t w : movers) {
            c = parent[c];
            col_of[w] = c;
            row_of[c] = w;
          }
        }
      }
      if (ok) break;
      col_of = saved_col;
      row_of = saved_row;
    }
  }
  return col_of;
}

}  // namespace detail

/*
 * Exact maximum of sum_ij S_ij U_ij over one-to-one assignments. When there
 * are more source than target nodes the problem is solved on U^T and the
 * surplus sources are left unmatched. Among optimal assignments the
 * lexicographically smallest target_of list is returned.
 */
inline Assignment solve_hungarian(const Matrix &u) {
  require_finite(u, "solve_hungarian");
  Assignment a;
  a.injective = true;
  a.target_of.assign(static_cast<std::size_t>(u.rows()), std::nullopt);
  if (u.rows() <= u.cols()) {
    const auto cols = detail::hungarian_rows_le_cols(u);
    for (std::size_t i = 0; i < cols.size(); ++i) a.target_of[i] = cols[i];
  } else {
    const Matrix ut = u.transpose();
    const auto rows = detail::hungarian_rows_le_cols(ut);
    for (std::size_t j = 0; j < rows.size(); ++j) a.target_of[rows[j]] = j;
  }
  return a;
}

/// Row-wise argmax, ties to the smallest column. Not one-to-one in general.
inline Assignment solve_argmax(const Matrix &u) {
  require_finite(u, "solve_argmax");
  Assignment a;
  a.target_of.assign(static_cast<std::size_t>(u.rows()), std::nullopt);
  if (u.cols() > 0)
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      Eigen::Index best = 0;
      for (Eigen::Index j = 1; j < u.cols(); ++j)
        if (u(i, j) > u(i, best)) best = j;
      a.target_of[static_cast<std::size_t>(i)] = static_cast<NodeIndex>(best);
    }
  a.injective = is_injective(a);
  return a;
}

inline Assignment solve(const Matrix &u, Solver solver) {
  return solver == Solver::Hungarian ? solve_hungarian(u) : solve_argmax(u);
}

/// Fraction of truth pairs reproduced by the assignment.
inline double accuracy(const Assignment &a, const GroundTruth &truth) {
  if (truth.empty()) throw Error("accuracy: ground truth is empty");
  std::size_t hits = 0;
  for (const auto &p : truth)
    if (p.source < a.size() && a.target_of[p.source] == p.target) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

/// 1-based rank of column j in row i: entries strictly larger come first,
/// equal entries with a smaller column index come first.
inline std::size_t rank_in_row(const Matrix &u, NodeIndex i, NodeIndex j) {
  const auto row = u.row(static_cast<Eigen::Index>(i));
  const double v = row(static_cast<Eigen::Index>(j));
  std::size_t rank = 1;
  for (Eigen::Index c = 0; c < row.size(); ++c) {
    const double w = row(c);
    if (w > v || (w == v && static_cast<NodeIndex>(c) < j)) ++rank;
  }
  return rank;
}

inline double hits_at_k(const Matrix &u, const GroundTruth &truth,
                        std::size_t k) {
  if (k == 0) throw Error("hits_at_k: k must be >= 1");
  if (truth.empty()) return 0.0;
  truth.check_bounds(static_cast<std::size_t>(u.rows()),
                     static_cast<std::size_t>(u.cols()));
  std::size_t hits = 0;
  for (const auto &p : truth)
    if (rank_in_row(u, p.source, p.target) <= k) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

inline double mrr(const Matrix &u, const GroundTruth &truth) {
  if (truth.empty()) return 0.0;
  truth.check_bounds(static_cast<std::size_t>(u.rows()),
                     static_cast<std::size_t>(u.cols()));
  double total = 0.0;
  for (const auto &p : truth)
    total += 1.0 / static_cast<double>(rank_in_row(u, p.source, p.target));
  return total / static_cast<double>(truth.size());
}

}  // namespace tfgm
