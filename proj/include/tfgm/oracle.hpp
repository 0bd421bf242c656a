//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tfgm/assign.hpp"
#include "tfgm/embed.hpp"
#include "tfgm/error.hpp"
#include "tfgm/graph.hpp"
#include "tfgm/matrix.hpp"
#include "tfgm/operators.hpp"

namespace tfgm {

/// Largest graph side the brute-force routines accept (8! = 40320 maps).
inline constexpr std::size_t kEnumerationLimit = 8;
/// Agreement required between the two sides of each equivalence check.
inline constexpr double kEquivalenceTolerance = 1e-9;

inline void check_enumeration_bounds(std::size_t ns, std::size_t nt,
                                     std::size_t limit = kEnumerationLimit) {
  if (ns > nt)
    throw Error("enumeration needs |V_s| <= |V_t| (got " + std::to_string(ns) +
                " > " + std::to_string(nt) + ")");
  if (nt > limit)
    throw Error("enumeration bound exceeded: " + std::to_string(nt) + " > " +
                std::to_string(limit) + " nodes");
}

/// Calls fn(span of targets) for every injective map {0..ns-1} -> {0..nt-1}
/// in lexicographic order.
template <class Fn>
void for_each_injective_map(std::size_t ns, std::size_t nt, Fn &&fn,
                            std::size_t limit = kEnumerationLimit) {
  check_enumeration_bounds(ns, nt, limit);
  std::vector<NodeIndex> current(ns);
  std::vector<char> taken(nt, 0);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == ns) {
      fn(std::span<const NodeIndex>(current));
      return;
    }
    for (NodeIndex j = 0; j < nt; ++j) {
      if (taken[j]) continue;
      taken[j] = 1;
      current[i] = j;
      rec(i + 1);
      taken[j] = 0;
    }
  };
  rec(0);
}

inline Assignment to_assignment(std::span<const NodeIndex> targets) {
  Assignment a;
  a.target_of.assign(targets.begin(), targets.end());
  a.injective = true;
  return a;
}

inline std::vector<Assignment> enumerate_assignments(std::size_t ns,
                                                     std::size_t nt) {
  std::vector<Assignment> out;
  for_each_injective_map(ns, nt, [&](std::span<const NodeIndex> t) {
    out.push_back(to_assignment(t));
  });
  return out;
}

/// Indicator matrix of an assignment.
inline Matrix assignment_matrix(const Assignment &s, std::size_t nt) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(s.size()),
                          static_cast<Eigen::Index>(nt));
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.target_of[i])
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*s.target_of[i])) = 1.0;
  return m;
}

// ---------------------------------------------------------------------------
// Quadratic assignment
// ---------------------------------------------------------------------------

/// Node affinity Q plus the 4-index edge affinity T[i][i'][j][j'] (dense).
struct QapInstance {
  Matrix q;
  std::vector<double> t4;

  std::size_t ns() const { return static_cast<std::size_t>(q.rows()); }
  std::size_t nt() const { return static_cast<std::size_t>(q.cols()); }
  std::size_t index(std::size_t i, std::size_t i2, std::size_t j,
                    std::size_t j2) const {
    return ((i * ns() + i2) * nt() + j) * nt() + j2;
  }
  double t(std::size_t i, std::size_t i2, std::size_t j, std::size_t j2) const {
    return t4[index(i, i2, j, j2)];
  }
  void validate() const {
    if (t4.size() != ns() * ns() * nt() * nt())
      throw Error("QAP instance: edge tensor has " + std::to_string(t4.size()) +
                  " entries, expected " +
                  std::to_string(ns() * ns() * nt() * nt()));
  }
};

/// T[i][i'][j][j'] = A_s(i,i') * A_t(j,j').
inline QapInstance edge_cooccurrence_instance(Matrix q, const Matrix &as,
                                              const Matrix &at) {
  if (as.rows() != q.rows() || at.rows() != q.cols() || as.cols() != as.rows() ||
      at.cols() != at.rows())
    throw Error("edge_cooccurrence_instance: shape mismatch");
  QapInstance inst{std::move(q), {}};
  const std::size_t ns = inst.ns(), nt = inst.nt();
  inst.t4.resize(ns * ns * nt * nt);
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t i2 = 0; i2 < ns; ++i2)
      for (std::size_t j = 0; j < nt; ++j)
        for (std::size_t j2 = 0; j2 < nt; ++j2)
          inst.t4[inst.index(i, i2, j, j2)] =
              as(Eigen::Index(i), Eigen::Index(i2)) * at(Eigen::Index(j), Eigen::Index(j2));
  return inst;
}

inline void check_assignment_shape(const Assignment &s, std::size_t ns,
                                   std::size_t nt) {
  if (s.size() != ns)
    throw Error("assignment covers " + std::to_string(s.size()) +
                " source nodes, instance has " + std::to_string(ns));
  for (const auto &t : s.target_of)
    if (t && *t >= nt) throw Error("assignment target out of range");
}

/// sum Q_ij S_ij + sum T_{ii';jj'} S_ij S_i'j', evaluated on the map.
inline double qap_objective(const QapInstance &inst, const Assignment &s) {
  inst.validate();
  check_assignment_shape(s, inst.ns(), inst.nt());
  if (!is_injective(s)) throw Error("qap_objective: assignment not injective");
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s.target_of[i]) continue;
    const std::size_t j = *s.target_of[i];
    total += inst.q(Eigen::Index(i), Eigen::Index(j));
    for (std::size_t i2 = 0; i2 < s.size(); ++i2)
      if (s.target_of[i2]) total += inst.t(i, i2, j, *s.target_of[i2]);
  }
  return total;
}

struct QapSolution {
  Assignment assignment;
  double value = -std::numeric_limits<double>::infinity();
};

/// Exhaustive maximum; the first maximizer in enumeration order wins ties.
inline QapSolution qap_brute(const QapInstance &inst) {
  inst.validate();
  QapSolution best;
  for_each_injective_map(inst.ns(), inst.nt(), [&](std::span<const NodeIndex> t) {
    Assignment s = to_assignment(t);
    const double v = qap_objective(inst, s);
    if (v > best.value) {
      best.value = v;
      best.assignment = std::move(s);
    }
  });
  return best;
}

// ---------------------------------------------------------------------------
// Linear relaxation
// ---------------------------------------------------------------------------

/*
 * sum_ij Q_ij S_ij + sum_{i,i',j,j'} A_s(i,i') A_t(j,j') P^(ij)_{i'j'} S_ij
 *
 * P is stored densely as P[i][j][i'][j'].
 */
struct RelaxInstance {
  Matrix q;
  Matrix as;
  Matrix at;
  std::vector<double> p;

  std::size_t ns() const { return static_cast<std::size_t>(q.rows()); }
  std::size_t nt() const { return static_cast<std::size_t>(q.cols()); }
  std::size_t index(std::size_t i, std::size_t j, std::size_t i2,
                    std::size_t j2) const {
    return ((i * nt() + j) * ns() + i2) * nt() + j2;
  }
  double p_at(std::size_t i, std::size_t j, std::size_t i2,
              std::size_t j2) const {
    return p[index(i, j, i2, j2)];
  }
  void validate() const {
    if (as.rows() != q.rows() || as.cols() != q.rows() ||
        at.rows() != q.cols() || at.cols() != q.cols())
      throw Error("relaxed instance: operator shapes do not match Q");
    if (p.size() != ns() * nt() * ns() * nt())
      throw Error("relaxed instance: P has wrong size");
  }
};

/// Same P block for every (i, j).
inline std::vector<double> broadcast_p(const Matrix &block) {
  const std::size_t ns = static_cast<std::size_t>(block.rows());
  const std::size_t nt = static_cast<std::size_t>(block.cols());
  std::vector<double> p;
  p.reserve(ns * nt * ns * nt);
  for (std::size_t k = 0; k < ns * nt; ++k)
    for (Eigen::Index i2 = 0; i2 < block.rows(); ++i2)
      for (Eigen::Index j2 = 0; j2 < block.cols(); ++j2)
        p.push_back(block(i2, j2));
  return p;
}

/// Relaxed objective as a linear functional of an arbitrary real matrix S.
inline double relaxed_objective(const RelaxInstance &inst, const Matrix &s) {
  inst.validate();
  if (s.rows() != inst.q.rows() || s.cols() != inst.q.cols())
    throw Error("relaxed_objective: S has wrong shape");
  const std::size_t ns = inst.ns(), nt = inst.nt();
  double total = 0.0;
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nt; ++j) {
      const double sij = s(Eigen::Index(i), Eigen::Index(j));
      if (sij == 0.0) continue;
      double structural = 0.0;
      for (std::size_t i2 = 0; i2 < ns; ++i2) {
        const double a = inst.as(Eigen::Index(i), Eigen::Index(i2));
        if (a == 0.0) continue;
        for (std::size_t j2 = 0; j2 < nt; ++j2)
          structural += a * inst.at(Eigen::Index(j), Eigen::Index(j2)) *
                        inst.p_at(i, j, i2, j2);
      }
      total += sij * (inst.q(Eigen::Index(i), Eigen::Index(j)) + structural);
    }
  return total;
}

inline double relaxed_objective(const RelaxInstance &inst, const Assignment &s) {
  check_assignment_shape(s, inst.ns(), inst.nt());
  return relaxed_objective(inst, assignment_matrix(s, inst.nt()));
}

// ---------------------------------------------------------------------------
// Relaxation equivalence checks
// ---------------------------------------------------------------------------

/// Dense operator built straight from the adjacency, independent of the
/// sparse construction used by embed().
inline Matrix dense_operator(const Graph &g, OperatorKind kind) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Matrix a = Matrix::Zero(n, n);
  for (const auto &[u, v] : g.edge_list()) {
    a(Eigen::Index(u), Eigen::Index(v)) = 1.0;
    a(Eigen::Index(v), Eigen::Index(u)) = 1.0;
  }
  if (kind == OperatorKind::Adjacency) return a;
  const Matrix a_tilde = a + Matrix::Identity(n, n);
  const Vector d = a_tilde.rowwise().sum();
  if (kind == OperatorKind::SageNorm)
    return d.cwiseInverse().asDiagonal() * a_tilde;
  const Vector d_half = d.cwiseSqrt().cwiseInverse();
  return d_half.asDiagonal() * a_tilde * d_half.asDiagonal();
}

/// Dense forward pass: hidden[l] = H(l) and outputs[l] = GNN_l(A, X).
struct DenseForward {
  std::vector<Matrix> hidden;
  std::vector<Matrix> outputs;
};

inline DenseForward dense_forward(const Matrix &op, const Matrix &x,
                                  const EmbedConfig &config,
                                  std::span<const Matrix> weights) {
  DenseForward f;
  f.hidden.push_back(x);
  f.outputs.push_back(x);
  for (std::size_t l = 1; l <= config.layers; ++l) {
    Matrix g = op * f.hidden.back();
    if (config.weights == WeightMode::RandomWeight) g = g * weights[l - 1];
    Matrix h = config.nonlinearity == Nonlinearity::Relu ? Matrix(g.cwiseMax(0.0)) : g;
    f.outputs.push_back(std::move(g));
    f.hidden.push_back(std::move(h));
  }
  return f;
}

/// H(l-1) W_l, the quantity whose cross products form P.
inline Matrix projected_hidden(const DenseForward &f, std::size_t l,
                               const EmbedConfig &config,
                               std::span<const Matrix> weights) {
  if (config.weights == WeightMode::RandomWeight)
    return f.hidden[l - 1] * weights[l - 1];
  return f.hidden[l - 1];
}

struct PropReport {
  double max_gap = 0.0;
  /// Assignments compared.
  std::size_t instances = 0;
  /// Graph pairs where some layer output had a zero row, so the zero-norm
  /// convention was exercised.
  std::size_t zero_row_instances = 0;
  bool pass = true;

  void merge(const PropReport &o) {
    max_gap = std::max(max_gap, o.max_gap);
    instances += o.instances;
    zero_row_instances += o.zero_row_instances;
    pass = pass && o.pass;
  }
};

namespace detail {

inline void check_prop_preconditions(const Graph &gs, const Graph &gt,
                                     const EmbedConfig &config) {
  config.validate();
  check_enumeration_bounds(gs.num_nodes(), gt.num_nodes());
  if (!gs.features() || !gt.features())
    throw Error("equivalence check: both graphs need features");
  if (gs.features()->cols() != gt.features()->cols())
    throw Error("equivalence check: feature widths differ");
}

inline bool has_zero_row(const Matrix &m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (m.row(i).squaredNorm() == 0.0) return true;
  return false;
}

inline PropReport compare_over_assignments(const Matrix &direct_similarity,
                                           const RelaxInstance &relax) {
  PropReport r;
  for_each_injective_map(relax.ns(), relax.nt(), [&](std::span<const NodeIndex> t) {
    const Assignment s = to_assignment(t);
    const double lhs = objective(direct_similarity, s);
    const double rhs = relaxed_objective(relax, s);
    r.max_gap = std::max(r.max_gap, std::abs(lhs - rhs));
    ++r.instances;
  });
  r.pass = r.max_gap <= kEquivalenceTolerance;
  return r;
}

}  // namespace detail

/*
 * Dot products of the final GNN outputs versus the relaxed objective with
 * Q = 0 and P = H_s(L-1) W_L (H_t(L-1) W_L)^T, over every one-to-one map.
 * The left side comes from embed(); the right side from an independent dense
 * forward pass.
 */
inline PropReport check_prop1(const Graph &gs, const Graph &gt,
                              const EmbedConfig &config) {
  detail::check_prop_preconditions(gs, gt, config);
  if (config.mode != EmbedMode::Basic || config.residual)
    throw Error("check_prop1 needs basic mode without residual connections");
  if (config.layers < 1) throw Error("check_prop1 needs at least one layer");
  const std::size_t L = config.layers;
  const auto weights =
      config_weights(config, static_cast<std::size_t>(gs.features()->cols()));

  const EmbeddingSet es = embed(gs, config, weights);
  const EmbeddingSet et = embed(gt, config, weights);
  const Matrix direct = es.outputs[L] * et.outputs[L].transpose();

  RelaxInstance relax;
  relax.as = dense_operator(gs, config.op);
  relax.at = dense_operator(gt, config.op);
  const DenseForward fs = dense_forward(relax.as, *gs.features(), config, weights);
  const DenseForward ft = dense_forward(relax.at, *gt.features(), config, weights);
  relax.q = Matrix::Zero(direct.rows(), direct.cols());
  relax.p = broadcast_p(projected_hidden(fs, L, config, weights) *
                        projected_hidden(ft, L, config, weights).transpose());

  PropReport r = detail::compare_over_assignments(direct, relax);
  for (std::size_t l = 0; l <= L; ++l)
    if (detail::has_zero_row(fs.outputs[l]) || detail::has_zero_row(ft.outputs[l])) {
      r.zero_row_instances = 1;
      break;
    }
  return r;
}

/*
 * Summed per-layer cosines versus the relaxed objective with
 *   Q      = Z(0) .* (X_s X_t^T)
 *   P^(ij) = sum_l Z(l)_ij H_s(l-1) W_l (H_t(l-1) W_l)^T
 * where Z(l)_ij = 1 / (|GNN_l(s)_i| |GNN_l(t)_j|), or 0 if either norm is 0.
 */
inline PropReport check_prop2(const Graph &gs, const Graph &gt,
                              const EmbedConfig &config) {
  detail::check_prop_preconditions(gs, gt, config);
  if (config.mode != EmbedMode::Tfgm)
    throw Error("check_prop2 needs tfgm mode");
  const std::size_t L = config.layers;
  const auto weights =
      config_weights(config, static_cast<std::size_t>(gs.features()->cols()));

  const Matrix direct =
      similarity(embed(gs, config, weights), embed(gt, config, weights));

  RelaxInstance relax;
  relax.as = dense_operator(gs, config.op);
  relax.at = dense_operator(gt, config.op);
  const DenseForward fs = dense_forward(relax.as, *gs.features(), config, weights);
  const DenseForward ft = dense_forward(relax.at, *gt.features(), config, weights);
  const std::size_t ns = gs.num_nodes(), nt = gt.num_nodes();

  std::vector<Matrix> z(L + 1);
  bool zero_rows = false;
  for (std::size_t l = 0; l <= L; ++l) {
    const Vector ns_norm = fs.outputs[l].rowwise().norm();
    const Vector nt_norm = ft.outputs[l].rowwise().norm();
    z[l] = Matrix::Zero(Eigen::Index(ns), Eigen::Index(nt));
    for (std::size_t i = 0; i < ns; ++i)
      for (std::size_t j = 0; j < nt; ++j) {
        const double prod = ns_norm(Eigen::Index(i)) * nt_norm(Eigen::Index(j));
        if (prod == 0.0) zero_rows = true;
        else z[l](Eigen::Index(i), Eigen::Index(j)) = 1.0 / prod;
      }
  }

  relax.q = z[0].cwiseProduct(*gs.features() * gt.features()->transpose());
  relax.p.assign(ns * nt * ns * nt, 0.0);
  for (std::size_t l = 1; l <= L; ++l) {
    const Matrix block = projected_hidden(fs, l, config, weights) *
                         projected_hidden(ft, l, config, weights).transpose();
    for (std::size_t i = 0; i < ns; ++i)
      for (std::size_t j = 0; j < nt; ++j) {
        const double zij = z[l](Eigen::Index(i), Eigen::Index(j));
        if (zij == 0.0) continue;
        for (std::size_t i2 = 0; i2 < ns; ++i2)
          for (std::size_t j2 = 0; j2 < nt; ++j2)
            relax.p[relax.index(i, j, i2, j2)] +=
                zij * block(Eigen::Index(i2), Eigen::Index(j2));
      }
  }

  PropReport r = detail::compare_over_assignments(direct, relax);
  r.zero_row_instances = zero_rows ? 1 : 0;
  return r;
}

// ---------------------------------------------------------------------------
// Random trials for the equivalence suites
// ---------------------------------------------------------------------------

struct PropTrial {
  Graph source;
  Graph target;
  EmbedConfig config;
};

/// A random small pair: sizes 1..max_nodes with |V_s| <= |V_t|, Gaussian
/// features, 1-3 layers, any operator, weight mode and activation.
inline PropTrial random_prop_trial(std::mt19937_64 &rng,
                                   std::size_t max_nodes = 6) {
  std::uniform_int_distribution<std::size_t> size_dist(1, max_nodes);
  std::size_t ns = size_dist(rng), nt = size_dist(rng);
  if (ns > nt) std::swap(ns, nt);
  std::uniform_real_distribution<double> density(0.2, 0.8);
  std::uniform_int_distribution<std::size_t> width(1, 4);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t dx = width(rng);

  auto make = [&](std::size_t n) {
    std::bernoulli_distribution coin(density(rng));
    std::vector<Edge> edges;
    for (NodeIndex i = 0; i < n; ++i)
      for (NodeIndex j = i + 1; j < n; ++j)
        if (coin(rng)) edges.emplace_back(i, j);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dx));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = normal(rng);
    return Graph::from_edges(n, edges).with_features(std::move(x));
  };

  PropTrial t;
  t.source = make(ns);
  t.target = make(nt);
  t.config.layers = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  t.config.op = static_cast<OperatorKind>(
      std::uniform_int_distribution<int>(0, 2)(rng));
  const bool random_weights = std::bernoulli_distribution(0.5)(rng);
  t.config.weights =
      random_weights ? WeightMode::RandomWeight : WeightMode::WeightFree;
  t.config.hidden_dim = width(rng);
  t.config.seed = rng();
  t.config.nonlinearity = std::bernoulli_distribution(0.5)(rng)
                              ? Nonlinearity::Relu
                              : Nonlinearity::None;
  return t;
}

struct PropSuiteReport {
  PropReport prop1;
  PropReport prop2;
  std::size_t trials = 0;
  /// First trial whose gap exceeded the tolerance, for replay.
  std::optional<PropTrial> failing;

  bool pass() const { return prop1.pass && prop2.pass; }
};

inline PropSuiteReport verify_props(std::size_t trials, std::uint64_t seed,
                                    std::size_t max_nodes = 6) {
  std::mt19937_64 rng(seed);
  PropSuiteReport suite;
  for (std::size_t k = 0; k < trials; ++k) {
    PropTrial t = random_prop_trial(rng, max_nodes);
    EmbedConfig basic = t.config;
    basic.mode = EmbedMode::Basic;
    EmbedConfig full = t.config;
    full.mode = EmbedMode::Tfgm;
    const PropReport r1 = check_prop1(t.source, t.target, basic);
    const PropReport r2 = check_prop2(t.source, t.target, full);
    suite.prop1.merge(r1);
    suite.prop2.merge(r2);
    ++suite.trials;
    if ((!r1.pass || !r2.pass) && !suite.failing) suite.failing = std::move(t);
  }
  return suite;
}

// ---------------------------------------------------------------------------
// Monte Carlo check of E[W_1..W_L W_L^T..W_1^T] = I
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/*
 * Max entrywise deviation from I of the running mean of K_L after each
 * checkpoint (sample counts, ascending). Sample k draws its chain with
 * random_weights() under a seed derived from (seed, k), so a prefix of the
 * stream is exactly the shorter experiment.
 */
inline std::vector<double> montecarlo_trace(std::size_t d, std::size_t layers,
                                            std::span<const std::size_t> checkpoints,
                                            std::uint64_t seed) {
  if (d == 0 || layers == 0) throw Error("montecarlo: d and L must be >= 1");
  if (checkpoints.empty()) return {};
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) ||
      checkpoints.front() == 0)
    throw Error("montecarlo: checkpoints must be positive and ascending");
  const auto n = static_cast<Eigen::Index>(d);
  const std::vector<std::size_t> dims(layers + 1, d);
  Matrix sum = Matrix::Zero(n, n);
  Matrix chain(n, n);
  std::vector<double> out;
  out.reserve(checkpoints.size());
  std::size_t next = 0;
  const std::uint64_t base = detail::splitmix64(seed);
  for (std::size_t k = 1; k <= checkpoints.back(); ++k) {
    const auto w = random_weights(detail::splitmix64(base + k), layers, dims);
    chain = w[0];
    for (std::size_t l = 1; l < layers; ++l) chain = chain * w[l];
    sum.selfadjointView<Eigen::Lower>().rankUpdate(chain);
    while (next < checkpoints.size() && checkpoints[next] == k) {
      Matrix mean = sum.selfadjointView<Eigen::Lower>();
      mean /= static_cast<double>(k);
      out.push_back((mean - Matrix::Identity(n, n)).cwiseAbs().maxCoeff());
      ++next;
    }
  }
  return out;
}

inline double montecarlo_expectation(std::size_t d, std::size_t layers,
                                     std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw Error("montecarlo: samples must be >= 1");
  const std::size_t cp[] = {samples};
  return montecarlo_trace(d, layers, cp, seed).front();
}

}  // namespace tfgm
