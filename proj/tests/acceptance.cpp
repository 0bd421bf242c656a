//
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.
//

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

using namespace tfgm;
using namespace tfgm::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string &name, const std::function<Verdict()> &check) {
  Verdict v;
  const auto start = Clock::now();
  try {
    v = check();
  } catch (const std::exception &e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  if (!v.pass) ++failures;
  std::printf("%s  %2d  %-34s %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", id, name.c_str(),
              v.detail.c_str(), seconds_since(start));
  std::fflush(stdout);
}

std::string fmt(const char *f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

EmbedConfig weight_free(std::size_t layers, EmbedMode mode) {
  EmbedConfig c;
  c.layers = layers;
  c.op = OperatorKind::SageNorm;
  c.mode = mode;
  return c;
}

// -- 1, 2 -------------------------------------------------------------------

Verdict equivalence(EmbedMode mode) {
  const auto start = Clock::now();
  std::mt19937_64 rng(mode == EmbedMode::Basic ? 101 : 202);
  PropReport total;
  std::size_t ops[3] = {0, 0, 0};
  for (int k = 0; k < 50; ++k) {
    PropTrial t = random_prop_trial(rng, 6);
    t.config.mode = mode;
    ++ops[static_cast<int>(t.config.op)];
    total.merge(mode == EmbedMode::Basic ? check_prop1(t.source, t.target, t.config)
                                         : check_prop2(t.source, t.target, t.config));
  }
  const double secs = seconds_since(start);
  const bool all_ops = ops[0] > 0 && ops[1] > 0 && ops[2] > 0;
  return {total.max_gap <= 1e-9 && secs < 5.0 && all_ops,
          fmt("max gap %.2e over 50 pairs, %.2fs", total.max_gap, secs)};
}

// -- 3 ----------------------------------------------------------------------

Verdict unbiasedness() {
  const std::size_t checkpoints[] = {5000, 20000, 80000};
  const auto first = montecarlo_trace(64, 3, checkpoints, 0);
  int improved = first[2] < first[0] ? 1 : 0;
  for (std::uint64_t seed = 1; seed < 10; ++seed) {
    const auto trace = montecarlo_trace(64, 3, checkpoints, seed);
    if (trace[2] < trace[0]) ++improved;
  }
  return {first[1] < 0.1 && improved >= 9,
          fmt("deviation at 20000 = %.4f, 80000 beats 5000 in %g/10 replicates",
              first[1], improved)};
}

// -- 4 ----------------------------------------------------------------------

Verdict hungarian_optimality() {
  std::mt19937_64 rng(404);
  std::size_t integer_mismatch = 0;
  double worst_real = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t ns = 1 + rng() % 6;
    const std::size_t nt = ns + rng() % (8 - ns);
    const bool integer = k % 2 == 0;
    Matrix u(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nt));
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> small(-5, 5);
    for (Eigen::Index i = 0; i < u.rows(); ++i)
      for (Eigen::Index j = 0; j < u.cols(); ++j)
        u(i, j) = integer ? small(rng) : normal(rng);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto &s : enumerate_assignments(ns, nt)) best = std::max(best, objective(u, s));
    const double got = objective(u, solve_hungarian(u));
    if (integer) {
      if (got != best) ++integer_mismatch;
    } else {
      worst_real = std::max(worst_real, std::abs(got - best));
    }
  }
  return {integer_mismatch == 0 && worst_real <= 1e-12,
          fmt("integer mismatches %g, worst real gap %.2e", double(integer_mismatch),
              worst_real)};
}

// -- 5 ----------------------------------------------------------------------

std::vector<bool> unique_rows(const Matrix &m) {
  std::vector<bool> unique(static_cast<std::size_t>(m.rows()), true);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.rows(); ++j)
      if ((m.row(i) - m.row(j)).cwiseAbs().maxCoeff() <= 1e-9)
        unique[static_cast<std::size_t>(i)] = unique[static_cast<std::size_t>(j)] = false;
  return unique;
}

Verdict exact_recovery() {
  std::size_t checked = 0, wrong = 0;
  const EmbedConfig cfg = weight_free(10, EmbedMode::Tfgm);
  for (std::size_t index = 0; index < 10; ++index) {
    const RunSeeds seeds = derive_run_seeds(0, index);
    const Graph base = gen_er(100, 0.05, seeds.graph);
    const NoisyPair pair = rewire(base, 0.0, seeds.noise);
    const auto [gs, gt] = with_degree_features(base, pair.target, FeatureKind::OneHot, 0);
    const EmbeddingSet es = embed(gs, cfg), et = embed(gt, cfg);
    const auto us = unique_rows(es.concatenated), ut = unique_rows(et.concatenated);
    const Assignment a = solve_hungarian(similarity(es, et));
    for (const auto &p : pair.truth) {
      if (!us[p.source] || !ut[p.target]) continue;
      ++checked;
      if (a.target_of[p.source] != p.target) ++wrong;
    }
  }
  return {wrong == 0 && checked > 0,
          fmt("%g of %g distinguishable nodes recovered", double(checked - wrong),
              double(checked))};
}

// -- 6 ----------------------------------------------------------------------

BenchConfig rewire_bench() {
  BenchConfig cfg;
  cfg.kinds = {NoiseKind::Rewire};
  cfg.ratios = {0.0, 0.05, 0.10, 0.15, 0.20, 0.25};
  cfg.seeds = 10;
  cfg.nodes = 100;
  cfg.prob = 0.05;
  cfg.embed = weight_free(10, EmbedMode::Tfgm);
  return cfg;
}

Verdict degradation_and_ablation() {
  BenchConfig cfg = rewire_bench();
  const BenchReport full = run_bench(cfg);
  cfg.embed.mode = EmbedMode::Basic;
  const BenchReport basic = run_bench(cfg);
  const double at05 = full.cells[1].accuracy, at25 = full.cells[5].accuracy;
  bool ablation = true;
  std::ostringstream s;
  s << "tfgm/basic";
  for (std::size_t k = 0; k < full.cells.size(); ++k) {
    ablation = ablation && full.cells[k].accuracy >= basic.cells[k].accuracy;
    s << fmt(" %.3f/%.3f", full.cells[k].accuracy, basic.cells[k].accuracy);
  }
  return {at05 > at25 && ablation, s.str()};
}

// -- 7 ----------------------------------------------------------------------

Verdict random_weight_gap() {
  BenchConfig cfg = rewire_bench();
  cfg.ratios = {0.05};
  cfg.features = FeatureKind::PosEnc;
  cfg.posenc_dim = 512;
  cfg.compare_random = true;
  cfg.random_dim = 512;
  const BenchCell c = run_bench(cfg).cells[0];
  const double gap = std::abs(c.accuracy - *c.accuracy_random);
  return {gap <= 0.025, fmt("weight-free %.4f, random-weight %.4f, gap %.4f", c.accuracy,
                            *c.accuracy_random, gap)};
}

// -- 8 ----------------------------------------------------------------------

// Backtracking search for an automorphism with sigma(u) = v. Nodes are mapped
// in BFS order from u so every new node has an already-mapped neighbour.
bool automorphism_maps(const Graph &g, NodeIndex u, NodeIndex v) {
  const std::size_t n = g.num_nodes();
  if (g.degree(u) != g.degree(v)) return false;
  std::vector<NodeIndex> order{u};
  std::vector<bool> queued(n, false);
  queued[u] = true;
  for (std::size_t k = 0; k < order.size(); ++k)
    for (NodeIndex w : g.neighbors(order[k]))
      if (!queued[w]) {
        queued[w] = true;
        order.push_back(w);
      }
  for (NodeIndex w = 0; w < n; ++w)
    if (!queued[w]) order.push_back(w);

  constexpr NodeIndex unset = std::numeric_limits<NodeIndex>::max();
  std::vector<NodeIndex> sigma(n, unset);
  std::vector<bool> used(n, false);
  std::function<bool(std::size_t)> extend = [&](std::size_t k) -> bool {
    if (k == n) return true;
    const NodeIndex x = order[k];
    for (NodeIndex y = 0; y < n; ++y) {
      if (used[y] || g.degree(x) != g.degree(y)) continue;
      if (k == 0 && y != v) continue;
      bool ok = true;
      for (std::size_t p = 0; p < k && ok; ++p)
        ok = g.has_edge(order[p], x) == g.has_edge(sigma[order[p]], y);
      if (!ok) continue;
      sigma[x] = y;
      used[y] = true;
      if (extend(k + 1)) return true;
      used[y] = false;
      sigma[x] = unset;
    }
    return false;
  };
  return extend(0);
}

Verdict automorphism_collapse() {
  const Graph g = karate_club().with_features(Matrix::Ones(34, 1));
  std::size_t pairs = 0, differing = 0;
  std::vector<EmbeddingSet> embeddings;
  for (auto op : {OperatorKind::Adjacency, OperatorKind::GcnNorm, OperatorKind::SageNorm}) {
    EmbedConfig c = weight_free(10, EmbedMode::Tfgm);
    c.op = op;
    embeddings.push_back(embed(g, c));
  }
  for (NodeIndex u = 0; u < 34; ++u)
    for (NodeIndex v = u + 1; v < 34; ++v) {
      if (!automorphism_maps(g, u, v)) continue;
      ++pairs;
      for (const auto &e : embeddings)
        if (e.concatenated.row(u) != e.concatenated.row(v)) ++differing;
    }
  return {pairs > 0 && differing == 0,
          fmt("%g automorphic pairs, %g differing rows", double(pairs), double(differing))};
}

// -- 9 ----------------------------------------------------------------------

Verdict anchors_help() {
  BenchConfig cfg = rewire_bench();
  cfg.ratios = {0.15};
  cfg.anchor_fraction = 0.10;
  const BenchCell c = run_bench(cfg).cells[0];
  return {*c.remaining_semi >= *c.remaining_unsupervised,
          fmt("remaining-node accuracy semi %.4f vs unsupervised %.4f", *c.remaining_semi,
              *c.remaining_unsupervised)};
}

// -- 10 ---------------------------------------------------------------------

Verdict determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "tfgm_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string args =
      " bench --kind rewire,lowconf --seeds 3 --compare-random --anchors 10 --threads 2";
  for (const char *name : {"a.json", "b.json"}) {
    const std::string cmd = std::string(TFGM_CLI) + args + " --out " + (dir / name).string();
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
      return {false, "bench command failed: " + cmd};
  }
  const std::string a = detail::read_text(dir / "a.json");
  const std::string b = detail::read_text(dir / "b.json");
  fs::remove_all(dir);
  return {!a.empty() && a == b,
          fmt("%g-byte reports ", double(a.size())) + (a == b ? "identical" : "differ")};
}

// -- 11 ---------------------------------------------------------------------

Verdict throughput() {
  const Graph base = gen_er(1000, 0.05, 11);
  const NoisyPair pair = rewire(base, 0.05, 12);
  const auto [gs, gt] = with_degree_features(base, pair.target, FeatureKind::OneHot, 0);
  const EmbedConfig cfg = weight_free(10, EmbedMode::Tfgm);
  auto start = Clock::now();
  match(gs, gt, cfg, Solver::Hungarian);
  const double hungarian = seconds_since(start);
  start = Clock::now();
  match(gs, gt, cfg, Solver::Argmax);
  const double argmax = seconds_since(start);
  return {hungarian <= 10.0 && argmax <= 2.0,
          fmt("%g edges: hungarian %.2fs, argmax %.2fs", double(base.num_edges()), hungarian,
              argmax)};
}

}  // namespace

int main() {
  report(1, "basic-mode equivalence", [] { return equivalence(EmbedMode::Basic); });
  report(2, "tfgm-mode equivalence", [] { return equivalence(EmbedMode::Tfgm); });
  report(3, "random-weight unbiasedness", unbiasedness);
  report(4, "hungarian optimality", hungarian_optimality);
  report(5, "exact recovery at zero noise", exact_recovery);
  report(6, "degradation and ablation", degradation_and_ablation);
  report(7, "random vs weight-free gap", random_weight_gap);
  report(8, "automorphism collapse", automorphism_collapse);
  report(9, "anchors help", anchors_help);
  report(10, "bench determinism", determinism);
  report(11, "throughput", throughput);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
