//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfgm/assign.hpp"
#include "tfgm/embed.hpp"
#include "tfgm/graph.hpp"
#include "tfgm/match.hpp"
#include "tfgm/oracle.hpp"
#include "tfgm/supervise.hpp"
#include "tfgm/synth.hpp"

namespace tfgm {

enum class FeatureKind { OneHot, PosEnc };

inline std::string_view to_string(FeatureKind f) {
  return f == FeatureKind::OneHot ? "onehot" : "posenc";
}

inline FeatureKind parse_feature_kind(std::string_view name) {
  if (name == "onehot") return FeatureKind::OneHot;
  if (name == "posenc") return FeatureKind::PosEnc;
  throw Error("unknown feature encoder '" + std::string(name) +
              "' (expected onehot or posenc)");
}

/// Degree features for a pair, sharing one encoding space.
inline std::pair<Graph, Graph> with_degree_features(const Graph &source,
                                                    const Graph &target,
                                                    FeatureKind kind,
                                                    std::size_t posenc_dim) {
  auto [xs, xt] = kind == FeatureKind::OneHot
                      ? onehot_degree_features(source, target)
                      : posenc_degree_features(source, target, posenc_dim);
  return {source.with_features(std::move(xs)), target.with_features(std::move(xt))};
}

struct BenchConfig {
  std::vector<NoiseKind> kinds{NoiseKind::Rewire};
  /// Noise ratios as fractions.
  std::vector<double> ratios{0.0, 0.05, 0.10, 0.15, 0.20, 0.25};
  std::size_t seeds = 10;
  std::uint64_t seed = 0;
  /// Source graphs are G(nodes, prob) per seed unless `source` is set.
  std::size_t nodes = 100;
  double prob = 0.05;
  std::optional<Graph> source;
  FeatureKind features = FeatureKind::OneHot;
  std::size_t posenc_dim = 512;
  EmbedConfig embed = [] {
    EmbedConfig c;
    c.layers = 10;
    return c;
  }();
  Solver solver = Solver::Hungarian;
  /// Also run a random-weight network of width `random_dim` on every pair.
  bool compare_random = false;
  std::size_t random_dim = 512;
  /// Fraction of true pairs revealed as anchors; 0 disables the
  /// semi-supervised comparison.
  double anchor_fraction = 0.0;
  std::size_t threads = 1;
  /// Record wall-clock seconds. Off by default so reports are byte-stable.
  bool timing = false;
};

struct BenchRun {
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double hit1 = 0.0;
  double hit10 = 0.0;
  double mrr = 0.0;
  double seconds = 0.0;
  std::optional<double> accuracy_random;
  /// Accuracy on non-anchor nodes, unsupervised vs anchored.
  std::optional<double> remaining_unsupervised;
  std::optional<double> remaining_semi;
  bool budget_exhausted = false;
};

struct BenchCell {
  NoiseKind kind = NoiseKind::Rewire;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double hit1 = 0.0;
  double hit10 = 0.0;
  double mrr = 0.0;
  double seconds = 0.0;
  std::optional<double> accuracy_random;
  std::optional<double> remaining_unsupervised;
  std::optional<double> remaining_semi;
  std::vector<BenchRun> runs;
};

struct BenchReport {
  std::vector<BenchCell> cells;
  nlohmann::json config;
};

/// Seeds derived for run `index` of a sweep seeded with `seed`.
struct RunSeeds {
  std::uint64_t graph;
  std::uint64_t noise;
  std::uint64_t weights;
  std::uint64_t anchors;
};

inline RunSeeds derive_run_seeds(std::uint64_t seed, std::size_t index) {
  const std::uint64_t base =
      detail::splitmix64(detail::splitmix64(seed ^ 0x5eedULL) + index);
  return {seed + index, detail::splitmix64(base), detail::splitmix64(base + 1),
          detail::splitmix64(base + 2)};
}

/// One (kind, ratio, seed) experiment.
inline BenchRun run_bench_once(const BenchConfig &cfg, NoiseKind kind,
                               double ratio, std::size_t index) {
  const RunSeeds seeds = derive_run_seeds(cfg.seed, index);
  const Graph base = cfg.source ? cfg.source->without_features()
                                : gen_er(cfg.nodes, cfg.prob, seeds.graph);
  const NoisyPair pair = apply_noise(base, {kind, ratio, seeds.noise});
  const auto [gs, gt] =
      with_degree_features(base, pair.target, cfg.features, cfg.posenc_dim);

  BenchRun run;
  run.seed = static_cast<std::uint64_t>(index);
  run.budget_exhausted = pair.budget_exhausted;
  const auto start = std::chrono::steady_clock::now();
  const MatchResult m = match(gs, gt, cfg.embed, cfg.solver);
  const auto stop = std::chrono::steady_clock::now();
  if (cfg.timing) run.seconds = std::chrono::duration<double>(stop - start).count();
  run.accuracy = accuracy(m.assignment, pair.truth);
  run.hit1 = hits_at_k(m.similarity, pair.truth, 1);
  run.hit10 = hits_at_k(m.similarity, pair.truth, 10);
  run.mrr = mrr(m.similarity, pair.truth);

  if (cfg.compare_random) {
    EmbedConfig rc = cfg.embed;
    rc.weights = WeightMode::RandomWeight;
    rc.hidden_dim = cfg.random_dim;
    rc.seed = seeds.weights;
    rc.residual = false;
    run.accuracy_random = accuracy(match(gs, gt, rc, cfg.solver).assignment, pair.truth);
  }

  if (cfg.anchor_fraction > 0.0) {
    std::vector<NodePair> pairs = pair.truth.pairs();
    std::mt19937_64 rng(seeds.anchors);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    const auto take = std::min(
        pairs.size(), static_cast<std::size_t>(std::ceil(
                          cfg.anchor_fraction * double(pairs.size()) - 1e-9)));
    AnchorSet anchors(std::vector<NodePair>(
        pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(take)));
    std::vector<NodePair> rest(pairs.begin() + static_cast<std::ptrdiff_t>(take),
                               pairs.end());
    std::sort(rest.begin(), rest.end(), [](const NodePair &a, const NodePair &b) {
      return a.source < b.source;
    });
    if (!rest.empty()) {
      const GroundTruth remaining(std::move(rest));
      run.remaining_unsupervised = accuracy(m.assignment, remaining);
      run.remaining_semi = accuracy(
          semi_supervised_match(gs, gt, anchors, cfg.embed, cfg.solver).assignment,
          remaining);
    }
  }
  return run;
}

inline nlohmann::json bench_config_to_json(const BenchConfig &cfg) {
  nlohmann::json kinds = nlohmann::json::array();
  for (auto k : cfg.kinds) kinds.push_back(std::string(to_string(k)));
  const EmbedConfig &e = cfg.embed;
  nlohmann::json j{
      {"kinds", kinds},
      {"ratios", cfg.ratios},
      {"seeds", cfg.seeds},
      {"seed", cfg.seed},
      {"source", cfg.source ? "file" : "er"},
      {"nodes", cfg.source ? cfg.source->num_nodes() : cfg.nodes},
      {"prob", cfg.prob},
      {"features", std::string(to_string(cfg.features))},
      {"posenc_dim", cfg.posenc_dim},
      {"layers", e.layers},
      {"operator", std::string(to_string(e.op))},
      {"weights", std::string(to_string(e.weights))},
      {"weight_seed", e.seed},
      {"hidden_dim", e.hidden_dim},
      {"nonlinearity", std::string(to_string(e.nonlinearity))},
      {"mode", std::string(to_string(e.mode))},
      {"residual", e.residual},
      {"solver", std::string(to_string(cfg.solver))},
      {"compare_random", cfg.compare_random},
      {"random_dim", cfg.random_dim},
      {"anchor_fraction", cfg.anchor_fraction},
      {"timing", cfg.timing}};
  return j;
}

/*
 * Sweeps kinds x ratios x seeds. Runs execute on a small worker pool; each
 * result is written to its own slot, so the report does not depend on
 * completion order.
 */
inline BenchReport run_bench(const BenchConfig &cfg) {
  cfg.embed.validate();
  if (cfg.seeds == 0) throw Error("bench: need at least one seed");
  for (double r : cfg.ratios)
    if (!(r >= 0.0 && r <= 1.0)) throw Error("bench: ratios must lie in [0,1]");

  struct Task {
    std::size_t cell;
    NoiseKind kind;
    double ratio;
    std::size_t index;
  };
  std::vector<Task> tasks;
  std::vector<BenchCell> cells;
  for (auto kind : cfg.kinds)
    for (double ratio : cfg.ratios) {
      BenchCell c;
      c.kind = kind;
      c.ratio = ratio;
      c.seed = cfg.seed;
      c.runs.resize(cfg.seeds);
      for (std::size_t s = 0; s < cfg.seeds; ++s)
        tasks.push_back({cells.size(), kind, ratio, s});
      cells.push_back(std::move(c));
    }

  std::vector<BenchRun> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks.size();) {
      try {
        results[t] = run_bench_once(cfg, tasks[t].kind, tasks[t].ratio, tasks[t].index);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const std::size_t nthreads = std::max<std::size_t>(1, std::min(cfg.threads, tasks.size()));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    for (auto &th : pool) th.join();
  }
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t t = 0; t < tasks.size(); ++t)
    cells[tasks[t].cell].runs[tasks[t].index] = results[t];

  for (auto &c : cells) {
    const double n = static_cast<double>(c.runs.size());
    auto mean = [&](auto field) {
      double s = 0.0;
      for (const auto &r : c.runs) s += field(r);
      return s / n;
    };
    c.accuracy = mean([](const BenchRun &r) { return r.accuracy; });
    c.hit1 = mean([](const BenchRun &r) { return r.hit1; });
    c.hit10 = mean([](const BenchRun &r) { return r.hit10; });
    c.mrr = mean([](const BenchRun &r) { return r.mrr; });
    c.seconds = mean([](const BenchRun &r) { return r.seconds; });
    if (cfg.compare_random)
      c.accuracy_random = mean([](const BenchRun &r) { return *r.accuracy_random; });
    if (cfg.anchor_fraction > 0.0 &&
        std::all_of(c.runs.begin(), c.runs.end(),
                    [](const BenchRun &r) { return r.remaining_semi.has_value(); })) {
      c.remaining_unsupervised =
          mean([](const BenchRun &r) { return *r.remaining_unsupervised; });
      c.remaining_semi = mean([](const BenchRun &r) { return *r.remaining_semi; });
    }
  }
  return {std::move(cells), bench_config_to_json(cfg)};
}

inline nlohmann::json report_to_json(const BenchReport &report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto &c : report.cells) {
    nlohmann::json j{{"kind", std::string(to_string(c.kind))},
                     {"ratio", c.ratio},
                     {"seed", c.seed},
                     {"accuracy", c.accuracy},
                     {"hit1", c.hit1},
                     {"hit10", c.hit10},
                     {"mrr", c.mrr},
                     {"seconds", c.seconds}};
    if (c.accuracy_random) {
      j["accuracy_random"] = *c.accuracy_random;
      j["accuracy_gap"] = c.accuracy - *c.accuracy_random;
    }
    if (c.remaining_semi) {
      j["remaining_accuracy_unsupervised"] = *c.remaining_unsupervised;
      j["remaining_accuracy_semi"] = *c.remaining_semi;
    }
    nlohmann::json runs = nlohmann::json::array();
    for (const auto &r : c.runs) {
      nlohmann::json rj{{"seed", r.seed}, {"accuracy", r.accuracy}};
      if (r.accuracy_random) rj["accuracy_random"] = *r.accuracy_random;
      if (r.budget_exhausted) rj["budget_exhausted"] = true;
      runs.push_back(std::move(rj));
    }
    j["runs"] = std::move(runs);
    cells.push_back(std::move(j));
  }
  return nlohmann::json{{"cells", std::move(cells)}, {"config", report.config}};
}

}  // namespace tfgm
