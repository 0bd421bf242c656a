//
// SPDX-License-Identifier: Apache-2.0
//

// Command-line front end: match, gen, eval, verify, bench.
//
// Exit codes: 0 success, 1 verification or metric failure, 2 usage or input
// error. Results go to stdout as a single JSON object; diagnostics to stderr.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tfgm/tfgm.hpp"

namespace fs = std::filesystem;
using tfgm::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const json &doc, bool pretty) {
  if (!pretty) {
    std::cout << doc.dump() << '\n';
    return;
  }
  std::size_t width = 0;
  for (const auto &[k, v] : doc.items()) width = std::max(width, k.size());
  for (const auto &[k, v] : doc.items()) {
    std::cout << std::left << std::setw(static_cast<int>(width) + 2) << k;
    if (v.is_number_float())
      std::cout << std::fixed << std::setprecision(4) << v.get<double>();
    else if (v.is_string())
      std::cout << v.get<std::string>();
    else
      std::cout << v.dump();
    std::cout << '\n';
  }
}

void write_json(const fs::path &path, const json &doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tfgm::Error("cannot open " + path.string() + " for writing");
  out << doc.dump() << '\n';
  if (!out) throw tfgm::Error("failed writing " + path.string());
}

tfgm::Graph load_graph_noisy(const std::string &path) {
  auto loaded = tfgm::load_graph(path);
  if (loaded.stats.dropped_self_loops > 0)
    std::cerr << "warning: " << path << ": dropped " << loaded.stats.dropped_self_loops
              << " self-loop(s)\n";
  if (loaded.stats.duplicate_edges > 0)
    std::cerr << "warning: " << path << ": merged " << loaded.stats.duplicate_edges
              << " duplicate edge(s)\n";
  return std::move(loaded.graph);
}

struct EmbedFlags {
  std::string op = "sage";
  std::size_t layers = 2;
  std::string mode = "tfgm";
  std::string weights = "free";
  std::size_t hidden_dim = 512;
  std::uint64_t seed = 0;
  bool residual = false;
  bool relu = false;

  void add(CLI::App &app) {
    app.add_option("--operator", op, "Graph operator: adj, gcn, sage")->capture_default_str();
    app.add_option("--layers", layers, "Propagation layers")->capture_default_str();
    app.add_option("--mode", mode, "tfgm (all layers) or basic (last layer)")
        ->capture_default_str();
    app.add_option("--weights", weights, "free or random")->capture_default_str();
    app.add_option("--hidden-dim", hidden_dim, "Width of random-weight layers")
        ->capture_default_str();
    app.add_flag("--residual", residual, "Skip connections (basic, weight-free)");
    app.add_flag("--relu", relu, "ReLU between layers");
  }

  tfgm::EmbedConfig build() const {
    tfgm::EmbedConfig c;
    c.op = tfgm::parse_operator_kind(op);
    c.layers = layers;
    c.mode = tfgm::parse_embed_mode(mode);
    c.weights = tfgm::parse_weight_mode(weights);
    c.hidden_dim = hidden_dim;
    c.seed = seed;
    c.residual = residual;
    c.nonlinearity = relu ? tfgm::Nonlinearity::Relu : tfgm::Nonlinearity::None;
    c.validate();
    return c;
  }
};

// ---------------------------------------------------------------------------
// match
// ---------------------------------------------------------------------------

struct MatchFlags {
  std::string source, target, truth, anchors, train, out, dump;
  std::string solver = "hungarian";
  std::string train_solver = "argmax";
  std::string features = "file";
  std::size_t dim = 512;
  std::size_t k = tfgm::kDefaultNeighbours;
  std::optional<double> min_accuracy;
  bool pretty = false;
  EmbedFlags embed;
};

void encode_all(std::vector<tfgm::Graph *> graphs, const std::string &kind,
                std::size_t dim) {
  if (kind == "file") {
    for (auto *g : graphs)
      if (!g->features())
        throw UsageError("a graph has no features; pass --features onehot or posenc");
    return;
  }
  if (kind == "onehot") {
    std::size_t width = 1;
    for (auto *g : graphs) width = std::max(width, g->max_degree() + 1);
    for (auto *g : graphs) *g = g->with_features(tfgm::onehot_degree_encoding(*g, width));
    return;
  }
  if (kind == "posenc") {
    for (auto *g : graphs) *g = g->with_features(tfgm::posenc_degree_encoding(*g, dim));
    return;
  }
  throw UsageError("unknown --features '" + kind + "' (expected file, onehot or posenc)");
}

int run_match(const MatchFlags &f) {
  if (!f.anchors.empty() && !f.train.empty())
    throw UsageError("--anchors and --train are mutually exclusive");
  const tfgm::EmbedConfig config = f.embed.build();
  const tfgm::Solver solver = tfgm::parse_solver(f.solver);

  tfgm::Graph gs = load_graph_noisy(f.source);
  tfgm::Graph gt = load_graph_noisy(f.target);
  std::vector<tfgm::Graph *> all{&gs, &gt};
  std::vector<tfgm::Graph> train_graphs;
  if (!f.train.empty()) {
    train_graphs = tfgm::load_training_set(f.train).graphs();
    for (auto &g : train_graphs) all.push_back(&g);
  }
  encode_all(all, f.features, f.dim);

  json doc;
  tfgm::Assignment assignment;
  tfgm::Matrix u;
  if (!f.train.empty()) {
    const tfgm::TrainingSet ts(std::move(train_graphs));
    auto r = tfgm::supervised_match(gs, gt, ts, config, f.k, solver,
                                    tfgm::parse_solver(f.train_solver));
    doc["strategy"] = "supervised";
    doc["shortfall_nodes"] = r.source.shortfall_nodes + r.target.shortfall_nodes;
    assignment = std::move(r.assignment);
    u = std::move(r.similarity);
  } else if (!f.anchors.empty()) {
    const tfgm::AnchorSet anchors = tfgm::load_anchors(f.anchors);
    auto r = tfgm::semi_supervised_match(gs, gt, anchors, config, solver);
    doc["strategy"] = "semi-supervised";
    doc["anchors"] = anchors.size();
    assignment = std::move(r.assignment);
    u = std::move(r.similarity);
  } else {
    auto r = tfgm::match(gs, gt, config, solver);
    doc["strategy"] = "unsupervised";
    assignment = std::move(r.assignment);
    u = std::move(r.similarity);
  }

  const double obj = tfgm::objective(u, assignment);
  doc["source_nodes"] = gs.num_nodes();
  doc["target_nodes"] = gt.num_nodes();
  doc["solver"] = std::string(tfgm::to_string(solver));
  doc["objective"] = obj;
  doc["injective"] = assignment.injective;
  if (!f.out.empty()) write_json(f.out, tfgm::assignment_to_json(assignment, obj));
  if (!f.dump.empty()) tfgm::dump_similarity(u, f.dump);

  int code = kExitOk;
  if (!f.truth.empty()) {
    const tfgm::GroundTruth truth = tfgm::load_ground_truth(f.truth);
    truth.check_bounds(gs.num_nodes(), gt.num_nodes());
    const double acc = tfgm::accuracy(assignment, truth);
    doc["accuracy"] = acc;
    doc["hit1"] = tfgm::hits_at_k(u, truth, 1);
    doc["hit10"] = tfgm::hits_at_k(u, truth, 10);
    doc["mrr"] = tfgm::mrr(u, truth);
    if (f.min_accuracy && acc < *f.min_accuracy) code = kExitFailed;
  } else if (f.min_accuracy) {
    throw UsageError("--min-accuracy needs --truth");
  }
  emit(doc, f.pretty);
  return code;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenFlags {
  std::size_t nodes = 0;
  double prob = 0.0;
  std::uint64_t seed = 0;
  std::string input, out;
  double ratio = 0.0;
};

int run_gen_er(const GenFlags &f) {
  const tfgm::Graph g = tfgm::gen_er(f.nodes, f.prob, f.seed);
  const json doc = tfgm::graph_to_json(g);
  if (f.out.empty())
    std::cout << doc.dump() << '\n';
  else
    write_json(f.out, doc);
  return kExitOk;
}

int run_gen_noise(const GenFlags &f, tfgm::NoiseKind kind) {
  const tfgm::Graph g = load_graph_noisy(f.input);
  const tfgm::NoisyPair pair = tfgm::apply_noise(g, {kind, f.ratio, f.seed});
  const fs::path dir(f.out);
  fs::create_directories(dir);
  write_json(dir / "target.json", tfgm::graph_to_json(pair.target));
  write_json(dir / "truth.json", tfgm::pairs_to_json(pair.truth));
  if (pair.budget_exhausted)
    std::cerr << "warning: swap budget exhausted before reaching ratio " << f.ratio << '\n';
  emit(json{{"kind", std::string(tfgm::to_string(kind))},
            {"ratio", f.ratio},
            {"achieved_ratio", pair.achieved_ratio},
            {"operations", pair.operations},
            {"budget_exhausted", pair.budget_exhausted},
            {"target", (dir / "target.json").string()},
            {"truth", (dir / "truth.json").string()}},
       false);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalFlags {
  std::string similarity, truth, assignment;
  std::string solver = "hungarian";
  std::optional<double> min_accuracy;
  bool pretty = false;
};

int run_eval(const EvalFlags &f) {
  const tfgm::Matrix u = tfgm::load_similarity(f.similarity);
  const tfgm::GroundTruth truth = tfgm::load_ground_truth(f.truth);
  truth.check_bounds(static_cast<std::size_t>(u.rows()), static_cast<std::size_t>(u.cols()));
  tfgm::Assignment a;
  if (!f.assignment.empty()) {
    const fs::path p(f.assignment);
    a = tfgm::assignment_from_json(tfgm::detail::parse_json_file(p), p);
    if (a.target_of.size() != static_cast<std::size_t>(u.rows()))
      throw tfgm::Error("assignment covers " + std::to_string(a.target_of.size()) +
                        " sources but the similarity matrix has " +
                        std::to_string(u.rows()) + " rows");
  } else {
    a = tfgm::solve(u, tfgm::parse_solver(f.solver));
  }
  const double acc = tfgm::accuracy(a, truth);
  emit(json{{"accuracy", acc},
            {"hit1", tfgm::hits_at_k(u, truth, 1)},
            {"hit10", tfgm::hits_at_k(u, truth, 10)},
            {"mrr", tfgm::mrr(u, truth)},
            {"pairs", truth.size()}},
       f.pretty);
  return f.min_accuracy && acc < *f.min_accuracy ? kExitFailed : kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyFlags {
  std::size_t trials = 50;
  std::uint64_t seed = 0;
  std::size_t max_nodes = 6;
  std::string replay, replay_out;
  std::size_t d = 64;
  std::size_t layers = 3;
  std::size_t samples = 20000;
  double tolerance = 0.1;
  bool pretty = false;
};

int run_verify_props(const VerifyFlags &f) {
  json doc;
  bool pass = false;
  std::optional<tfgm::PropTrial> failing;
  if (!f.replay.empty()) {
    const fs::path p(f.replay);
    tfgm::PropTrial t = tfgm::trial_from_json(tfgm::detail::parse_json_file(p), p);
    tfgm::EmbedConfig basic = t.config, full = t.config;
    basic.mode = tfgm::EmbedMode::Basic;
    full.mode = tfgm::EmbedMode::Tfgm;
    const auto r1 = tfgm::check_prop1(t.source, t.target, basic);
    const auto r2 = tfgm::check_prop2(t.source, t.target, full);
    doc = json{{"replay", f.replay},
               {"prop1", tfgm::report_to_json(r1)},
               {"prop2", tfgm::report_to_json(r2)}};
    pass = r1.pass && r2.pass;
    if (!pass) failing = std::move(t);
  } else {
    if (f.trials == 0) std::cerr << "warning: --trials 0 checks nothing; passing vacuously\n";
    const auto suite = tfgm::verify_props(f.trials, f.seed, f.max_nodes);
    doc = json{{"trials", suite.trials},
               {"seed", f.seed},
               {"prop1", tfgm::report_to_json(suite.prop1)},
               {"prop2", tfgm::report_to_json(suite.prop2)}};
    pass = suite.pass();
    failing = suite.failing;
  }
  doc["tolerance"] = tfgm::kEquivalenceTolerance;
  doc["pass"] = pass;
  if (failing) {
    doc["failing"] = tfgm::trial_to_json(*failing);
    if (!f.replay_out.empty()) write_json(f.replay_out, doc["failing"]);
  }
  emit(doc, f.pretty);
  return pass ? kExitOk : kExitFailed;
}

int run_verify_expectation(const VerifyFlags &f) {
  const double dev = tfgm::montecarlo_expectation(f.d, f.layers, f.samples, f.seed);
  const bool pass = dev < f.tolerance;
  emit(json{{"d", f.d},
            {"layers", f.layers},
            {"samples", f.samples},
            {"seed", f.seed},
            {"max_deviation", dev},
            {"tolerance", f.tolerance},
            {"pass", pass}},
       f.pretty);
  return pass ? kExitOk : kExitFailed;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchFlags {
  std::vector<std::string> kinds{"rewire"};
  std::vector<double> ratios{0, 5, 10, 15, 20, 25};
  std::size_t seeds = 10;
  std::size_t nodes = 100;
  double prob = 0.05;
  std::string input, out;
  std::string features = "onehot";
  std::size_t dim = 512;
  std::string solver = "hungarian";
  bool compare_random = false;
  double anchor_percent = 0.0;
  std::size_t threads = 1;
  bool timing = false;
  bool pretty = false;
  EmbedFlags embed;
};

void print_bench_table(const json &report) {
  std::cout << std::left << std::setw(9) << "kind" << std::setw(8) << "ratio"
            << std::setw(10) << "accuracy" << std::setw(8) << "hit1" << std::setw(8)
            << "hit10" << std::setw(8) << "mrr" << std::setw(10) << "seconds";
  const bool gap = report["config"]["compare_random"].get<bool>();
  if (gap) std::cout << std::setw(8) << "gap";
  std::cout << '\n' << std::fixed;
  for (const auto &c : report["cells"]) {
    std::cout << std::setw(9) << c["kind"].get<std::string>() << std::setw(8)
              << std::setprecision(2) << c["ratio"].get<double>() << std::setprecision(4)
              << std::setw(10) << c["accuracy"].get<double>() << std::setw(8)
              << c["hit1"].get<double>() << std::setw(8) << c["hit10"].get<double>()
              << std::setw(8) << c["mrr"].get<double>() << std::setw(10)
              << c["seconds"].get<double>();
    if (gap) std::cout << std::setw(8) << c["accuracy_gap"].get<double>();
    std::cout << '\n';
  }
}

int run_bench(const BenchFlags &f) {
  tfgm::BenchConfig cfg;
  cfg.kinds.clear();
  for (const auto &k : f.kinds) cfg.kinds.push_back(tfgm::parse_noise_kind(k));
  cfg.ratios.clear();
  for (double r : f.ratios) {
    if (!(r >= 0.0 && r <= 100.0))
      throw UsageError("--ratios are percentages in [0,100]");
    cfg.ratios.push_back(r / 100.0);
  }
  cfg.seeds = f.seeds;
  cfg.seed = f.embed.seed;
  cfg.nodes = f.nodes;
  cfg.prob = f.prob;
  if (!f.input.empty()) cfg.source = load_graph_noisy(f.input);
  cfg.features = tfgm::parse_feature_kind(f.features);
  cfg.posenc_dim = f.dim;
  cfg.embed = f.embed.build();
  cfg.solver = tfgm::parse_solver(f.solver);
  cfg.compare_random = f.compare_random;
  cfg.random_dim = f.embed.hidden_dim;
  if (!(f.anchor_percent >= 0.0 && f.anchor_percent <= 100.0))
    throw UsageError("--anchors is a percentage in [0,100]");
  cfg.anchor_fraction = f.anchor_percent / 100.0;
  cfg.threads = f.threads;
  cfg.timing = f.timing;

  const json report = tfgm::report_to_json(tfgm::run_bench(cfg));
  if (!f.out.empty()) write_json(f.out, report);
  if (f.pretty)
    print_bench_table(report);
  else if (f.out.empty())
    std::cout << report.dump() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Training-free graph matching"};
  app.require_subcommand(1);

  MatchFlags mf;
  auto *match = app.add_subcommand("match", "Match two graphs");
  match->add_option("--source", mf.source, "Source graph JSON")->required();
  match->add_option("--target", mf.target, "Target graph JSON")->required();
  match->add_option("--features", mf.features, "file, onehot or posenc")->capture_default_str();
  match->add_option("--dim", mf.dim, "posenc width")->capture_default_str();
  match->add_option("--solver", mf.solver, "hungarian or argmax")->capture_default_str();
  match->add_option("--truth", mf.truth, "Ground-truth pairs; enables metrics");
  match->add_option("--anchors", mf.anchors, "Anchor pairs (semi-supervised)");
  match->add_option("--train", mf.train, "Training manifest (supervised)");
  match->add_option("--k", mf.k, "Neighbours for the supervised vote")->capture_default_str();
  match->add_option("--train-solver", mf.train_solver, "Solver against training graphs")
      ->capture_default_str();
  match->add_option("--out", mf.out, "Write the assignment JSON here");
  match->add_option("--dump-similarity", mf.dump, "Write U as float32 (+ .json shape)");
  match->add_option("--min-accuracy", mf.min_accuracy, "Exit 1 below this accuracy");
  match->add_option("--seed", mf.embed.seed, "Random-weight seed")->capture_default_str();
  match->add_flag("--pretty", mf.pretty, "Human-readable output");
  mf.embed.add(*match);

  GenFlags gf;
  auto *gen = app.add_subcommand("gen", "Generate graphs and noisy pairs");
  gen->require_subcommand(1);
  auto *gen_er = gen->add_subcommand("er", "Erdos-Renyi G(n, p)");
  gen_er->add_option("--nodes", gf.nodes, "Node count")->required();
  gen_er->add_option("--prob", gf.prob, "Edge probability")->required();
  gen_er->add_option("--seed", gf.seed, "Seed")->capture_default_str();
  gen_er->add_option("--out", gf.out, "Output file (stdout if omitted)");
  auto add_noise = [&](const char *name, const char *desc) {
    auto *sub = gen->add_subcommand(name, desc);
    sub->add_option("--input", gf.input, "Source graph JSON")->required();
    sub->add_option("--ratio", gf.ratio, "Noise ratio as a fraction of |E|")->required();
    sub->add_option("--seed", gf.seed, "Seed")->capture_default_str();
    sub->add_option("--out", gf.out, "Output directory")->required();
    return sub;
  };
  auto *gen_rewire = add_noise("rewire", "Degree-preserving rewiring + permutation");
  auto *gen_lowconf = add_noise("lowconf", "Added random edges + permutation");

  EvalFlags ef;
  auto *eval = app.add_subcommand("eval", "Score a similarity matrix");
  eval->add_option("--similarity", ef.similarity, "float32 dump from match")->required();
  eval->add_option("--truth", ef.truth, "Ground-truth pairs")->required();
  eval->add_option("--assignment", ef.assignment, "Assignment JSON (solved if omitted)");
  eval->add_option("--solver", ef.solver, "Solver when no assignment given")
      ->capture_default_str();
  eval->add_option("--min-accuracy", ef.min_accuracy, "Exit 1 below this accuracy");
  eval->add_flag("--pretty", ef.pretty, "Human-readable output");

  VerifyFlags vf;
  auto *verify = app.add_subcommand("verify", "Oracle self-checks");
  verify->require_subcommand(1);
  auto *props = verify->add_subcommand("props", "Relaxation equivalence on random pairs");
  props->add_option("--trials", vf.trials, "Random instances")->capture_default_str();
  props->add_option("--seed", vf.seed, "Seed")->capture_default_str();
  props->add_option("--max-nodes", vf.max_nodes, "Largest graph")->capture_default_str();
  props->add_option("--replay", vf.replay, "Re-run one serialized instance");
  props->add_option("--replay-out", vf.replay_out, "Write the failing instance here");
  props->add_flag("--pretty", vf.pretty, "Human-readable output");
  auto *expect = verify->add_subcommand("expectation", "Monte Carlo E[K_L] = I");
  expect->add_option("--d", vf.d, "Width")->capture_default_str();
  expect->add_option("--layers", vf.layers, "Chain length")->capture_default_str();
  expect->add_option("--samples", vf.samples, "Samples")->capture_default_str();
  expect->add_option("--seed", vf.seed, "Seed")->capture_default_str();
  expect->add_option("--tolerance", vf.tolerance, "Pass threshold")->capture_default_str();
  expect->add_flag("--pretty", vf.pretty, "Human-readable output");

  BenchFlags bf;
  bf.embed.layers = 10;
  auto *bench = app.add_subcommand("bench", "Noise sweep on synthetic pairs");
  bench->add_option("--kind", bf.kinds, "rewire, lowconf (comma list)")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--ratios", bf.ratios, "Noise percentages (comma list)")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--seeds", bf.seeds, "Runs per cell")->capture_default_str();
  bench->add_option("--seed", bf.embed.seed, "Base seed")->capture_default_str();
  bench->add_option("--nodes", bf.nodes, "ER node count")->capture_default_str();
  bench->add_option("--prob", bf.prob, "ER edge probability")->capture_default_str();
  bench->add_option("--input", bf.input, "Fixed source graph instead of ER");
  bench->add_option("--features", bf.features, "onehot or posenc")->capture_default_str();
  bench->add_option("--dim", bf.dim, "posenc width")->capture_default_str();
  bench->add_option("--solver", bf.solver, "hungarian or argmax")->capture_default_str();
  bench->add_flag("--compare-random", bf.compare_random,
                  "Add a random-weight run per pair and report the gap");
  bench->add_option("--anchors", bf.anchor_percent,
                    "Percent of true pairs revealed as anchors");
  bench->add_option("--threads", bf.threads, "Worker threads")->capture_default_str();
  bench->add_flag("--timing", bf.timing, "Record wall-clock seconds");
  bench->add_option("--out", bf.out, "Report file");
  bench->add_flag("--pretty", bf.pretty, "Print a table");
  bf.embed.add(*bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*match) return run_match(mf);
    if (*gen_er) return run_gen_er(gf);
    if (*gen_rewire) return run_gen_noise(gf, tfgm::NoiseKind::Rewire);
    if (*gen_lowconf) return run_gen_noise(gf, tfgm::NoiseKind::LowConf);
    if (*eval) return run_eval(ef);
    if (*props) return run_verify_props(vf);
    if (*expect) return run_verify_expectation(vf);
    if (*bench) return run_bench(bf);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
