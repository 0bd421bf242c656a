//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfgm/assign.hpp"
#include "tfgm/error.hpp"
#include "tfgm/graph.hpp"
#include "tfgm/matrix.hpp"
#include "tfgm/oracle.hpp"

namespace tfgm {

using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "raw float32 exchange assumes a little-endian host");

namespace detail {

inline std::string read_text(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json_file(const std::filesystem::path &path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(path.string() + ": byte " + std::to_string(e.byte) +
                     ": malformed JSON: " + e.what());
  }
}

inline void write_text(const std::filesystem::path &path,
                       const std::string &text) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot write file");
  out << text;
}

[[noreturn]] inline void fail_at(const std::filesystem::path &path,
                                 const std::string &where,
                                 const std::string &what) {
  throw ParseError(path.string() + ": " + where + ": " + what);
}

template <class T>
T get_as(const json &j, const std::filesystem::path &path,
         const std::string &where) {
  try {
    return j.get<T>();
  } catch (const json::exception &e) {
    fail_at(path, where, std::string("wrong type: ") + e.what());
  }
}

inline Matrix parse_dense(const json &rows, const std::filesystem::path &path,
                          const std::string &where) {
  if (!rows.is_array()) fail_at(path, where, "expected an array of rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::Index d = 0;
  if (n > 0) {
    if (!rows[0].is_array()) fail_at(path, where + "/0", "expected an array");
    d = static_cast<Eigen::Index>(rows[0].size());
  }
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string at = where + "/" + std::to_string(i);
    const json &row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d)
      fail_at(path, at, "expected " + std::to_string(d) + " values");
    for (Eigen::Index k = 0; k < d; ++k)
      m(i, k) = get_as<double>(row[static_cast<std::size_t>(k)], path,
                               at + "/" + std::to_string(k));
  }
  return m;
}

}  // namespace detail

/// Reads a raw little-endian float32 row-major matrix.
inline Matrix read_f32_matrix(const std::filesystem::path &path,
                              std::size_t rows, std::size_t cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string() + ": cannot open file");
  std::vector<float> buf(rows * cols);
  in.read(reinterpret_cast<char *>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != buf.size() * sizeof(float))
    throw ParseError(path.string() + ": byte " + std::to_string(in.gcount()) +
                     ": file shorter than " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " float32 values");
  in.peek();
  if (!in.eof())
    throw ParseError(path.string() + ": byte " +
                     std::to_string(buf.size() * sizeof(float)) +
                     ": trailing data after " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " float32 values");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t k = 0; k < buf.size(); ++k)
    m.data()[k] = static_cast<double>(buf[k]);
  return m;
}

inline void write_f32_matrix(const std::filesystem::path &path,
                             const Matrix &m) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot write file");
  std::vector<float> buf(static_cast<std::size_t>(m.size()));
  for (std::size_t k = 0; k < buf.size(); ++k)
    buf[k] = static_cast<float>(m.data()[k]);
  out.write(reinterpret_cast<const char *>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

// ---------------------------------------------------------------------------
// Graph files
// ---------------------------------------------------------------------------

struct LoadedGraph {
  Graph graph;
  EdgeListStats stats;
};

/*
 * {"num_nodes": n, "edges": [[u,v],...], "features": [[...]] | null,
 *  "features_file": path | null, "feature_dim": d, "labels": [...] | null}
 *
 * features_file is resolved relative to `base_dir`.
 */
inline LoadedGraph parse_graph(const json &doc,
                               const std::filesystem::path &path,
                               const std::filesystem::path &base_dir) {
  if (!doc.is_object()) detail::fail_at(path, "/", "expected a JSON object");
  if (!doc.contains("num_nodes"))
    detail::fail_at(path, "/num_nodes", "missing field");
  const auto n = detail::get_as<std::int64_t>(doc["num_nodes"], path, "/num_nodes");
  if (n < 0) detail::fail_at(path, "/num_nodes", "must be non-negative");
  const auto num_nodes = static_cast<std::size_t>(n);

  std::vector<Edge> edges;
  if (doc.contains("edges") && !doc["edges"].is_null()) {
    const json &list = doc["edges"];
    if (!list.is_array()) detail::fail_at(path, "/edges", "expected an array");
    edges.reserve(list.size());
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string at = "/edges/" + std::to_string(k);
      const json &e = list[k];
      if (!e.is_array() || e.size() != 2)
        detail::fail_at(path, at, "expected a [u, v] pair");
      const auto u = detail::get_as<std::int64_t>(e[0], path, at + "/0");
      const auto v = detail::get_as<std::int64_t>(e[1], path, at + "/1");
      if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= num_nodes ||
          static_cast<std::size_t>(v) >= num_nodes)
        detail::fail_at(path, at,
                        "node index out of range (" + std::to_string(u) + "," +
                            std::to_string(v) + " with num_nodes=" +
                            std::to_string(num_nodes) + ")");
      edges.emplace_back(static_cast<NodeIndex>(u), static_cast<NodeIndex>(v));
    }
  }

  LoadedGraph out;
  out.graph = Graph::from_edges(num_nodes, edges, &out.stats);

  const bool inline_features = doc.contains("features") && !doc["features"].is_null();
  const bool file_features =
      doc.contains("features_file") && !doc["features_file"].is_null();
  if (inline_features && file_features)
    detail::fail_at(path, "/features_file",
                    "both inline features and a features file given");
  if (inline_features) {
    Matrix x = detail::parse_dense(doc["features"], path, "/features");
    if (static_cast<std::size_t>(x.rows()) != num_nodes)
      detail::fail_at(path, "/features",
                      "has " + std::to_string(x.rows()) + " rows, expected " +
                          std::to_string(num_nodes));
    out.graph = out.graph.with_features(std::move(x));
  } else if (file_features) {
    if (!doc.contains("feature_dim"))
      detail::fail_at(path, "/feature_dim", "required with features_file");
    const auto d = detail::get_as<std::int64_t>(doc["feature_dim"], path, "/feature_dim");
    if (d < 0) detail::fail_at(path, "/feature_dim", "must be non-negative");
    const auto rel = detail::get_as<std::string>(doc["features_file"], path,
                                                 "/features_file");
    std::filesystem::path fpath(rel);
    if (fpath.is_relative()) fpath = base_dir / fpath;
    out.graph = out.graph.with_features(
        read_f32_matrix(fpath, num_nodes, static_cast<std::size_t>(d)));
  }

  if (doc.contains("labels") && !doc["labels"].is_null()) {
    const json &list = doc["labels"];
    if (!list.is_array()) detail::fail_at(path, "/labels", "expected an array");
    if (list.size() != num_nodes)
      detail::fail_at(path, "/labels",
                      "has " + std::to_string(list.size()) + " entries, expected " +
                          std::to_string(num_nodes));
    std::vector<std::int64_t> labels(num_nodes);
    for (std::size_t i = 0; i < num_nodes; ++i) {
      labels[i] = detail::get_as<std::int64_t>(list[i], path,
                                               "/labels/" + std::to_string(i));
      if (labels[i] < 0)
        detail::fail_at(path, "/labels/" + std::to_string(i),
                        "labels must be non-negative");
    }
    out.graph = out.graph.with_labels(std::move(labels));
  }
  return out;
}

inline LoadedGraph load_graph(const std::filesystem::path &path) {
  return parse_graph(detail::parse_json_file(path), path, path.parent_path());
}

inline json graph_to_json(const Graph &g) {
  json doc;
  doc["num_nodes"] = g.num_nodes();
  json edges = json::array();
  for (const auto &[u, v] : g.edge_list()) edges.push_back({u, v});
  doc["edges"] = std::move(edges);
  if (g.features()) {
    json rows = json::array();
    const Matrix &x = *g.features();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < x.cols(); ++k) row.push_back(x(i, k));
      rows.push_back(std::move(row));
    }
    doc["features"] = std::move(rows);
  } else {
    doc["features"] = nullptr;
  }
  if (g.labels())
    doc["labels"] = *g.labels();
  else
    doc["labels"] = nullptr;
  return doc;
}

inline void save_graph(const Graph &g, const std::filesystem::path &path) {
  detail::write_text(path, graph_to_json(g).dump() + "\n");
}

// ---------------------------------------------------------------------------
// Pair files, manifests
// ---------------------------------------------------------------------------

inline std::vector<NodePair> parse_pairs(const json &doc,
                                         const std::filesystem::path &path) {
  if (!doc.is_object() || !doc.contains("pairs"))
    detail::fail_at(path, "/pairs", "missing field");
  const json &list = doc["pairs"];
  if (!list.is_array()) detail::fail_at(path, "/pairs", "expected an array");
  std::vector<NodePair> pairs;
  pairs.reserve(list.size());
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string at = "/pairs/" + std::to_string(k);
    if (!list[k].is_array() || list[k].size() != 2)
      detail::fail_at(path, at, "expected an [i, j] pair");
    const auto i = detail::get_as<std::int64_t>(list[k][0], path, at + "/0");
    const auto j = detail::get_as<std::int64_t>(list[k][1], path, at + "/1");
    if (i < 0 || j < 0) detail::fail_at(path, at, "negative node index");
    pairs.push_back({static_cast<NodeIndex>(i), static_cast<NodeIndex>(j)});
  }
  return pairs;
}

template <class Tag>
PairSet<Tag> load_pairs(const std::filesystem::path &path) {
  auto pairs = parse_pairs(detail::parse_json_file(path), path);
  try {
    return PairSet<Tag>(std::move(pairs));
  } catch (const Error &e) {
    throw ParseError(path.string() + ": /pairs: " + e.what());
  }
}

inline GroundTruth load_ground_truth(const std::filesystem::path &path) {
  return load_pairs<GroundTruthTag>(path);
}

inline AnchorSet load_anchors(const std::filesystem::path &path) {
  return load_pairs<AnchorTag>(path);
}

template <class Tag>
json pairs_to_json(const PairSet<Tag> &pairs) {
  json list = json::array();
  for (const auto &p : pairs) list.push_back({p.source, p.target});
  return json{{"pairs", std::move(list)}};
}

template <class Tag>
void save_pairs(const PairSet<Tag> &pairs, const std::filesystem::path &path) {
  detail::write_text(path, pairs_to_json(pairs).dump() + "\n");
}

/*
 * {"graphs": [path, ...]}, paths relative to the manifest. Raw labels are
 * remapped through a dictionary (sorted distinct values -> 0..K-1) shared by
 * the whole set.
 */
inline TrainingSet load_training_set(const std::filesystem::path &manifest) {
  const json doc = detail::parse_json_file(manifest);
  if (!doc.is_object() || !doc.contains("graphs") || !doc["graphs"].is_array())
    detail::fail_at(manifest, "/graphs", "expected an array of paths");
  std::vector<Graph> graphs;
  for (std::size_t k = 0; k < doc["graphs"].size(); ++k) {
    const auto rel = detail::get_as<std::string>(doc["graphs"][k], manifest,
                                                 "/graphs/" + std::to_string(k));
    std::filesystem::path p(rel);
    if (p.is_relative()) p = manifest.parent_path() / p;
    Graph g = load_graph(p).graph;
    if (!g.labels()) throw ParseError(p.string() + ": /labels: training graph needs labels");
    graphs.push_back(std::move(g));
  }
  std::map<std::int64_t, std::int64_t> dictionary;
  for (const auto &g : graphs)
    for (auto l : *g.labels()) dictionary.emplace(l, 0);
  std::int64_t next = 0;
  for (auto &[raw, dense] : dictionary) dense = next++;
  for (auto &g : graphs) {
    std::vector<std::int64_t> dense = *g.labels();
    for (auto &l : dense) l = dictionary.at(l);
    g = g.with_labels(std::move(dense));
  }
  try {
    return TrainingSet(std::move(graphs));
  } catch (const Error &e) {
    throw ParseError(manifest.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

inline json assignment_to_json(const Assignment &a, double objective_value) {
  json targets = json::array();
  for (const auto &t : a.target_of) {
    if (t)
      targets.push_back(*t);
    else
      targets.push_back(nullptr);
  }
  return json{{"target_of", std::move(targets)},
              {"injective", a.injective},
              {"objective", objective_value}};
}

inline Assignment assignment_from_json(const json &doc,
                                       const std::filesystem::path &path) {
  if (!doc.is_object() || !doc.contains("target_of") || !doc["target_of"].is_array())
    detail::fail_at(path, "/target_of", "expected an array");
  Assignment a;
  for (std::size_t k = 0; k < doc["target_of"].size(); ++k) {
    const json &t = doc["target_of"][k];
    if (t.is_null()) {
      a.target_of.push_back(std::nullopt);
    } else {
      const auto v = detail::get_as<std::int64_t>(t, path, "/target_of/" + std::to_string(k));
      if (v < 0) detail::fail_at(path, "/target_of/" + std::to_string(k), "negative index");
      a.target_of.push_back(static_cast<NodeIndex>(v));
    }
  }
  a.injective = is_injective(a);
  return a;
}

/// Writes U as raw float32 plus a JSON shape sidecar at `<path>.json`.
inline void dump_similarity(const Matrix &u, const std::filesystem::path &path) {
  write_f32_matrix(path, u);
  json shape{{"rows", u.rows()}, {"cols", u.cols()}, {"dtype", "float32"},
             {"order", "row-major"}};
  detail::write_text(path.string() + ".json", shape.dump() + "\n");
}

inline Matrix load_similarity(const std::filesystem::path &path) {
  const std::filesystem::path sidecar = path.string() + ".json";
  const json shape = detail::parse_json_file(sidecar);
  if (!shape.contains("rows") || !shape.contains("cols"))
    detail::fail_at(sidecar, "/", "missing rows/cols");
  const auto rows = detail::get_as<std::size_t>(shape["rows"], sidecar, "/rows");
  const auto cols = detail::get_as<std::size_t>(shape["cols"], sidecar, "/cols");
  return read_f32_matrix(path, rows, cols);
}

inline json report_to_json(const PropReport &r) {
  return json{{"max_gap", r.max_gap},
              {"instances", r.instances},
              {"zero_row_instances", r.zero_row_instances},
              {"pass", r.pass}};
}

inline json trial_to_json(const PropTrial &t) {
  const EmbedConfig &c = t.config;
  return json{{"source", graph_to_json(t.source)},
              {"target", graph_to_json(t.target)},
              {"config",
               {{"layers", c.layers},
                {"operator", std::string(to_string(c.op))},
                {"weights", std::string(to_string(c.weights))},
                {"seed", c.seed},
                {"hidden_dim", c.hidden_dim},
                {"nonlinearity", std::string(to_string(c.nonlinearity))}}}};
}

inline PropTrial trial_from_json(const json &doc, const std::filesystem::path &path) {
  if (!doc.is_object()) detail::fail_at(path, "/", "expected a JSON object");
  for (const char *key : {"source", "target", "config"})
    if (!doc.contains(key)) detail::fail_at(path, std::string("/") + key, "missing field");
  PropTrial t;
  t.source = parse_graph(doc["source"], path, path.parent_path()).graph;
  t.target = parse_graph(doc["target"], path, path.parent_path()).graph;
  const json &c = doc["config"];
  auto text = [&](const char *key) {
    if (!c.contains(key)) detail::fail_at(path, std::string("/config/") + key, "missing field");
    return detail::get_as<std::string>(c[key], path, std::string("/config/") + key);
  };
  auto count = [&](const char *key) {
    if (!c.contains(key)) detail::fail_at(path, std::string("/config/") + key, "missing field");
    return detail::get_as<std::uint64_t>(c[key], path, std::string("/config/") + key);
  };
  try {
    t.config.layers = count("layers");
    t.config.op = parse_operator_kind(text("operator"));
    t.config.weights = parse_weight_mode(text("weights"));
    t.config.seed = count("seed");
    t.config.hidden_dim = count("hidden_dim");
    t.config.nonlinearity = parse_nonlinearity(text("nonlinearity"));
  } catch (const ParseError &) {
    throw;
  } catch (const Error &e) {
    throw ParseError(path.string() + ": /config: " + e.what());
  }
  return t;
}

}  // namespace tfgm
