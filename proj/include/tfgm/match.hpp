//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "tfgm/assign.hpp"
#include "tfgm/embed.hpp"
#include "tfgm/graph.hpp"

namespace tfgm {

struct MatchResult {
  Assignment assignment;
  Matrix similarity;
};

/// Unsupervised matching: embed both graphs with the same configuration
/// (and therefore the same random weights), compare, solve the LAP.
inline MatchResult match(const Graph &source, const Graph &target,
                         const EmbedConfig &config, Solver solver) {
  if (!source.features() || !target.features())
    throw Error("match: both graphs need node features");
  if (source.features()->cols() != target.features()->cols())
    throw Error("match: feature widths differ (" +
                std::to_string(source.features()->cols()) + " vs " +
                std::to_string(target.features()->cols()) + ")");
  MatchResult r;
  r.similarity = similarity(embed(source, config), embed(target, config));
  r.assignment = solve(r.similarity, solver);
  return r;
}

}  // namespace tfgm
