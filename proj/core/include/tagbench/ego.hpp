#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tagbench/graph.hpp"

namespace tagbench {

struct HopCaps {
  std::size_t hop1_max = 20;
  std::size_t hop2_max = 5;

  friend bool operator==(const HopCaps&, const HopCaps&) = default;
};

// A target node with its sampled 1-hop and 2-hop neighbors. intra_edges holds
// the (directed) edges among included nodes.
struct EgoGraph {
  NodeRecord target;
  std::vector<NodeRecord> hop1;
  std::vector<NodeRecord> hop2;
  std::vector<IdEdge> intra_edges;
  HopCaps caps;
  std::uint64_t seed = 0;

  std::size_t neighbor_count() const { return hop1.size() + hop2.size(); }
  std::vector<std::string> hop1_ids() const;
  std::vector<std::string> hop2_ids() const;
};

// Pure function of its arguments. Neighbors are the union of in- and
// out-edges. hop1 is a uniform sample without replacement of the target's
// neighbors; hop2 is sampled from the neighbors of the sampled hop1 nodes.
// Throws LookupError for unknown targets.
EgoGraph extract_ego_graph(const TextAttributedGraph& graph, std::string_view target,
                           HopCaps caps, std::uint64_t seed);

// Same-label fraction over labeled included neighbors (both hops).
// Throws UndefinedRatioError when the target or every neighbor is unlabeled.
double local_homophily_ratio(const EgoGraph& ego);

// Structural invariants; empty when the ego is well formed.
std::vector<std::string> ego_violations(const EgoGraph& ego);

// Edges among the given node ids taken from the graph, ordered by source
// position in `ids` and then ascending target index.
std::vector<IdEdge> induced_edges(const TextAttributedGraph& graph,
                                  const std::vector<std::string>& ids);

}  // namespace tagbench
