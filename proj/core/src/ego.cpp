#include "tagbench/ego.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "tagbench/error.hpp"
#include "tagbench/rng.hpp"

namespace tagbench {

std::vector<std::string> EgoGraph::hop1_ids() const {
  std::vector<std::string> ids;
  for (const auto& n : hop1) ids.push_back(n.id);
  return ids;
}

std::vector<std::string> EgoGraph::hop2_ids() const {
  std::vector<std::string> ids;
  for (const auto& n : hop2) ids.push_back(n.id);
  return ids;
}

std::vector<IdEdge> induced_edges(const TextAttributedGraph& graph,
                                  const std::vector<std::string>& ids) {
  std::unordered_set<std::size_t> included;
  std::vector<std::size_t> order;
  for (const auto& id : ids) {
    auto v = graph.index_of(id);
    if (included.insert(v).second) order.push_back(v);
  }
  std::vector<IdEdge> edges;
  for (auto u : order) {
    for (auto v : graph.out_neighbors(u)) {
      if (included.count(v)) edges.push_back({graph.node(u).id, graph.node(v).id});
    }
  }
  return edges;
}

EgoGraph extract_ego_graph(const TextAttributedGraph& graph, std::string_view target,
                           HopCaps caps, std::uint64_t seed) {
  const std::size_t t = graph.index_of(target);
  Rng rng(derive_seed(seed, target));

  EgoGraph ego;
  ego.target = graph.node(t);
  ego.caps = caps;
  ego.seed = seed;

  const auto direct = graph.neighbors(t);
  std::vector<std::size_t> hop1;
  for (auto i : rng.sample_indices(direct.size(), caps.hop1_max)) hop1.push_back(direct[i]);

  std::unordered_set<std::size_t> excluded(hop1.begin(), hop1.end());
  excluded.insert(t);
  std::set<std::size_t> candidates;
  for (auto h : hop1) {
    for (auto v : graph.neighbors(h)) {
      if (!excluded.count(v)) candidates.insert(v);
    }
  }
  const std::vector<std::size_t> pool(candidates.begin(), candidates.end());
  std::vector<std::size_t> hop2;
  for (auto i : rng.sample_indices(pool.size(), caps.hop2_max)) hop2.push_back(pool[i]);

  std::vector<std::string> ids{ego.target.id};
  for (auto v : hop1) {
    ego.hop1.push_back(graph.node(v));
    ids.push_back(graph.node(v).id);
  }
  for (auto v : hop2) {
    ego.hop2.push_back(graph.node(v));
    ids.push_back(graph.node(v).id);
  }
  ego.intra_edges = induced_edges(graph, ids);
  return ego;
}

double local_homophily_ratio(const EgoGraph& ego) {
  if (!ego.target.label) throw UndefinedRatioError("target '" + ego.target.id + "' is unlabeled");
  std::size_t labeled = 0;
  std::size_t same = 0;
  for (const auto* hop : {&ego.hop1, &ego.hop2}) {
    for (const auto& n : *hop) {
      if (!n.label) continue;
      ++labeled;
      if (*n.label == *ego.target.label) ++same;
    }
  }
  if (labeled == 0) {
    throw UndefinedRatioError("target '" + ego.target.id + "' has no labeled neighbors");
  }
  return static_cast<double>(same) / static_cast<double>(labeled);
}

std::vector<std::string> ego_violations(const EgoGraph& ego) {
  std::vector<std::string> problems;
  if (ego.hop1.size() > ego.caps.hop1_max) problems.push_back("hop1 exceeds cap");
  if (ego.hop2.size() > ego.caps.hop2_max) problems.push_back("hop2 exceeds cap");

  std::unordered_map<std::string, int> hop_of{{ego.target.id, 0}};
  for (const auto& n : ego.hop1) {
    if (!hop_of.emplace(n.id, 1).second) problems.push_back("duplicate or target in hop1: " + n.id);
  }
  for (const auto& n : ego.hop2) {
    if (!hop_of.emplace(n.id, 2).second) problems.push_back("hop2 overlaps: " + n.id);
  }

  std::unordered_map<std::string, std::vector<std::string>> adjacent;
  for (const auto& e : ego.intra_edges) {
    if (!hop_of.count(e.source) || !hop_of.count(e.target)) {
      problems.push_back("intra edge leaves the ego: " + e.source + "->" + e.target);
      continue;
    }
    adjacent[e.source].push_back(e.target);
    adjacent[e.target].push_back(e.source);
  }
  for (const auto& n : ego.hop2) {
    bool reached = false;
    for (const auto& m : adjacent[n.id]) {
      if (hop_of[m] == 1) {
        reached = true;
        break;
      }
    }
    if (!reached) problems.push_back("hop2 node without hop1 parent: " + n.id);
  }
  return problems;
}

}  // namespace tagbench
