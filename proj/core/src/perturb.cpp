#include "tagbench/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "tagbench/error.hpp"
#include "tagbench/rng.hpp"

namespace tagbench {

using nlohmann::json;

std::string_view to_string(RewireKind kind) {
  switch (kind) {
    case RewireKind::random: return "random";
    case RewireKind::extreme: return "extreme";
    case RewireKind::path: return "path";
  }
  return "?";
}

RewireKind parse_rewire_kind(std::string_view text) {
  if (text == "random") return RewireKind::random;
  if (text == "extreme") return RewireKind::extreme;
  if (text == "path") return RewireKind::path;
  throw ArgumentError("unknown rewire strategy '" + std::string(text) + "'");
}

std::string_view to_string(NeighborMode mode) {
  switch (mode) {
    case NeighborMode::drop_same: return "drop_same";
    case NeighborMode::drop_different: return "drop_different";
    case NeighborMode::drop_random: return "drop_random";
    case NeighborMode::add_same: return "add_same";
    case NeighborMode::add_different: return "add_different";
    case NeighborMode::add_random: return "add_random";
  }
  return "?";
}

NeighborMode parse_neighbor_mode(std::string_view text) {
  for (auto m : {NeighborMode::drop_same, NeighborMode::drop_different, NeighborMode::drop_random,
                 NeighborMode::add_same, NeighborMode::add_different, NeighborMode::add_random}) {
    if (text == to_string(m)) return m;
  }
  throw ArgumentError("unknown neighbor mode '" + std::string(text) + "'");
}

bool is_add_mode(NeighborMode mode) {
  return mode == NeighborMode::add_same || mode == NeighborMode::add_different ||
         mode == NeighborMode::add_random;
}

bool is_label_dependent(NeighborMode mode) {
  return mode != NeighborMode::drop_random && mode != NeighborMode::add_random;
}

namespace {

void require_hop1_if_hop2(const EgoGraph& ego) {
  if (ego.hop1.empty() && !ego.hop2.empty()) {
    throw InvariantViolation("ego of '" + ego.target.id + "' has hop-2 nodes but no hop-1 nodes");
  }
}

// First hop-1 node (in ego order) adjacent to each hop-2 node.
std::unordered_map<std::string, std::size_t> first_parents(const EgoGraph& ego) {
  std::unordered_map<std::string, std::size_t> hop1_pos;
  for (std::size_t i = 0; i < ego.hop1.size(); ++i) hop1_pos.emplace(ego.hop1[i].id, i);
  std::unordered_set<std::string> hop2_ids;
  for (const auto& n : ego.hop2) hop2_ids.insert(n.id);

  std::unordered_map<std::string, std::size_t> parent;
  for (const auto& e : ego.intra_edges) {
    for (const auto& [a, b] : {std::pair{&e.source, &e.target}, std::pair{&e.target, &e.source}}) {
      auto h1 = hop1_pos.find(*a);
      if (h1 == hop1_pos.end() || !hop2_ids.count(*b)) continue;
      auto [it, inserted] = parent.emplace(*b, h1->second);
      if (!inserted) it->second = std::min(it->second, h1->second);
    }
  }
  return parent;
}

std::vector<IdEdge> target_hop1_edges(const EgoGraph& ego) {
  std::unordered_set<std::string> hop1;
  for (const auto& n : ego.hop1) hop1.insert(n.id);
  std::vector<IdEdge> kept;
  for (const auto& e : ego.intra_edges) {
    if ((e.source == ego.target.id && hop1.count(e.target)) ||
        (e.target == ego.target.id && hop1.count(e.source))) {
      kept.push_back(e);
    }
  }
  return kept;
}

}  // namespace

EgoGraph rewire(const EgoGraph& ego, RewireKind kind, std::uint64_t seed,
                const RewireOptions& options) {
  require_hop1_if_hop2(ego);
  Rng rng(derive_seed(derive_seed(seed, "rewire"), ego.target.id));
  EgoGraph out = ego;
  out.intra_edges.clear();

  switch (kind) {
    case RewireKind::random: {
      out.intra_edges = target_hop1_edges(ego);
      for (const auto& n : ego.hop2) {
        const auto& parent = ego.hop1[rng.uniform(ego.hop1.size())];
        out.intra_edges.push_back({parent.id, n.id});
      }
      break;
    }
    case RewireKind::extreme: {
      out.intra_edges = target_hop1_edges(ego);
      if (!ego.hop2.empty()) {
        const auto& hub = ego.hop1[rng.uniform(ego.hop1.size())];
        for (const auto& n : ego.hop2) out.intra_edges.push_back({hub.id, n.id});
      }
      break;
    }
    case RewireKind::path: {
      std::vector<std::size_t> order(ego.hop1.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      rng.shuffle(order);
      out.hop1.clear();
      for (auto i : order) out.hop1.push_back(ego.hop1[i]);
      if (!out.hop1.empty()) out.intra_edges.push_back({ego.target.id, out.hop1.front().id});
      for (std::size_t i = 1; i < out.hop1.size(); ++i) {
        out.intra_edges.push_back({out.hop1[i - 1].id, out.hop1[i].id});
      }
      if (options.path_drop_hop2) {
        out.hop2.clear();
        break;
      }
      const auto parents = first_parents(ego);
      for (const auto& n : ego.hop2) {
        auto it = parents.find(n.id);
        if (it == parents.end()) {
          throw InvariantViolation("hop-2 node '" + n.id + "' has no hop-1 parent");
        }
        out.intra_edges.push_back({ego.hop1[it->second].id, n.id});
      }
      break;
    }
  }
  return out;
}

std::size_t scaled_count(std::size_t total, double p) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(total) * p + 0.5 + 1e-9));
}

RetainedCounts retained_counts(std::size_t x, std::size_t y, double p, NeighborMode mode) {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("p must lie in [0, 1]");
  const std::size_t b = scaled_count(x + y, p);
  RetainedCounts r;
  switch (mode) {
    case NeighborMode::drop_same:
      r.same = x > b ? x - b : 0;
      r.different = y;
      break;
    case NeighborMode::drop_different:
      r.same = x;
      r.different = y > b ? y - b : 0;
      break;
    case NeighborMode::drop_random:
      r.total = x + y - std::min(b, x + y);
      return r;
    case NeighborMode::add_same:
      r.same = std::min(b, x);
      r.different = 0;
      break;
    case NeighborMode::add_different:
      r.same = 0;
      r.different = std::min(b, y);
      break;
    case NeighborMode::add_random:
      r.total = std::min(b, x + y);
      return r;
  }
  r.total = *r.same + *r.different;
  return r;
}

namespace {

enum class Side { same, different };

Side side_of(const NodeRecord& n, const NodeRecord& target, NeighborMode mode) {
  if (!n.label) {
    throw DataError("neighbor '" + n.id + "' is unlabeled under " + std::string(to_string(mode)));
  }
  return *n.label == *target.label ? Side::same : Side::different;
}

// Keeps `keep` of the candidate positions, chosen by rng.
void choose_survivors(std::vector<std::size_t> candidates, std::size_t keep, Rng& rng,
                      std::vector<bool>& alive) {
  for (auto c : candidates) alive[c] = false;
  for (auto i : rng.sample_indices(candidates.size(), keep)) alive[candidates[i]] = true;
}

EgoGraph drop_neighbors(const EgoGraph& ego, const DropSpec& spec, Rng& rng) {
  std::vector<const NodeRecord*> all;
  for (const auto& n : ego.hop1) all.push_back(&n);
  for (const auto& n : ego.hop2) all.push_back(&n);

  std::vector<std::size_t> same, different;
  if (is_label_dependent(spec.mode)) {
    for (std::size_t i = 0; i < all.size(); ++i) {
      (side_of(*all[i], ego.target, spec.mode) == Side::same ? same : different).push_back(i);
    }
  }
  const std::size_t b = scaled_count(all.size(), spec.p);
  std::vector<bool> alive(all.size(), true);
  switch (spec.mode) {
    case NeighborMode::drop_same:
      choose_survivors(same, same.size() > b ? same.size() - b : 0, rng, alive);
      break;
    case NeighborMode::drop_different:
      choose_survivors(different, different.size() > b ? different.size() - b : 0, rng, alive);
      break;
    case NeighborMode::drop_random: {
      std::vector<std::size_t> everyone(all.size());
      for (std::size_t i = 0; i < everyone.size(); ++i) everyone[i] = i;
      choose_survivors(everyone, all.size() - std::min(b, all.size()), rng, alive);
      break;
    }
    default:
      break;
  }

  EgoGraph out = ego;
  out.hop1.clear();
  out.hop2.clear();
  std::unordered_set<std::string> kept{ego.target.id};
  for (std::size_t i = 0; i < ego.hop1.size(); ++i) {
    if (alive[i]) {
      out.hop1.push_back(ego.hop1[i]);
      kept.insert(ego.hop1[i].id);
    }
  }
  std::unordered_set<std::string> hop1_kept(kept);
  hop1_kept.erase(ego.target.id);
  for (std::size_t j = 0; j < ego.hop2.size(); ++j) {
    if (!alive[ego.hop1.size() + j]) continue;
    const auto& id = ego.hop2[j].id;
    const bool has_parent =
        std::any_of(ego.intra_edges.begin(), ego.intra_edges.end(), [&](const IdEdge& e) {
          return (e.source == id && hop1_kept.count(e.target)) ||
                 (e.target == id && hop1_kept.count(e.source));
        });
    if (has_parent) {
      out.hop2.push_back(ego.hop2[j]);
      kept.insert(id);
    }
  }
  out.intra_edges.clear();
  for (const auto& e : ego.intra_edges) {
    if (kept.count(e.source) && kept.count(e.target)) out.intra_edges.push_back(e);
  }
  return out;
}

EgoGraph add_neighbors(const TextAttributedGraph& graph, const EgoGraph& ego,
                       const DropSpec& spec, Rng& rng) {
  const auto t = graph.index_of(ego.target.id);
  const auto pool = graph.neighbors(t);
  std::vector<std::size_t> same, different, everyone;
  for (auto v : pool) {
    everyone.push_back(v);
    if (!is_label_dependent(spec.mode)) continue;
    (side_of(graph.node(v), ego.target, spec.mode) == Side::same ? same : different).push_back(v);
  }
  const std::vector<std::size_t>& source = spec.mode == NeighborMode::add_same        ? same
                                           : spec.mode == NeighborMode::add_different ? different
                                                                                      : everyone;
  const std::size_t b = std::min(scaled_count(pool.size(), spec.p), source.size());
  auto picks = rng.sample_indices(source.size(), b);
  std::sort(picks.begin(), picks.end());

  EgoGraph out;
  out.target = ego.target;
  out.caps = ego.caps;
  out.seed = ego.seed;
  std::vector<std::string> ids{ego.target.id};
  for (auto i : picks) {
    out.hop1.push_back(graph.node(source[i]));
    ids.push_back(graph.node(source[i]).id);
  }
  out.caps.hop1_max = std::max(out.caps.hop1_max, out.hop1.size());
  out.intra_edges = induced_edges(graph, ids);
  return out;
}

}  // namespace

EgoGraph perturb_neighbors(const TextAttributedGraph& graph, const EgoGraph& ego,
                           const DropSpec& spec) {
  if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw ArgumentError("p must lie in [0, 1]");
  if (is_label_dependent(spec.mode) && !ego.target.label) {
    throw DataError("target '" + ego.target.id + "' is unlabeled under " +
                    std::string(to_string(spec.mode)));
  }
  Rng rng(derive_seed(derive_seed(spec.seed, to_string(spec.mode)), ego.target.id));
  if (is_add_mode(spec.mode)) return add_neighbors(graph, ego, spec, rng);
  return drop_neighbors(ego, spec, rng);
}

std::string render_neighbor_block(const EgoGraph& ego, NeighborRender render,
                                  const DatasetProfile& profile, const RenderOptions& options) {
  const bool show_title = render != NeighborRender::label_only;
  const bool show_label = render != NeighborRender::title_only;
  json papers = json::array();
  for (std::size_t i = 0; i < ego.hop1.size(); ++i) {
    const auto& n = ego.hop1[i];
    if (render == NeighborRender::label_only && !n.label) {
      throw DataError("label_only rendering needs a label for neighbor '" + n.id + "'");
    }
    json label = false;
    if (show_label && n.label && (n.split == Split::train || n.split == Split::validation)) {
      if (*n.label >= profile.label_vocab.size()) {
        throw ArgumentError("label of '" + n.id + "' is outside the profile vocabulary");
      }
      label = profile.label_vocab[*n.label];
    }
    papers.push_back(
        {{"number", i + 1}, {"title", n.title}, {"show_title", show_title}, {"label", label}});
  }
  const auto& templates = options.templates ? *options.templates : TemplateSet::builtin();
  return templates.get("neighbor_block").render({{"papers", papers}});
}

namespace {

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

}  // namespace

std::string Perturbation::key() const {
  switch (kind) {
    case Kind::none:
      return "none";
    case Kind::rewire: {
      std::string k = "rewire:" + std::string(to_string(rewire_kind));
      if (rewire_kind == RewireKind::path && rewire_options.path_drop_hop2) k += "-drop-hop2";
      return k + "#" + std::to_string(rewire_seed);
    }
    case Kind::neighbors:
      return std::string(to_string(drop.mode)) + "@" + format_p(drop.p) + "#" +
             std::to_string(drop.seed);
  }
  return "?";
}

EgoGraph Perturbation::apply(const TextAttributedGraph& graph, const EgoGraph& ego) const {
  switch (kind) {
    case Kind::none: return ego;
    case Kind::rewire: return rewire(ego, rewire_kind, rewire_seed, rewire_options);
    case Kind::neighbors: return perturb_neighbors(graph, ego, drop);
  }
  return ego;
}

Perturbation perturbation_from_json(const json& j) {
  Perturbation out;
  try {
    if (j.is_null() || (j.is_string() && j.get<std::string>() == "none")) return out;
    if (!j.is_object()) throw ConfigError("perturbation must be an object");
    if (j.contains("rewire")) {
      out.kind = Perturbation::Kind::rewire;
      out.rewire_kind = parse_rewire_kind(j.at("rewire").get<std::string>());
      out.rewire_seed = j.value("seed", std::uint64_t{0});
      out.rewire_options.path_drop_hop2 = j.value("drop_hop2", false);
      return out;
    }
    out.kind = Perturbation::Kind::neighbors;
    out.drop.mode = parse_neighbor_mode(j.at("mode").get<std::string>());
    out.drop.p = j.at("p").get<double>();
    out.drop.seed = j.value("seed", std::uint64_t{0});
    if (!(out.drop.p >= 0.0 && out.drop.p <= 1.0)) throw ConfigError("p must lie in [0, 1]");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid perturbation: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  return out;
}

json perturbation_to_json(const Perturbation& perturbation) {
  switch (perturbation.kind) {
    case Perturbation::Kind::none:
      return "none";
    case Perturbation::Kind::rewire: {
      json j = {{"rewire", to_string(perturbation.rewire_kind)}, {"seed", perturbation.rewire_seed}};
      if (perturbation.rewire_options.path_drop_hop2) j["drop_hop2"] = true;
      return j;
    }
    case Perturbation::Kind::neighbors:
      return {{"mode", to_string(perturbation.drop.mode)},
              {"p", perturbation.drop.p},
              {"seed", perturbation.drop.seed}};
  }
  return nullptr;
}

}  // namespace tagbench
