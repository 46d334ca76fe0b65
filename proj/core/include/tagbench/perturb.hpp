#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tagbench/ego.hpp"
#include "tagbench/graph.hpp"
#include "tagbench/profile.hpp"
#include "tagbench/prompt.hpp"

namespace tagbench {

enum class RewireKind { random, extreme, path };
std::string_view to_string(RewireKind kind);
RewireKind parse_rewire_kind(std::string_view text);

struct RewireOptions {
  // path only: remove hop-2 nodes instead of keeping them on their parent.
  bool path_drop_hop2 = false;
};

// Node sets are unchanged (except path with path_drop_hop2). Target<->hop1
// edges survive random and extreme; path leaves the target one edge, to the
// head of a seeded permutation of hop1 chained end to end.
// Throws InvariantViolation when hop1 is empty but hop2 is not.
EgoGraph rewire(const EgoGraph& ego, RewireKind kind, std::uint64_t seed,
                const RewireOptions& options = {});

enum class NeighborMode { drop_same, drop_different, drop_random, add_same, add_different, add_random };
std::string_view to_string(NeighborMode mode);
NeighborMode parse_neighbor_mode(std::string_view text);
bool is_add_mode(NeighborMode mode);
bool is_label_dependent(NeighborMode mode);

struct DropSpec {
  NeighborMode mode = NeighborMode::drop_random;
  double p = 0.0;  // in [0, 1]
  std::uint64_t seed = 0;
};

// round_half_up(total * p), robust to binary representation of p.
std::size_t scaled_count(std::size_t total, double p);

// Closed-form outcome for x same-label and y different-label neighbors.
// For add modes x and y describe the full neighborhood. Random modes leave
// the per-class split to the draw, so only total is fixed.
struct RetainedCounts {
  std::optional<std::size_t> same;
  std::optional<std::size_t> different;
  std::size_t total = 0;
};
RetainedCounts retained_counts(std::size_t x, std::size_t y, double p, NeighborMode mode);

// Drop modes act on every included neighbor (both hops) of ego, then remove
// hop-2 nodes left without a hop-1 parent. Add modes build a fresh hop-1-only
// ego from the target's full neighborhood in graph, ignoring caps.
// Throws ArgumentError for p outside [0, 1] and DataError when a label-
// dependent mode meets an unlabeled target or neighbor.
EgoGraph perturb_neighbors(const TextAttributedGraph& graph, const EgoGraph& ego,
                           const DropSpec& spec);

// Hop-1 entries only. label_only throws DataError for unlabeled neighbors;
// labels outside the train/validation splits are never shown.
std::string render_neighbor_block(const EgoGraph& ego, NeighborRender render,
                                  const DatasetProfile& profile,
                                  const RenderOptions& options = {});

// One experimental condition applied to an ego before rendering.
struct Perturbation {
  enum class Kind { none, rewire, neighbors };
  Kind kind = Kind::none;
  RewireKind rewire_kind = RewireKind::random;
  std::uint64_t rewire_seed = 0;
  RewireOptions rewire_options;
  DropSpec drop;

  static Perturbation none() { return {}; }

  // "none", "rewire:path", "drop_same@0.5#7"
  std::string key() const;

  EgoGraph apply(const TextAttributedGraph& graph, const EgoGraph& ego) const;
};

// {"rewire": "path", "seed": 3, "drop_hop2": false} or
// {"mode": "drop_same", "p": 0.5, "seed": 7}; null or "none" for none.
// Throws ConfigError.
Perturbation perturbation_from_json(const nlohmann::json& j);
nlohmann::json perturbation_to_json(const Perturbation& perturbation);

}  // namespace tagbench
