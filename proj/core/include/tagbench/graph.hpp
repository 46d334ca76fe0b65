#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tagbench {

enum class Split { train, validation, test, none };

std::string_view to_string(Split split);
// Accepts "train", "validation"/"val", "test", "none". Throws ArgumentError.
Split parse_split(std::string_view text);

struct NodeRecord {
  std::string id;
  std::string title;
  std::optional<std::string> body;
  std::optional<std::size_t> label;  // index into the graph's label vocabulary
  std::optional<int> year;
  Split split = Split::none;
};

struct Edge {
  std::size_t source;
  std::size_t target;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct IdEdge {
  std::string source;
  std::string target;

  friend bool operator==(const IdEdge&, const IdEdge&) = default;
  friend auto operator<=>(const IdEdge&, const IdEdge&) = default;
};

struct LoadStats {
  std::size_t self_loops_removed = 0;
  std::size_t duplicates_removed = 0;
};

using SplitAssignment = std::unordered_map<std::string, Split>;

// Directed graph whose nodes carry text. Node indices follow insertion order;
// edges keep first-occurrence order after self-loops and duplicates are dropped.
class TextAttributedGraph {
 public:
  TextAttributedGraph() = default;

  // Throws SchemaError on dangling endpoints, duplicate node ids, empty titles
  // or labels outside the vocabulary.
  TextAttributedGraph(std::vector<NodeRecord> nodes, const std::vector<IdEdge>& edges,
                      std::vector<std::string> label_vocab, LoadStats* stats = nullptr);

  std::size_t size() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const NodeRecord& node(std::size_t index) const { return nodes_[index]; }
  const NodeRecord& node(std::string_view id) const { return nodes_[index_of(id)]; }
  std::span<const NodeRecord> nodes() const { return nodes_; }

  std::optional<std::size_t> find(std::string_view id) const;
  // Throws LookupError for unknown ids.
  std::size_t index_of(std::string_view id) const;

  std::span<const Edge> edges() const { return edges_; }
  std::span<const std::size_t> out_neighbors(std::size_t v) const { return out_[v]; }
  std::span<const std::size_t> in_neighbors(std::size_t v) const { return in_[v]; }
  // Union of in- and out-neighbors, ascending by index.
  std::span<const std::size_t> neighbors(std::size_t v) const { return undirected_[v]; }
  bool has_edge(std::size_t source, std::size_t target) const;

  const std::vector<std::string>& label_vocab() const { return label_vocab_; }
  std::optional<std::size_t> label_index(std::string_view name) const;

  // Overwrites node splits; ids absent from the assignment become Split::none.
  void apply_splits(const SplitAssignment& splits);
  SplitAssignment splits() const;

 private:
  std::vector<NodeRecord> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::vector<std::size_t>> undirected_;
  std::vector<std::string> label_vocab_;
};

// nodes.jsonl, edges (.tsv "src<TAB>dst" or .jsonl {"src","dst"} / [src, dst])
// and labels.txt. Blank lines are skipped.
TextAttributedGraph load_graph(const std::filesystem::path& nodes_path,
                               const std::filesystem::path& edges_path,
                               const std::filesystem::path& labels_path,
                               LoadStats* stats = nullptr);

void write_graph(const TextAttributedGraph& graph, const std::filesystem::path& nodes_path,
                 const std::filesystem::path& edges_path,
                 const std::filesystem::path& labels_path);

}  // namespace tagbench
