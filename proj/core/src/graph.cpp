#include "tagbench/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "tagbench/error.hpp"
#include "tagbench/io.hpp"

namespace tagbench {

using nlohmann::json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::validation:
      return "validation";
    case Split::test:
      return "test";
    case Split::none:
      break;
  }
  return "none";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "validation" || text == "val") return Split::validation;
  if (text == "test") return Split::test;
  if (text == "none") return Split::none;
  throw ArgumentError("unknown split '" + std::string(text) + "'");
}

TextAttributedGraph::TextAttributedGraph(std::vector<NodeRecord> nodes,
                                         const std::vector<IdEdge>& edges,
                                         std::vector<std::string> label_vocab, LoadStats* stats)
    : nodes_(std::move(nodes)), label_vocab_(std::move(label_vocab)) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.title.empty()) throw SchemaError("node '" + n.id + "' has an empty title");
    if (n.label && *n.label >= label_vocab_.size()) {
      throw SchemaError("node '" + n.id + "' label index out of range");
    }
    if (!index_.emplace(n.id, i).second) throw SchemaError("duplicate node id '" + n.id + "'");
  }

  LoadStats local;
  std::set<Edge> seen;
  edges_.reserve(edges.size());
  for (const auto& e : edges) {
    auto s = find(e.source);
    auto t = find(e.target);
    if (!s) throw SchemaError("edge endpoint '" + e.source + "' is not a node");
    if (!t) throw SchemaError("edge endpoint '" + e.target + "' is not a node");
    if (*s == *t) {
      ++local.self_loops_removed;
      continue;
    }
    Edge edge{*s, *t};
    if (!seen.insert(edge).second) {
      ++local.duplicates_removed;
      continue;
    }
    edges_.push_back(edge);
  }
  if (stats) *stats = local;

  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  undirected_.assign(nodes_.size(), {});
  for (const auto& e : edges_) {
    out_[e.source].push_back(e.target);
    in_[e.target].push_back(e.source);
    undirected_[e.source].push_back(e.target);
    undirected_[e.target].push_back(e.source);
  }
  auto tidy = [](std::vector<std::size_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    tidy(out_[v]);
    tidy(in_[v]);
    tidy(undirected_[v]);
  }
}

std::optional<std::size_t> TextAttributedGraph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t TextAttributedGraph::index_of(std::string_view id) const {
  auto found = find(id);
  if (!found) throw LookupError("unknown node '" + std::string(id) + "'");
  return *found;
}

bool TextAttributedGraph::has_edge(std::size_t source, std::size_t target) const {
  const auto& out = out_[source];
  return std::binary_search(out.begin(), out.end(), target);
}

std::optional<std::size_t> TextAttributedGraph::label_index(std::string_view name) const {
  for (std::size_t i = 0; i < label_vocab_.size(); ++i) {
    if (label_vocab_[i] == name) return i;
  }
  return std::nullopt;
}

void TextAttributedGraph::apply_splits(const SplitAssignment& splits) {
  for (auto& n : nodes_) {
    auto it = splits.find(n.id);
    n.split = it == splits.end() ? Split::none : it->second;
  }
}

SplitAssignment TextAttributedGraph::splits() const {
  SplitAssignment out;
  for (const auto& n : nodes_) out.emplace(n.id, n.split);
  return out;
}

namespace {

std::vector<std::string> read_labels(const std::filesystem::path& path) {
  std::vector<std::string> vocab;
  for_each_line(path, [&](std::string_view line, std::size_t number) {
    if (line.empty()) return;
    if (std::find(vocab.begin(), vocab.end(), line) != vocab.end()) {
      throw ParseError(path.string(), number, "duplicate label '" + std::string(line) + "'");
    }
    vocab.emplace_back(line);
  });
  return vocab;
}

IdEdge parse_edge_line(std::string_view line, const std::string& source, std::size_t number) {
  if (line.front() == '{' || line.front() == '[') {
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(source, number, e.what());
    }
    if (j.is_array() && j.size() == 2 && j[0].is_string() && j[1].is_string()) {
      return {j[0].get<std::string>(), j[1].get<std::string>()};
    }
    if (j.is_object() && j.contains("src") && j.contains("dst") && j["src"].is_string() &&
        j["dst"].is_string()) {
      return {j["src"].get<std::string>(), j["dst"].get<std::string>()};
    }
    throw ParseError(source, number, "expected {\"src\":..., \"dst\":...} or [src, dst]");
  }
  auto tab = line.find('\t');
  if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
    throw ParseError(source, number, "expected exactly two tab-separated fields");
  }
  return {std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))};
}

}  // namespace

TextAttributedGraph load_graph(const std::filesystem::path& nodes_path,
                               const std::filesystem::path& edges_path,
                               const std::filesystem::path& labels_path, LoadStats* stats) {
  std::vector<std::string> vocab = read_labels(labels_path);

  std::vector<NodeRecord> nodes;
  const std::string nodes_source = nodes_path.string();
  for_each_line(nodes_path, [&](std::string_view line, std::size_t number) {
    if (line.find_first_not_of(" \t") == std::string_view::npos) return;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(nodes_source, number, e.what());
    }
    if (!j.is_object()) throw ParseError(nodes_source, number, "expected a JSON object");
    auto field = [&](const char* key) -> const json* {
      auto it = j.find(key);
      return it == j.end() || it->is_null() ? nullptr : &*it;
    };
    NodeRecord n;
    const json* id = field("id");
    const json* title = field("title");
    if (!id || !id->is_string()) throw ParseError(nodes_source, number, "missing string 'id'");
    if (!title || !title->is_string()) {
      throw ParseError(nodes_source, number, "missing string 'title'");
    }
    n.id = id->get<std::string>();
    n.title = title->get<std::string>();
    if (const json* body = field("body")) {
      if (!body->is_string()) throw ParseError(nodes_source, number, "'body' must be a string");
      n.body = body->get<std::string>();
    }
    if (const json* year = field("year")) {
      if (!year->is_number_integer()) {
        throw ParseError(nodes_source, number, "'year' must be an integer");
      }
      n.year = year->get<int>();
    }
    if (const json* label = field("label")) {
      if (!label->is_string()) throw ParseError(nodes_source, number, "'label' must be a string");
      const auto name = label->get<std::string>();
      auto it = std::find(vocab.begin(), vocab.end(), name);
      if (it == vocab.end()) {
        throw SchemaError(nodes_source + ":" + std::to_string(number) + ": unknown label '" +
                          name + "'");
      }
      n.label = static_cast<std::size_t>(it - vocab.begin());
    }
    if (const json* split = field("split")) {
      if (!split->is_string()) throw ParseError(nodes_source, number, "'split' must be a string");
      try {
        n.split = parse_split(split->get<std::string>());
      } catch (const ArgumentError& e) {
        throw ParseError(nodes_source, number, e.what());
      }
    }
    nodes.push_back(std::move(n));
  });

  std::vector<IdEdge> edges;
  const std::string edges_source = edges_path.string();
  for_each_line(edges_path, [&](std::string_view line, std::size_t number) {
    if (line.find_first_not_of(" \t") == std::string_view::npos) return;
    edges.push_back(parse_edge_line(line, edges_source, number));
  });

  return TextAttributedGraph(std::move(nodes), edges, std::move(vocab), stats);
}

void write_graph(const TextAttributedGraph& graph, const std::filesystem::path& nodes_path,
                 const std::filesystem::path& edges_path,
                 const std::filesystem::path& labels_path) {
  std::string nodes;
  for (const auto& n : graph.nodes()) {
    json j = {{"id", n.id},
              {"title", n.title},
              {"body", n.body ? json(*n.body) : json(nullptr)},
              {"label", n.label ? json(graph.label_vocab()[*n.label]) : json(nullptr)},
              {"year", n.year ? json(*n.year) : json(nullptr)}};
    nodes += j.dump() + "\n";
  }
  std::string edges;
  for (const auto& e : graph.edges()) {
    edges += graph.node(e.source).id + "\t" + graph.node(e.target).id + "\n";
  }
  std::string labels;
  for (const auto& l : graph.label_vocab()) labels += l + "\n";
  write_file(nodes_path, nodes);
  write_file(edges_path, edges);
  write_file(labels_path, labels);
}

}  // namespace tagbench
