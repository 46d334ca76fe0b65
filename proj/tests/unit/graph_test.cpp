#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"
#include "tagbench/error.hpp"
#include "tagbench/graph.hpp"
#include "tagbench/io.hpp"
#include "tagbench/split.hpp"

namespace tagbench {
namespace {

using testing::node;
using testing::TempDir;

struct Files {
  TempDir dir;
  std::filesystem::path nodes = dir / "nodes.jsonl";
  std::filesystem::path edges = dir / "edges.tsv";
  std::filesystem::path labels = dir / "labels.txt";

  Files(const std::string& n, const std::string& e, const std::string& l = "X\nY\n") {
    write_file(nodes, n);
    write_file(edges, e);
    write_file(labels, l);
  }
};

const char* kToyNodes =
    R"({"id": "a", "title": "A", "body": null, "label": "X", "year": 2018})"
    "\n"
    R"({"id": "b", "title": "B", "body": "bb", "label": "Y", "year": null})"
    "\n\n"
    R"({"id": "c", "title": "C", "label": null})"
    "\n";

TEST(LoadGraph, ToyFixture) {
  Files f(kToyNodes, "a\tb\nb\tc\n");
  LoadStats stats;
  auto g = load_graph(f.nodes, f.edges, f.labels, &stats);
  EXPECT_EQ(g.size(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(stats.self_loops_removed, 0u);
  EXPECT_EQ(g.node("a").label, 0u);
  EXPECT_EQ(g.node("a").year, 2018);
  EXPECT_EQ(g.node("b").body, "bb");
  EXPECT_FALSE(g.node("c").label);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_FALSE(g.has_edge(1, 0));
  EXPECT_EQ(g.label_vocab(), (std::vector<std::string>{"X", "Y"}));
}

TEST(LoadGraph, RemovesSelfLoopsAndDuplicates) {
  Files f(kToyNodes, "a\ta\na\tb\na\tb\nb\tc\n");
  LoadStats stats;
  auto g = load_graph(f.nodes, f.edges, f.labels, &stats);
  EXPECT_EQ(stats.self_loops_removed, 1u);
  EXPECT_EQ(stats.duplicates_removed, 1u);
  EXPECT_EQ(g.edge_count(), 2u);
}

TEST(LoadGraph, JsonlEdges) {
  TempDir dir;
  write_file(dir / "n.jsonl", kToyNodes);
  write_file(dir / "e.jsonl", "{\"src\": \"a\", \"dst\": \"b\"}\n[\"b\", \"c\"]\n");
  write_file(dir / "l.txt", "X\nY\n");
  auto g = load_graph(dir / "n.jsonl", dir / "e.jsonl", dir / "l.txt");
  EXPECT_EQ(g.edge_count(), 2u);
}

TEST(LoadGraph, MalformedLineReportsLineNumber) {
  Files f(std::string(kToyNodes) + "{not json\n", "");
  try {
    load_graph(f.nodes, f.edges, f.labels);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
  Files g(kToyNodes, "a\tb\na b c\n");
  try {
    load_graph(g.nodes, g.edges, g.labels);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadGraph, UnknownLabelIsSchemaError) {
  Files f(R"({"id": "a", "title": "A", "label": "Z"})" "\n", "");
  EXPECT_THROW(load_graph(f.nodes, f.edges, f.labels), SchemaError);
}

TEST(LoadGraph, DanglingEndpointIsSchemaError) {
  Files f(kToyNodes, "a\tq\n");
  EXPECT_THROW(load_graph(f.nodes, f.edges, f.labels), SchemaError);
}

TEST(LoadGraph, MissingTitleIsRejected) {
  Files f(R"({"id": "a", "title": ""})" "\n", "");
  EXPECT_THROW(load_graph(f.nodes, f.edges, f.labels), SchemaError);
}

TEST(Graph, ConstructorValidates) {
  EXPECT_THROW(TextAttributedGraph({node("a", "A"), node("a", "B")}, {}, {}), SchemaError);
  EXPECT_THROW(TextAttributedGraph({node("a", "A", 3)}, {}, {"X"}), SchemaError);
  EXPECT_THROW(TextAttributedGraph({node("a", "")}, {}, {}), SchemaError);
}

TEST(Graph, NeighborsAreUndirectedUnion) {
  TextAttributedGraph g({node("a", "A"), node("b", "B"), node("c", "C"), node("d", "D")},
                        {{"a", "b"}, {"c", "a"}, {"b", "a"}}, {});
  auto n = g.neighbors(0);
  EXPECT_EQ(std::vector<std::size_t>(n.begin(), n.end()), (std::vector<std::size_t>{1, 2}));
  EXPECT_TRUE(g.neighbors(3).empty());
  EXPECT_THROW(g.index_of("zz"), LookupError);
  EXPECT_FALSE(g.find("zz"));
}

TEST(Graph, WriteThenLoadRoundTrips) {
  auto g = testing::golden_graph({"X", "Y", "Z"});
  TempDir dir;
  write_graph(g, dir / "n.jsonl", dir / "e.tsv", dir / "l.txt");
  auto h = load_graph(dir / "n.jsonl", dir / "e.tsv", dir / "l.txt");
  ASSERT_EQ(h.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(h.node(i).id, g.node(i).id);
    EXPECT_EQ(h.node(i).title, g.node(i).title);
    EXPECT_EQ(h.node(i).body, g.node(i).body);
    EXPECT_EQ(h.node(i).label, g.node(i).label);
  }
  EXPECT_EQ(std::vector<Edge>(h.edges().begin(), h.edges().end()),
            std::vector<Edge>(g.edges().begin(), g.edges().end()));
}

TEST(Split, ParseAndPrint) {
  EXPECT_EQ(parse_split("val"), Split::validation);
  EXPECT_EQ(parse_split("validation"), Split::validation);
  EXPECT_EQ(to_string(Split::test), "test");
  EXPECT_THROW(parse_split("dev"), ArgumentError);
}

// The arxiv-2023 export is not shipped; point TAGBENCH_ARXIV2023_DIR at a
// directory holding nodes.jsonl, edges.tsv and labels.txt to run this.
TEST(LoadGraph, Arxiv2023ExportCounts) {
  const char* dir = std::getenv("TAGBENCH_ARXIV2023_DIR");
  if (dir == nullptr) GTEST_SKIP() << "TAGBENCH_ARXIV2023_DIR not set";
  std::filesystem::path d(dir);
  auto g = load_graph(d / "nodes.jsonl", d / "edges.tsv", d / "labels.txt");
  EXPECT_EQ(g.size(), 33868u);
  EXPECT_EQ(g.edge_count(), 305672u);
}

}  // namespace
}  // namespace tagbench
