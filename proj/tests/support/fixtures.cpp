#include "fixtures.hpp"

#include <algorithm>
#include <cstdlib>
#include <unistd.h>
#include <fstream>

#include <httplib.h>

#include <gtest/gtest.h>

#include "tagbench/error.hpp"
#include "tagbench/io.hpp"

namespace tagbench::testing {

namespace fs = std::filesystem;

fs::path data_dir() { return fs::path(TAGBENCH_TEST_SOURCE_DIR) / "data"; }
fs::path golden_dir() { return fs::path(TAGBENCH_TEST_SOURCE_DIR) / "golden"; }

bool update_golden() {
  const char* v = std::getenv("UPDATE_GOLDEN");
  return v != nullptr && std::string(v) == "1";
}

void expect_golden(const std::string& relative, const std::string& actual) {
  const fs::path path = golden_dir() / relative;
  if (update_golden()) {
    fs::create_directories(path.parent_path());
    write_file(path, actual);
    return;
  }
  if (!fs::exists(path)) {
    ADD_FAILURE() << "missing golden file " << path << " (regenerate with UPDATE_GOLDEN=1)";
    return;
  }
  EXPECT_EQ(read_file(path), actual) << "golden mismatch: " << relative;
}

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  Rng rng(derive_seed(static_cast<std::uint64_t>(::getpid()), counter.fetch_add(1)));
  char name[64];
  std::snprintf(name, sizeof name, "tagbench-test-%016llx",
                static_cast<unsigned long long>(rng.next()));
  path_ = fs::temp_directory_path() / name;
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

NodeRecord node(std::string id, std::string title, std::optional<std::size_t> label, Split split,
                std::optional<std::string> body) {
  NodeRecord n;
  n.id = std::move(id);
  n.title = std::move(title);
  n.label = label;
  n.split = split;
  n.body = std::move(body);
  return n;
}

TextAttributedGraph golden_graph(const std::vector<std::string>& vocab) {
  std::vector<NodeRecord> nodes{
      node("t", "Sparse attention for long documents", 0, Split::test,
           "We study sparse attention patterns that scale linearly with sequence length."),
      node("a", "Efficient transformers: a survey", 0, Split::train,
           "A survey of efficient transformer variants."),
      node("b", "Graph neural networks for citation analysis", 1, Split::validation,
           "Message passing over citation graphs."),
      node("c", "Memory-bounded sequence models", 0, Split::test,
           "Sequence models under a fixed memory budget."),
      node("d", "Kernel methods for attention", 2, Split::train,
           "Attention viewed as a kernel smoother."),
      node("e", "Linear recurrent units", 2, Split::train, "Recurrent layers with linear state."),
  };
  std::vector<IdEdge> edges{{"t", "a"}, {"b", "t"}, {"t", "c"},
                            {"a", "d"}, {"c", "e"}, {"a", "b"}};
  return TextAttributedGraph(std::move(nodes), edges, vocab);
}

EgoGraph golden_ego(const TextAttributedGraph& graph) {
  EgoGraph ego;
  ego.target = graph.node("t");
  for (const char* id : {"a", "b", "c"}) ego.hop1.push_back(graph.node(id));
  for (const char* id : {"d", "e"}) ego.hop2.push_back(graph.node(id));
  ego.intra_edges = induced_edges(graph, {"t", "a", "b", "c", "d", "e"});
  ego.seed = 0;
  return ego;
}

std::vector<FewShotExemplar> golden_exemplars(const std::vector<std::string>& vocab) {
  return {
      {"x1", "Attention is a kernel", std::string("Attention layers as kernel regression."),
       vocab.at(0)},
      {"x2", "Convolutions on graphs", std::string("Spectral filters on irregular domains."),
       vocab.at(1)},
  };
}

std::string random_word(Rng& rng, std::size_t max_len, std::string_view alphabet) {
  const std::size_t len = static_cast<std::size_t>(rng.uniform(max_len + 1));
  std::string out;
  for (std::size_t i = 0; i < len; ++i) out.push_back(alphabet[rng.uniform(alphabet.size())]);
  return out;
}

EgoGraph random_ego(Rng& rng, std::size_t max1, std::size_t max2, std::size_t classes) {
  EgoGraph ego;
  auto make = [&](std::string id) {
    return node(id, "paper " + id, static_cast<std::size_t>(rng.uniform(classes)),
                rng.uniform(4) == 0 ? Split::test : Split::train);
  };
  ego.target = make("t");
  const std::size_t n1 = static_cast<std::size_t>(rng.uniform(max1 + 1));
  const std::size_t n2 = n1 == 0 ? 0 : static_cast<std::size_t>(rng.uniform(max2 + 1));
  for (std::size_t i = 0; i < n1; ++i) {
    ego.hop1.push_back(make("h1_" + std::to_string(i)));
    if (rng.uniform(2) == 0) {
      ego.intra_edges.push_back({"t", ego.hop1.back().id});
    } else {
      ego.intra_edges.push_back({ego.hop1.back().id, "t"});
    }
  }
  for (std::size_t i = 0; i < n2; ++i) {
    ego.hop2.push_back(make("h2_" + std::to_string(i)));
    const std::size_t parents = 1 + static_cast<std::size_t>(rng.uniform(2));
    for (auto p : rng.sample_indices(n1, std::min(parents, n1))) {
      ego.intra_edges.push_back({ego.hop1[p].id, ego.hop2.back().id});
    }
  }
  if (n1 >= 2) {
    for (std::size_t k = rng.uniform(n1); k > 0; --k) {
      auto pair = rng.sample_indices(n1, 2);
      IdEdge e{ego.hop1[pair[0]].id, ego.hop1[pair[1]].id};
      if (std::find(ego.intra_edges.begin(), ego.intra_edges.end(), e) == ego.intra_edges.end()) {
        ego.intra_edges.push_back(e);
      }
    }
  }
  if (n2 >= 2 && rng.uniform(2) == 0) {
    auto pair = rng.sample_indices(n2, 2);
    ego.intra_edges.push_back({ego.hop2[pair[0]].id, ego.hop2[pair[1]].id});
  }
  ego.caps = HopCaps{max1, max2};
  ego.seed = rng.next();
  return ego;
}

namespace {

const char* kFiller[] = {"robust", "learning", "models", "analysis", "efficient", "towards",
                         "methods", "scalable", "study",  "networks", "structure", "inference"};

}  // namespace

KeywordMap synthetic_keywords(std::size_t classes) {
  KeywordMap map;
  for (std::size_t c = 0; c < classes; ++c) {
    const auto s = std::to_string(c);
    map["class_" + s] = {"kw" + s + "a", "kw" + s + "b"};
  }
  return map;
}

TextAttributedGraph synthetic_graph(const SyntheticSpec& spec) {
  Rng rng(derive_seed(spec.seed, "synthetic"));
  std::vector<std::string> vocab;
  for (std::size_t c = 0; c < spec.classes; ++c) vocab.push_back("class_" + std::to_string(c));

  std::vector<std::vector<std::size_t>> by_class(spec.classes);
  std::vector<NodeRecord> nodes;
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    const std::size_t c = i % spec.classes;
    by_class[c].push_back(i);
    std::string title;
    for (int w = 0; w < 4; ++w) {
      if (!title.empty()) title += ' ';
      title += kFiller[rng.uniform(std::size(kFiller))];
    }
    if (rng.uniform01() < spec.own_keyword_prob) {
      title += " kw" + std::to_string(c) + (rng.uniform(2) == 0 ? "a" : "b");
    }
    char id[32];
    std::snprintf(id, sizeof id, "n%04zu", i);
    nodes.push_back(node(id, title, c, Split::none, "Body: " + title));
  }
  std::vector<IdEdge> edges;
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    const std::size_t c = i % spec.classes;
    for (std::size_t k = 0; k < spec.degree; ++k) {
      std::size_t j;
      if (rng.uniform01() < spec.homophily) {
        j = by_class[c][rng.uniform(by_class[c].size())];
      } else {
        std::size_t other = (c + 1 + rng.uniform(spec.classes - 1)) % spec.classes;
        j = by_class[other][rng.uniform(by_class[other].size())];
      }
      if (j != i) edges.push_back({nodes[i].id, nodes[j].id});
    }
  }
  TextAttributedGraph graph(std::move(nodes), edges, vocab);
  graph.apply_splits(split_by_ratio(graph, spec.ratios, derive_seed(spec.seed, "split")));
  return graph;
}

DatasetSpec write_dataset(const TextAttributedGraph& graph, const fs::path& dir,
                          const std::string& profile) {
  fs::create_directories(dir);
  DatasetSpec spec;
  spec.nodes = dir / "nodes.jsonl";
  spec.edges = dir / "edges.tsv";
  spec.labels = dir / "labels.txt";
  spec.splits = dir / "splits.tsv";
  spec.profile = profile;
  write_graph(graph, spec.nodes, spec.edges, spec.labels);
  write_splits(graph.splits(), *spec.splits);
  return spec;
}

struct StubChatServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

StubChatServer::StubChatServer(Handler handler) : impl_(std::make_unique<Impl>()) {
  impl_->server.Post("/v1/chat/completions", [this, handler](const httplib::Request& req,
                                                             httplib::Response& res) {
    requests_.fetch_add(1);
    nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
    {
      std::lock_guard lock(mutex_);
      bodies_.push_back(body);
      authorizations_.push_back(req.get_header_value("Authorization"));
    }
    auto [status, text] = handler(body);
    res.status = status;
    if (status == 200) {
      nlohmann::json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}};
      res.set_content(reply.dump(), "application/json");
    } else {
      res.set_content(text, "text/plain");
    }
  });
  impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

StubChatServer::~StubChatServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string StubChatServer::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port) + "/v1/chat/completions";
}

std::vector<nlohmann::json> StubChatServer::bodies() const {
  std::lock_guard lock(mutex_);
  return bodies_;
}

std::vector<std::string> StubChatServer::authorizations() const {
  std::lock_guard lock(mutex_);
  return authorizations_;
}

std::optional<PaperStub> CountingResolver::lookup_by_id(const std::string& id) {
  if (lookups_.fetch_add(1) < failing_lookups) throw TransportError("scripted lookup failure");
  return inner_->lookup_by_id(id);
}

std::vector<PaperStub> CountingResolver::search_by_title(const std::string& title) {
  if (searches_.fetch_add(1) < failing_searches) throw TransportError("scripted search failure");
  return inner_->search_by_title(title);
}

}  // namespace tagbench::testing
