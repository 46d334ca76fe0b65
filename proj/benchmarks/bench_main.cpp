#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "tagbench/ego.hpp"
#include "tagbench/mpnn.hpp"
#include "tagbench/profile.hpp"
#include "tagbench/prompt.hpp"
#include "tagbench/rng.hpp"
#include "tagbench/text.hpp"

namespace {

using namespace tagbench;

// Random citation-like graph with ogbn-arxiv labels; degree ~2 * out_degree.
TextAttributedGraph random_graph(std::size_t n, std::size_t out_degree) {
  const auto& vocab = ProfileRegistry::builtin().get("ogbn-arxiv").label_vocab;
  Rng rng(7);
  std::vector<NodeRecord> nodes;
  std::vector<IdEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    NodeRecord r;
    r.id = "n" + std::to_string(i);
    r.title = "A study of graph number " + std::to_string(i) + " under message passing";
    r.body = "We consider the problem posed by node " + std::to_string(i) + ".";
    r.label = rng.uniform(vocab.size());
    r.split = rng.uniform01() < 0.6 ? Split::train : Split::test;
    nodes.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < out_degree; ++k) {
      const auto j = rng.uniform(n);
      if (j != i) edges.push_back({"n" + std::to_string(i), "n" + std::to_string(j)});
    }
  }
  return TextAttributedGraph(std::move(nodes), edges, vocab);
}

void BM_EgoExtraction(benchmark::State& state) {
  const auto graph = random_graph(static_cast<std::size_t>(state.range(0)), 8);
  std::size_t i = 0;
  for (auto _ : state) {
    auto ego = extract_ego_graph(graph, graph.node(i % graph.size()).id, HopCaps{}, i);
    benchmark::DoNotOptimize(ego);
    ++i;
  }
}
BENCHMARK(BM_EgoExtraction)->Arg(1000)->Arg(20000);

void BM_RenderKhopTitle(benchmark::State& state) {
  const auto graph = random_graph(2000, 8);
  const auto& profile = ProfileRegistry::builtin().get("ogbn-arxiv");
  const auto ego = extract_ego_graph(graph, "n0", HopCaps{}, 0);
  PromptStyle style{StyleKind::khop_title_label};
  style.hops = 2;
  for (auto _ : state) {
    auto bundle = render_prompt(ego, style, profile, TextContext::rich);
    benchmark::DoNotOptimize(bundle);
  }
}
BENCHMARK(BM_RenderKhopTitle);

void BM_NormalizedLevenshtein(benchmark::State& state) {
  const std::string a = "Graph neural networks for citation analysis at scale";
  const std::string b = "Graph Neural Network for Citation-Analysis at Scale.";
  for (auto _ : state) benchmark::DoNotOptimize(normalized_levenshtein(a, b));
}
BENCHMARK(BM_NormalizedLevenshtein);

void BM_GcnForward(benchmark::State& state) {
  const auto graph = random_graph(static_cast<std::size_t>(state.range(0)), 8);
  const Matrix x = featurize(graph, 128, 0);
  const auto params = init_params(ModelKind::gcn, 128, 64, graph.label_vocab().size(), 2, 0);
  const auto op = gcn_operator(graph);
  for (auto _ : state) {
    Matrix out = forward(params, op, x);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_GcnForward)->Arg(1000)->Arg(10000);

}  // namespace
BENCHMARK_MAIN();
