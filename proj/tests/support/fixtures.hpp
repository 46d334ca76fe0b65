#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagbench/citation.hpp"
#include "tagbench/config.hpp"
#include "tagbench/ego.hpp"
#include "tagbench/graph.hpp"
#include "tagbench/oracle.hpp"
#include "tagbench/prompt.hpp"
#include "tagbench/rng.hpp"
#include "tagbench/split.hpp"

namespace tagbench::testing {

std::filesystem::path data_dir();    // tests/data
std::filesystem::path golden_dir();  // tests/golden
bool update_golden();                // UPDATE_GOLDEN=1

// Compares text with golden_dir()/relative, or rewrites the file when
// UPDATE_GOLDEN=1. Adds a gtest failure on mismatch or a missing file.
void expect_golden(const std::string& relative, const std::string& actual);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

NodeRecord node(std::string id, std::string title, std::optional<std::size_t> label = std::nullopt,
                Split split = Split::train, std::optional<std::string> body = std::nullopt);

// Six-node citation fixture used by the golden prompts: target "t" (test
// split, with abstract), hop-1 {a, b, c}, hop-2 {d, e}. Labels index vocab
// by position, so any vocabulary with at least three entries works.
TextAttributedGraph golden_graph(const std::vector<std::string>& vocab);
EgoGraph golden_ego(const TextAttributedGraph& graph);
std::vector<FewShotExemplar> golden_exemplars(const std::vector<std::string>& vocab);

// Ego with a random shape: |hop1| in [0, max1], |hop2| in [0, max2] (zero
// when hop1 is empty), every hop-2 node attached to 1 or 2 hop-1 parents,
// plus random extra hop1-hop1 and hop2-hop2 edges. Labels in [0, classes).
EgoGraph random_ego(Rng& rng, std::size_t max1 = 20, std::size_t max2 = 5,
                    std::size_t classes = 4);

// Random ASCII string over a small alphabet (so edits collide often).
std::string random_word(Rng& rng, std::size_t max_len, std::string_view alphabet = "abcde ");

struct SyntheticSpec {
  std::size_t nodes = 400;
  std::size_t classes = 4;
  std::size_t degree = 8;            // out-edges drawn per node
  double homophily = 0.8;            // probability an edge stays within the class
  double own_keyword_prob = 0.25;    // chance a title names its own class keyword
  SplitRatios ratios{0.6, 0.2, 0.2};
  std::uint64_t seed = 1;
};

// Class c is named "class_<c>" with keywords "kw<c>a" and "kw<c>b". Titles
// are filler words plus, with own_keyword_prob, one of the node's own class
// keywords; bodies repeat the title.
TextAttributedGraph synthetic_graph(const SyntheticSpec& spec);
KeywordMap synthetic_keywords(std::size_t classes);

// Writes nodes.jsonl, edges.tsv, labels.txt and splits.tsv under dir.
DatasetSpec write_dataset(const TextAttributedGraph& graph, const std::filesystem::path& dir,
                          const std::string& profile = "cora");

// Minimal chat-completions endpoint on 127.0.0.1. The handler returns
// (status, text); status 200 wraps text as the assistant message, any other
// status sends text as the raw body.
class StubChatServer {
 public:
  using Handler = std::function<std::pair<int, std::string>(const nlohmann::json& request)>;
  explicit StubChatServer(Handler handler);
  ~StubChatServer();

  std::string endpoint() const;
  std::size_t requests() const { return requests_.load(); }
  std::vector<nlohmann::json> bodies() const;
  std::vector<std::string> authorizations() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<std::size_t> requests_{0};
  mutable std::mutex mutex_;
  std::vector<nlohmann::json> bodies_;
  std::vector<std::string> authorizations_;
};

// Predictor backed by a callable; counts calls.
class FunctionPredictor : public Predictor {
 public:
  using Fn = std::function<std::string(const PredictorRequest&)>;
  explicit FunctionPredictor(Fn fn) : fn_(std::move(fn)) {}
  RawResponse complete(const PredictorRequest& request) override {
    calls_.fetch_add(1);
    return {fn_(request), ResponseOrigin::live, std::nullopt};
  }
  std::size_t calls() const { return calls_.load(); }

 private:
  Fn fn_;
  std::atomic<std::size_t> calls_{0};
};

// Counts calls; optionally fails the first `failures` calls of each kind.
class CountingResolver : public ReferenceResolver {
 public:
  explicit CountingResolver(std::shared_ptr<ReferenceResolver> inner) : inner_(std::move(inner)) {}
  std::optional<PaperStub> lookup_by_id(const std::string& id) override;
  std::vector<PaperStub> search_by_title(const std::string& title) override;

  std::size_t lookups() const { return lookups_.load(); }
  std::size_t searches() const { return searches_.load(); }
  std::size_t failing_searches = 0;  // set before use
  std::size_t failing_lookups = 0;

 private:
  std::shared_ptr<ReferenceResolver> inner_;
  std::atomic<std::size_t> lookups_{0};
  std::atomic<std::size_t> searches_{0};
};

}  // namespace tagbench::testing
