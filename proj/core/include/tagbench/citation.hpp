#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tagbench/backend.hpp"
#include "tagbench/graph.hpp"

namespace tagbench {

struct PaperStub {
  // New style "2301.01234" or old style "cs/9901001", without version.
  std::optional<std::string> arxiv_id;
  std::string title;
  int year = 0;
  std::vector<std::string> raw_references;
  std::optional<std::string> label;  // category name, when the corpus has one

  // arxiv_id when present, otherwise "title:" + a hash of the normalized title.
  std::string node_id() const;
};

// Every arXiv identifier in text, versions stripped, deduplicated in order of
// first occurrence.
std::vector<std::string> extract_arxiv_ids(std::string_view text);

bool is_normalized_arxiv_id(std::string_view id);

struct MatchPolicy {
  double threshold = 0.15;  // normalized edit distance, in (0, 1)
};

// normalized_levenshtein(found, searched) <= threshold.
bool title_match(std::string_view found, std::string_view searched, const MatchPolicy& policy);

// Thread-safe lookup service. Both calls throw TransportError on failure.
class ReferenceResolver {
 public:
  virtual ~ReferenceResolver() = default;
  virtual std::optional<PaperStub> lookup_by_id(const std::string& id) = 0;
  // Candidates, best first.
  virtual std::vector<PaperStub> search_by_title(const std::string& title) = 0;
};

// Offline resolver over a JSONL corpus
//   {"id": str|null, "title": str, "year": int, "refs": [str, ...], "label": str?}
// Title search ranks corpus entries by normalized edit distance and returns
// the closest max_candidates.
class ScriptedResolver : public ReferenceResolver {
 public:
  explicit ScriptedResolver(std::vector<PaperStub> corpus, std::size_t max_candidates = 5);
  // Throws ParseError.
  static ScriptedResolver from_file(const std::filesystem::path& path);

  std::optional<PaperStub> lookup_by_id(const std::string& id) override;
  std::vector<PaperStub> search_by_title(const std::string& title) override;

  const std::vector<PaperStub>& corpus() const { return corpus_; }

 private:
  std::vector<PaperStub> corpus_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::size_t max_candidates_;
};

std::vector<PaperStub> read_corpus(const std::filesystem::path& path);

struct HttpResolverConfig {
  // Base URL plus path templates; "{id}" and "{query}" are URL-encoded.
  std::string base_url;
  std::string id_path = "/papers/{id}";
  std::string search_path = "/search?title={query}";
  std::chrono::milliseconds timeout{30'000};
};

// Expects a JSON paper object ({"id", "title", "year", "refs"}) from the id
// path (404 means unknown) and a JSON array of them from the search path.
class HttpResolver : public ReferenceResolver {
 public:
  explicit HttpResolver(HttpResolverConfig config);
  std::optional<PaperStub> lookup_by_id(const std::string& id) override;
  std::vector<PaperStub> search_by_title(const std::string& title) override;

 private:
  std::string get(const std::string& path, bool allow_not_found, bool* not_found);

  HttpResolverConfig config_;
};

// Token bucket shared by both calls, plus a bound on concurrent calls.
class RateLimitedResolver : public ReferenceResolver {
 public:
  RateLimitedResolver(std::shared_ptr<ReferenceResolver> inner, double requests_per_second,
                      std::size_t burst, std::size_t max_concurrent);

  std::optional<PaperStub> lookup_by_id(const std::string& id) override;
  std::vector<PaperStub> search_by_title(const std::string& title) override;

 private:
  void take_token();

  std::shared_ptr<ReferenceResolver> inner_;
  double rate_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mutex_;
  CountingSemaphore concurrent_;
};

struct BuildOptions {
  int hops = 2;                 // 1 or 2
  std::size_t search_budget = 30;  // title searches per paper, every attempt counted
  int transport_attempts = 3;      // per resolver call
  // Papers from before this year must match a prior_graph node by title
  // (and take its id) or are excluded. Ignored without a prior graph.
  std::optional<int> cutoff_year;
  std::size_t max_parallel = 4;
};

struct BuildReport {
  std::map<std::string, std::size_t> searches_per_paper;
  std::size_t id_matches = 0;
  std::size_t title_matches = 0;
  std::size_t unresolved = 0;          // no id hit and no acceptable title candidate
  std::size_t transport_failures = 0;  // calls that failed every attempt
  std::size_t budget_skipped = 0;      // references left when the budget ran out
  std::size_t excluded_pre_cutoff = 0;
};

// Node labels come from stub labels; the vocabulary is the prior graph's
// followed by any new label names in ascending order.
// Seeds and their references resolved by id, then by title for references
// without a matched id; hop-1 references by id only. The outermost layer
// contributes edges to nodes already in the graph but no new nodes, so every
// node lies within `hops` citation steps of a seed. Deterministic for
// deterministic resolvers. Throws ArgumentError for hops outside {1, 2}.
TextAttributedGraph build_citation_graph(const std::vector<PaperStub>& seeds,
                                         ReferenceResolver& resolver, const MatchPolicy& policy,
                                         const BuildOptions& options,
                                         const TextAttributedGraph* prior_graph = nullptr,
                                         BuildReport* report = nullptr);

// Uniform seeded sample of n papers with year >= min_year, in draw order.
// Throws ArgumentError when fewer qualify.
std::vector<PaperStub> sample_seeds(const std::vector<PaperStub>& corpus, int min_year,
                                    std::size_t n, std::uint64_t seed);

}  // namespace tagbench
