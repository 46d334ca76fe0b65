#include "tagbench/citation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "tagbench/error.hpp"
#include "tagbench/rng.hpp"
#include "tagbench/text.hpp"

namespace tagbench {

std::string PaperStub::node_id() const {
  if (arxiv_id) return *arxiv_id;
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(normalize_title(title))));
  return std::string("title:") + buf;
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_alpha(char c) { return is_lower(c) || (c >= 'A' && c <= 'Z'); }

std::size_t count_digits(std::string_view s, std::size_t from) {
  std::size_t n = 0;
  while (from + n < s.size() && is_digit(s[from + n])) ++n;
  return n;
}

// Skips a "v<digits>" version suffix starting at pos.
std::size_t skip_version(std::string_view s, std::size_t pos) {
  if (pos < s.size() && s[pos] == 'v') {
    const std::size_t d = count_digits(s, pos + 1);
    if (d > 0) return pos + 1 + d;
  }
  return pos;
}

// New style at i: 4 digits, '.', 4-5 digits, not embedded in a longer number.
std::optional<std::pair<std::string, std::size_t>> new_style_at(std::string_view s, std::size_t i) {
  if (i > 0 && (is_digit(s[i - 1]) || s[i - 1] == '.')) return std::nullopt;
  if (count_digits(s, i) != 4 || i + 4 >= s.size() || s[i + 4] != '.') return std::nullopt;
  const std::size_t tail = count_digits(s, i + 5);
  if (tail < 4 || tail > 5) return std::nullopt;
  std::size_t end = i + 5 + tail;
  return std::pair{std::string(s.substr(i, end - i)), skip_version(s, end)};
}

// Old style with the '/' at slash: archive[.XX]/7 digits.
std::optional<std::pair<std::string, std::size_t>> old_style_at(std::string_view s,
                                                                std::size_t slash,
                                                                std::size_t* start) {
  if (count_digits(s, slash + 1) != 7) return std::nullopt;
  std::size_t b = slash;
  // optional ".XX" subject class
  if (b >= 3 && s[b - 3] == '.' && is_alpha(s[b - 2]) && is_alpha(s[b - 1])) b -= 3;
  std::size_t a = b;
  while (a > 0 && (is_lower(s[a - 1]) || s[a - 1] == '-')) --a;
  if (a == b || s[a] == '-') return std::nullopt;
  if (a > 0 && (is_alpha(s[a - 1]) || is_digit(s[a - 1]))) return std::nullopt;
  const std::size_t end = slash + 8;
  *start = a;
  return std::pair{std::string(s.substr(a, end - a)), skip_version(s, end)};
}

}  // namespace

std::vector<std::string> extract_arxiv_ids(std::string_view text) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  auto emit = [&](std::string id) {
    if (seen.insert(id).second) out.push_back(std::move(id));
  };
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_digit(text[i])) {
      if (auto m = new_style_at(text, i)) {
        emit(m->first);
        i = m->second;
        continue;
      }
      i += std::max<std::size_t>(1, count_digits(text, i));
      continue;
    }
    if (is_lower(text[i])) {
      std::size_t j = i;
      while (j < text.size() && (is_alpha(text[j]) || text[j] == '-' || text[j] == '.')) ++j;
      if (j < text.size() && text[j] == '/') {
        std::size_t start = 0;
        if (auto m = old_style_at(text, j, &start); m && start >= i) {
          emit(m->first);
          i = m->second;
          continue;
        }
      }
      i = j;
      continue;
    }
    ++i;
  }
  return out;
}

bool is_normalized_arxiv_id(std::string_view id) {
  const auto ids = extract_arxiv_ids(id);
  return ids.size() == 1 && ids.front() == id;
}

bool title_match(std::string_view found, std::string_view searched, const MatchPolicy& policy) {
  return normalized_levenshtein(found, searched) <= policy.threshold;
}

std::vector<PaperStub> sample_seeds(const std::vector<PaperStub>& corpus, int min_year,
                                    std::size_t n, std::uint64_t seed) {
  std::vector<const PaperStub*> eligible;
  for (const auto& p : corpus) {
    if (p.year >= min_year) eligible.push_back(&p);
  }
  if (eligible.size() < n) {
    throw ArgumentError("only " + std::to_string(eligible.size()) + " papers from " +
                        std::to_string(min_year) + " on, " + std::to_string(n) + " requested");
  }
  Rng rng(derive_seed(seed, "seeds"));
  std::vector<PaperStub> out;
  for (auto i : rng.sample_indices(eligible.size(), n)) out.push_back(*eligible[i]);
  return out;
}

namespace {

struct PaperOutcome {
  std::vector<PaperStub> cited;  // reference order, deduplicated by node id
  std::size_t searches = 0;
  std::size_t id_matches = 0;
  std::size_t title_matches = 0;
  std::size_t unresolved = 0;
  std::size_t transport_failures = 0;
  std::size_t budget_skipped = 0;
};

template <class Fn>
auto with_retries(int attempts, Fn&& fn, bool* failed) -> decltype(fn()) {
  for (int a = 1;; ++a) {
    try {
      return fn();
    } catch (const TransportError&) {
      if (a >= attempts) {
        *failed = true;
        return {};
      }
    }
  }
}

PaperOutcome resolve_references(const PaperStub& paper, ReferenceResolver& resolver,
                                const MatchPolicy& policy, const BuildOptions& options,
                                bool allow_title_search) {
  PaperOutcome out;
  std::unordered_set<std::string> cited_ids;
  auto add = [&](PaperStub stub) {
    if (cited_ids.insert(stub.node_id()).second) out.cited.push_back(std::move(stub));
  };

  std::vector<std::optional<PaperStub>> matched(paper.raw_references.size());
  std::vector<bool> id_failed(paper.raw_references.size(), false);
  for (std::size_t r = 0; r < paper.raw_references.size(); ++r) {
    for (const auto& id : extract_arxiv_ids(paper.raw_references[r])) {
      bool failed = false;
      auto hit = with_retries(
          options.transport_attempts, [&] { return resolver.lookup_by_id(id); }, &failed);
      if (failed) {
        ++out.transport_failures;
        id_failed[r] = true;
      }
      if (hit) {
        matched[r] = std::move(*hit);
        ++out.id_matches;
        break;
      }
    }
  }

  for (std::size_t r = 0; r < paper.raw_references.size(); ++r) {
    if (matched[r]) continue;
    const auto& ref = paper.raw_references[r];
    if (!allow_title_search) {
      ++out.unresolved;
      continue;
    }
    // A title-only reference to a paper already matched by id needs no search.
    const PaperStub* known = nullptr;
    for (const auto& m : matched) {
      if (m && title_match(m->title, ref, policy)) {
        known = &*m;
        break;
      }
    }
    if (known) {
      matched[r] = *known;
      continue;
    }
    bool resolved = false;
    bool exhausted = false;
    for (int a = 1; a <= options.transport_attempts; ++a) {
      if (out.searches >= options.search_budget) {
        exhausted = true;
        break;
      }
      ++out.searches;
      try {
        for (auto& candidate : resolver.search_by_title(ref)) {
          if (title_match(candidate.title, ref, policy)) {
            matched[r] = std::move(candidate);
            resolved = true;
            break;
          }
        }
        break;
      } catch (const TransportError&) {
        if (a == options.transport_attempts) ++out.transport_failures;
      }
    }
    if (exhausted) {
      out.budget_skipped += 1;
      for (std::size_t rest = r + 1; rest < paper.raw_references.size(); ++rest) {
        if (!matched[rest]) ++out.budget_skipped;
      }
      break;
    }
    if (resolved) {
      ++out.title_matches;
    } else {
      ++out.unresolved;
    }
  }
  for (auto& m : matched) {
    if (m) add(std::move(*m));
  }
  return out;
}

// Runs fn(i) for i in [0, n) on up to `parallel` threads.
template <class Fn>
void parallel_for(std::size_t n, std::size_t parallel, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(parallel, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

class GraphAssembler {
 public:
  GraphAssembler(const MatchPolicy& policy, const BuildOptions& options,
                 const TextAttributedGraph* prior, BuildReport& report)
      : policy_(policy), options_(options), prior_(prior), report_(report) {
    if (prior_) {
      for (std::size_t i = 0; i < prior_->size(); ++i) {
        prior_titles_.emplace(normalize_title(prior_->node(i).title), i);
      }
    }
  }

  // Final node id for a stub, adding the node when new; nullopt when the
  // stub is a pre-cutoff paper without a counterpart in the prior graph.
  std::optional<std::string> admit(const PaperStub& stub, bool is_seed, bool* added) {
    *added = false;
    const auto key = stub.node_id();
    if (auto it = alias_.find(key); it != alias_.end()) return it->second;

    std::optional<std::string> id;
    NodeRecord node;
    if (!is_seed && prior_ && options_.cutoff_year && stub.year < *options_.cutoff_year) {
      if (auto match = prior_match(stub.title)) {
        node = prior_->node(*match);
        id = node.id;
      } else {
        ++report_.excluded_pre_cutoff;
      }
    } else {
      node.id = key;
      node.title = stub.title;
      if (stub.year) node.year = stub.year;
      if (stub.label) pending_labels_.emplace(key, *stub.label);
      id = key;
    }
    alias_.emplace(key, id);
    if (id && index_.emplace(*id, nodes_.size()).second) {
      nodes_.push_back(std::move(node));
      *added = true;
    }
    return id;
  }

  std::optional<std::string> known(const std::string& stub_key) const {
    auto it = alias_.find(stub_key);
    return it == alias_.end() ? std::nullopt : it->second;
  }

  void add_edge(const std::string& from, const std::string& to) { edges_.push_back({from, to}); }

  TextAttributedGraph finish() {
    std::vector<std::string> vocab = prior_ ? prior_->label_vocab() : std::vector<std::string>{};
    std::set<std::string> fresh;
    for (const auto& [_, name] : pending_labels_) {
      if (std::find(vocab.begin(), vocab.end(), name) == vocab.end()) fresh.insert(name);
    }
    vocab.insert(vocab.end(), fresh.begin(), fresh.end());
    for (auto& node : nodes_) {
      auto it = pending_labels_.find(node.id);
      if (it == pending_labels_.end()) continue;
      node.label = static_cast<std::size_t>(
          std::find(vocab.begin(), vocab.end(), it->second) - vocab.begin());
    }
    return TextAttributedGraph(std::move(nodes_), edges_, std::move(vocab));
  }

 private:
  std::optional<std::size_t> prior_match(const std::string& title) const {
    const auto norm = normalize_title(title);
    if (auto it = prior_titles_.find(norm); it != prior_titles_.end()) return it->second;
    std::optional<std::size_t> best;
    double best_d = 2.0;
    for (std::size_t i = 0; i < prior_->size(); ++i) {
      const double d = normalized_levenshtein(prior_->node(i).title, title);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best && best_d <= policy_.threshold) return best;
    return std::nullopt;
  }

  const MatchPolicy& policy_;
  const BuildOptions& options_;
  const TextAttributedGraph* prior_;
  BuildReport& report_;
  std::unordered_map<std::string, std::size_t> prior_titles_;
  std::unordered_map<std::string, std::optional<std::string>> alias_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::string> pending_labels_;
  std::vector<NodeRecord> nodes_;
  std::vector<IdEdge> edges_;
};

}  // namespace

TextAttributedGraph build_citation_graph(const std::vector<PaperStub>& seeds,
                                         ReferenceResolver& resolver, const MatchPolicy& policy,
                                         const BuildOptions& options,
                                         const TextAttributedGraph* prior_graph,
                                         BuildReport* report) {
  if (options.hops != 1 && options.hops != 2) throw ArgumentError("hops must be 1 or 2");
  if (!(policy.threshold > 0.0 && policy.threshold < 1.0)) {
    throw ArgumentError("match threshold must lie in (0, 1)");
  }
  BuildReport local;
  BuildReport& rep = report ? *report : local;
  GraphAssembler graph(policy, options, prior_graph, rep);

  std::vector<std::pair<PaperStub, std::string>> layer;  // (paper, node id)
  for (const auto& s : seeds) {
    bool added = false;
    if (auto id = graph.admit(s, true, &added); id && added) layer.emplace_back(s, *id);
  }

  for (int hop = 0; hop < options.hops; ++hop) {
    std::vector<PaperOutcome> outcomes(layer.size());
    const bool title_search = hop == 0;
    parallel_for(layer.size(), options.max_parallel, [&](std::size_t i) {
      outcomes[i] =
          resolve_references(layer[i].first, resolver, policy, options, title_search);
    });

    std::vector<std::pair<PaperStub, std::string>> next;
    for (std::size_t i = 0; i < layer.size(); ++i) {
      auto& o = outcomes[i];
      rep.searches_per_paper[layer[i].second] = o.searches;
      rep.id_matches += o.id_matches;
      rep.title_matches += o.title_matches;
      rep.unresolved += o.unresolved;
      rep.transport_failures += o.transport_failures;
      rep.budget_skipped += o.budget_skipped;
      for (auto& cited : o.cited) {
        bool added = false;
        auto id = graph.admit(cited, false, &added);
        if (!id) continue;
        graph.add_edge(layer[i].second, *id);
        if (added) next.emplace_back(std::move(cited), *id);
      }
    }
    layer = std::move(next);
  }

  // Outermost layer: citations among nodes already present, by id only.
  for (const auto& [paper, node] : layer) {
    std::unordered_set<std::string> linked;
    for (const auto& ref : paper.raw_references) {
      for (const auto& id : extract_arxiv_ids(ref)) {
        auto target = graph.known(id);
        if (target && linked.insert(*target).second) graph.add_edge(node, *target);
      }
    }
  }
  return graph.finish();
}

}  // namespace tagbench
