#include "tagbench/oracle.hpp"

#include <algorithm>

#include "tagbench/error.hpp"
#include "tagbench/text.hpp"

namespace tagbench {

namespace {

// Index of the best score; equal scores resolve to the smaller label name.
std::size_t argmax_by_name(const std::vector<std::size_t>& scores,
                           const std::vector<std::string>& vocab) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best] || (scores[i] == scores[best] && vocab[i] < vocab[best])) {
      best = i;
    }
  }
  return best;
}

std::string identity_ranking(const PredictorRequest& request) {
  std::string out = "[";
  const std::size_t n = request.ego ? request.ego->hop1.size() : 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ", ";
    out += std::to_string(i + 1);
  }
  return out + "]";
}

}  // namespace

std::size_t oracle_majority_vote(const EgoGraph& ego, const std::vector<std::string>& vocab,
                                 std::size_t prior_label) {
  std::vector<std::size_t> counts(vocab.size(), 0);
  std::size_t labeled = 0;
  for (const auto* hop : {&ego.hop1, &ego.hop2}) {
    for (const auto& n : *hop) {
      if (!n.label || *n.label >= vocab.size()) continue;
      if (n.split != Split::train && n.split != Split::validation) continue;
      ++counts[*n.label];
      ++labeled;
    }
  }
  if (labeled == 0) return prior_label;
  return argmax_by_name(counts, vocab);
}

std::size_t oracle_keyword(std::string_view text, const KeywordMap& keywords,
                           const std::vector<std::string>& vocab) {
  if (vocab.empty()) throw ArgumentError("empty label vocabulary");
  std::vector<std::size_t> scores(vocab.size(), 0);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    auto it = keywords.find(vocab[i]);
    if (it == keywords.end()) continue;
    for (const auto& word : it->second) scores[i] += count_occurrences_ci(text, word);
  }
  return argmax_by_name(scores, vocab);
}

MajorityVoteOracle::MajorityVoteOracle(std::vector<std::string> vocab, std::size_t prior_label)
    : vocab_(std::move(vocab)), prior_label_(prior_label) {
  if (prior_label_ >= vocab_.size()) throw ConfigError("prior label outside the vocabulary");
}

RawResponse MajorityVoteOracle::complete(const PredictorRequest& request) {
  if (request.purpose == RequestPurpose::rank) {
    return {identity_ranking(request), ResponseOrigin::oracle, std::nullopt};
  }
  if (!request.ego) throw ArgumentError("majority-vote oracle needs the ego graph");
  return {vocab_[oracle_majority_vote(*request.ego, vocab_, prior_label_)], ResponseOrigin::oracle,
          std::nullopt};
}

KeywordOracle::KeywordOracle(std::vector<std::string> vocab, KeywordMap keywords)
    : vocab_(std::move(vocab)), keywords_(std::move(keywords)) {
  for (const auto& [label, _] : keywords_) {
    if (std::find(vocab_.begin(), vocab_.end(), label) == vocab_.end()) {
      throw ConfigError("keyword map label '" + label + "' is not in the vocabulary");
    }
  }
}

RawResponse KeywordOracle::complete(const PredictorRequest& request) {
  if (request.purpose == RequestPurpose::rank) {
    return {identity_ranking(request), ResponseOrigin::oracle, std::nullopt};
  }
  const std::string_view text =
      request.user_texts.empty() ? std::string_view() : std::string_view(request.user_texts.back());
  return {vocab_[oracle_keyword(text, keywords_, vocab_)], ResponseOrigin::oracle, std::nullopt};
}

}  // namespace tagbench
