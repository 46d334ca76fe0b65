#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tagbench/backend.hpp"
#include "tagbench/ego.hpp"

namespace tagbench {

// Modal label among neighbors (both hops) whose label a prompt may show,
// i.e. train or validation nodes; ties go to the lexicographically smallest
// label name, and egos without such neighbors get prior_label.
std::size_t oracle_majority_vote(const EgoGraph& ego, const std::vector<std::string>& vocab,
                                 std::size_t prior_label);

// label name -> keywords
using KeywordMap = std::map<std::string, std::vector<std::string>>;

// Label whose keywords occur most often (case-insensitive) in text; ties,
// including the all-zero case, go to the lexicographically smallest name.
std::size_t oracle_keyword(std::string_view text, const KeywordMap& keywords,
                           const std::vector<std::string>& vocab);

// Deterministic local predictors. Both answer ranking requests with the
// identity order over the ego's hop-1 neighbors.
class MajorityVoteOracle : public Predictor {
 public:
  MajorityVoteOracle(std::vector<std::string> vocab, std::size_t prior_label);
  RawResponse complete(const PredictorRequest& request) override;

 private:
  std::vector<std::string> vocab_;
  std::size_t prior_label_;
};

class KeywordOracle : public Predictor {
 public:
  // Throws ConfigError when a keyword label is not in vocab.
  KeywordOracle(std::vector<std::string> vocab, KeywordMap keywords);
  RawResponse complete(const PredictorRequest& request) override;

 private:
  std::vector<std::string> vocab_;
  KeywordMap keywords_;
};

}  // namespace tagbench
