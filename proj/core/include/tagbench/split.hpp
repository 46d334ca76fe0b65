#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "tagbench/graph.hpp"

namespace tagbench {

struct SplitRatios {
  double train = 0.0;
  double validation = 0.0;
  double test = 0.0;
};

// Shuffles nodes with `seed`, then assigns floor(fraction * |V|) nodes to each
// split in train/validation/test order. The remainder stays Split::none.
SplitAssignment split_by_ratio(const TextAttributedGraph& graph, SplitRatios ratios,
                               std::uint64_t seed);

// year < train_before -> train, year in val_years -> validation,
// year in test_years -> test, otherwise (or no year) none.
SplitAssignment split_by_year(const TextAttributedGraph& graph, int train_before,
                              const std::set<int>& val_years, const std::set<int>& test_years);

// n distinct test-split ids in draw order. Candidates are taken in ascending
// id order before sampling so the result does not depend on hash-map layout.
std::vector<std::string> sample_test_nodes(const SplitAssignment& splits, std::size_t n,
                                           std::uint64_t seed);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
  std::size_t none = 0;
};
SplitCounts count_splits(const SplitAssignment& splits);

// "id<TAB>split" per line, ascending by id.
void write_splits(const SplitAssignment& splits, const std::filesystem::path& path);
SplitAssignment read_splits(const std::filesystem::path& path);

}  // namespace tagbench
