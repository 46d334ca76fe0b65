#include "tagbench/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tagbench/error.hpp"
#include "tagbench/io.hpp"
#include "tagbench/rng.hpp"

namespace tagbench {

namespace {

// floor(fraction * n) without 0.29 * 100 -> 28 style surprises.
std::size_t scaled_floor(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

}  // namespace

SplitAssignment split_by_ratio(const TextAttributedGraph& graph, SplitRatios ratios,
                               std::uint64_t seed) {
  for (double f : {ratios.train, ratios.validation, ratios.test}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ArgumentError("split fractions must lie in [0, 1]");
  }
  if (ratios.train + ratios.validation + ratios.test > 1.0 + 1e-12) {
    throw ArgumentError("split fractions sum to more than 1");
  }
  const std::size_t n = graph.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const std::size_t n_train = scaled_floor(ratios.train, n);
  const std::size_t n_val = scaled_floor(ratios.validation, n);
  const std::size_t n_test = scaled_floor(ratios.test, n);

  SplitAssignment out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Split s = Split::none;
    if (i < n_train) {
      s = Split::train;
    } else if (i < n_train + n_val) {
      s = Split::validation;
    } else if (i < n_train + n_val + n_test) {
      s = Split::test;
    }
    out.emplace(graph.node(order[i]).id, s);
  }
  return out;
}

SplitAssignment split_by_year(const TextAttributedGraph& graph, int train_before,
                              const std::set<int>& val_years, const std::set<int>& test_years) {
  for (int y : val_years) {
    if (test_years.count(y)) {
      throw ArgumentError("year " + std::to_string(y) + " is in both validation and test sets");
    }
    if (y < train_before) {
      throw ArgumentError("validation year " + std::to_string(y) + " overlaps the training range");
    }
  }
  for (int y : test_years) {
    if (y < train_before) {
      throw ArgumentError("test year " + std::to_string(y) + " overlaps the training range");
    }
  }
  SplitAssignment out;
  out.reserve(graph.size());
  for (const auto& n : graph.nodes()) {
    Split s = Split::none;
    if (n.year) {
      if (*n.year < train_before) {
        s = Split::train;
      } else if (val_years.count(*n.year)) {
        s = Split::validation;
      } else if (test_years.count(*n.year)) {
        s = Split::test;
      }
    }
    out.emplace(n.id, s);
  }
  return out;
}

std::vector<std::string> sample_test_nodes(const SplitAssignment& splits, std::size_t n,
                                           std::uint64_t seed) {
  std::vector<std::string> candidates;
  for (const auto& [id, split] : splits) {
    if (split == Split::test) candidates.push_back(id);
  }
  if (n > candidates.size()) {
    throw ArgumentError("requested " + std::to_string(n) + " test nodes but only " +
                        std::to_string(candidates.size()) + " exist");
  }
  std::sort(candidates.begin(), candidates.end());
  Rng rng(seed);
  std::vector<std::string> out;
  out.reserve(n);
  for (auto i : rng.sample_indices(candidates.size(), n)) out.push_back(candidates[i]);
  return out;
}

SplitCounts count_splits(const SplitAssignment& splits) {
  SplitCounts c;
  for (const auto& [id, split] : splits) {
    switch (split) {
      case Split::train:
        ++c.train;
        break;
      case Split::validation:
        ++c.validation;
        break;
      case Split::test:
        ++c.test;
        break;
      case Split::none:
        ++c.none;
        break;
    }
  }
  return c;
}

void write_splits(const SplitAssignment& splits, const std::filesystem::path& path) {
  std::map<std::string, Split> ordered(splits.begin(), splits.end());
  std::string out;
  for (const auto& [id, split] : ordered) {
    out += id;
    out += '\t';
    out += to_string(split);
    out += '\n';
  }
  write_file(path, out);
}

SplitAssignment read_splits(const std::filesystem::path& path) {
  SplitAssignment out;
  const std::string source = path.string();
  for_each_line(path, [&](std::string_view line, std::size_t number) {
    if (line.empty()) return;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError(source, number, "expected id<TAB>split");
    try {
      out[std::string(line.substr(0, tab))] = parse_split(line.substr(tab + 1));
    } catch (const ArgumentError& e) {
      throw ParseError(source, number, e.what());
    }
  });
  return out;
}

}  // namespace tagbench
