#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "tagbench/profile.hpp"

namespace tagbench {

struct ParsedLabel {
  std::optional<std::size_t> label;  // index into the profile's label_vocab
  std::string reason;                // why parsing failed; empty on success

  bool ok() const { return label.has_value(); }
  friend bool operator==(const ParsedLabel&, const ParsedLabel&) = default;
};

// Cut-off on normalized edit distance for the option-list fallback.
inline constexpr double kFuzzyAnswerThreshold = 0.2;

// Total: never throws. arXiv formats take the first "cs.XX" match; option
// lists take the earliest-occurring option name, falling back to the closest
// option to the response's last non-empty line.
ParsedLabel parse_answer(std::string_view raw, const DatasetProfile& profile) noexcept;

}  // namespace tagbench
