#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tagbench {

// Decodes UTF-8 leniently: each invalid byte becomes its own code unit.
std::vector<char32_t> decode_utf8(std::string_view text);

// ASCII-only lowercase; other bytes pass through untouched.
std::string to_lower_ascii(std::string_view text);

// Lowercases and collapses runs of whitespace to one space, trimming the ends.
std::string normalize_title(std::string_view text);

std::string_view trim(std::string_view text);

// Plain edit distance over code points (unit insert/delete/substitute).
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// levenshtein / max(|a|, |b|) after normalize_title, in [0, 1]; 0 when both
// strings normalize to empty.
double normalized_levenshtein(std::string_view a, std::string_view b);

// Count of non-overlapping, case-insensitive (ASCII) occurrences of needle.
std::size_t count_occurrences_ci(std::string_view haystack, std::string_view needle);

}  // namespace tagbench
