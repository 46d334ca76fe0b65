#include "tagbench/answer.hpp"

#include <limits>

#include "tagbench/text.hpp"

namespace tagbench {

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

ParsedLabel parse_arxiv(std::string_view raw, const DatasetProfile& profile) {
  const std::string lower = to_lower_ascii(raw);
  for (auto pos = lower.find("cs."); pos != std::string::npos; pos = lower.find("cs.", pos + 1)) {
    if (pos + 5 > lower.size() || !is_alpha(lower[pos + 3]) || !is_alpha(lower[pos + 4])) continue;
    const std::string code = lower.substr(pos, 5);
    for (std::size_t i = 0; i < profile.label_vocab.size(); ++i) {
      if (to_lower_ascii(profile.label_vocab[i]) == code) return {i, {}};
    }
    return {std::nullopt, "category '" + code + "' is not in the label vocabulary"};
  }
  return {std::nullopt, "no cs.XX category found"};
}

std::string_view last_nonempty_line(std::string_view raw) {
  std::string_view rest = raw;
  while (!rest.empty()) {
    auto nl = rest.rfind('\n');
    std::string_view line = nl == std::string_view::npos ? rest : rest.substr(nl + 1);
    if (!trim(line).empty()) return trim(line);
    if (nl == std::string_view::npos) break;
    rest = rest.substr(0, nl);
  }
  return {};
}

ParsedLabel parse_options(std::string_view raw, const DatasetProfile& profile) {
  const auto& options = profile.option_names();
  const std::string lower = to_lower_ascii(raw);
  std::size_t best_pos = std::numeric_limits<std::size_t>::max();
  std::size_t best_len = 0;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < options.size(); ++i) {
    const std::string name = to_lower_ascii(options[i]);
    if (name.empty()) continue;
    auto pos = lower.find(name);
    if (pos == std::string::npos) continue;
    // Earliest match wins; at equal positions the longer name is more specific.
    if (pos < best_pos || (pos == best_pos && name.size() > best_len)) {
      best_pos = pos;
      best_len = name.size();
      best = i;
    }
  }
  if (best) return {best, {}};

  const std::string_view line = last_nonempty_line(raw);
  if (line.empty()) return {std::nullopt, "empty response"};
  double best_distance = 2.0;
  for (std::size_t i = 0; i < options.size(); ++i) {
    double d = normalized_levenshtein(line, options[i]);
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  if (best && best_distance <= kFuzzyAnswerThreshold) return {best, {}};
  return {std::nullopt, "no option name found"};
}

}  // namespace

ParsedLabel parse_answer(std::string_view raw, const DatasetProfile& profile) noexcept {
  try {
    if (profile.answer_format == AnswerFormat::option_list) return parse_options(raw, profile);
    return parse_arxiv(raw, profile);
  } catch (...) {
    return {std::nullopt, "internal parse failure"};
  }
}

}  // namespace tagbench
