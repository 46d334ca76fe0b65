#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagbench/backend.hpp"
#include "tagbench/ego.hpp"
#include "tagbench/graph.hpp"
#include "tagbench/profile.hpp"
#include "tagbench/text_template.hpp"

namespace tagbench {

enum class StyleKind {
  zero_shot,
  zero_shot_cot,
  few_shot,
  khop_title,
  khop_title_label,
  khop_attention,
  linearized_khop_title,
  linearized_khop_title_label,
  linearized_khop_attention,
};

std::string_view to_string(StyleKind kind);
StyleKind parse_style_kind(std::string_view text);

struct PromptStyle {
  StyleKind kind = StyleKind::zero_shot;
  int hops = 1;         // khop kinds only
  int attention_k = 5;  // attention kinds only

  bool uses_neighbors() const;
  bool is_attention() const;
  bool is_linearized() const;
  bool shows_labels() const;

  // Throws ArgumentError (hops outside {1, 2}, attention with hops != 1, k < 1).
  void validate() const;

  // Stable identifier: "zero_shot", "khop_title@2", "khop_attention@k5".
  std::string key() const;
  static PromptStyle parse(std::string_view key);

  friend bool operator==(const PromptStyle&, const PromptStyle&) = default;
};

enum class TextContext { rich, scarce };
std::string_view to_string(TextContext context);
TextContext parse_context(std::string_view text);

// How neighbor entries are shown in the 1-hop label ablation.
enum class NeighborRender { title_and_label, title_only, label_only };
std::string_view to_string(NeighborRender render);
NeighborRender parse_neighbor_render(std::string_view text);

struct FewShotExemplar {
  std::string node_id;
  std::string title;
  std::optional<std::string> abstract;
  std::string label;
};

struct PromptBundle {
  std::string system_text;
  std::vector<std::string> stages;  // 2 for attention styles, else 1
  PromptStyle style;
  TextContext context = TextContext::rich;
  std::string target_id;
  std::vector<std::vector<std::string>> included_neighbor_ids;  // per hop
  std::optional<double> homophily;  // over included neighbors, when defined
  bool suppress_reasoning = true;
};

// The literal instruction appended to every answer-producing stage except
// zero-shot chain-of-thought, followed by the answer slot.
inline constexpr std::string_view kSuppressReasoningSuffix =
    "Do not give any reasoning or logic for your answer. \nAnswer: \n\n";

// Named prompt templates. builtin() is compiled from core/templates.
class TemplateSet {
 public:
  static const TemplateSet& builtin();
  // Loads every *.txt in dir; names are file stems. Missing names fall back
  // to the built-in set.
  static TemplateSet from_directory(const std::filesystem::path& dir);

  // Throws LookupError.
  const TextTemplate& get(std::string_view name) const;

 private:
  std::map<std::string, TextTemplate, std::less<>> templates_;
};

struct RenderOptions {
  // Overrides the neighbor entries of 1-hop graph-structured styles.
  std::optional<NeighborRender> neighbor_render;
  const TemplateSet* templates = nullptr;  // null -> builtin
};

// Throws ArgumentError when rich context lacks a body, few_shot lacks
// exemplars, or a label index falls outside the profile vocabulary. Attention
// bundles carry stage 2 rendered with the default selection (first k hop-1
// neighbors); re-render it with render_attention_stage2 once a ranking exists.
PromptBundle render_prompt(const EgoGraph& ego, const PromptStyle& style,
                           const DatasetProfile& profile, TextContext context,
                           std::span<const FewShotExemplar> exemplars = {},
                           const RenderOptions& options = {});

std::string render_attention_stage1(const EgoGraph& ego, int attention_k,
                                    const RenderOptions& options = {});

// Neighbors appear in the given order. Throws ArgumentError for indices
// outside ego.hop1.
std::string render_attention_stage2(const EgoGraph& ego,
                                    std::span<const std::size_t> selected_hop1_indices,
                                    const DatasetProfile& profile, TextContext context,
                                    bool linearized = false, const RenderOptions& options = {});

// Parses the first bracketed integer list, converting 1-based to 0-based,
// dropping out-of-range and repeated entries and truncating to k.
// Throws UnparsableRankingError when no bracketed list exists.
std::vector<std::size_t> parse_ranked_list(std::string_view raw, std::size_t n_neighbors,
                                           std::size_t k);

// First min(k, n) neighbors, the fallback for unparsable rankings.
std::vector<std::size_t> default_attention_selection(std::size_t n_neighbors, std::size_t k);

struct FewShotOptions {
  std::size_t n = 2;
  std::size_t probe_budget = 50;
  TextContext context = TextContext::rich;
  std::uint64_t seed = 0;
  DecodingParams decoding;
  std::string model_tag;
};

// Probes training nodes in seeded order with a zero-shot prompt and keeps
// the first n the backend classifies correctly.
// Throws ExemplarShortageError when the budget runs out first.
std::vector<FewShotExemplar> build_few_shot_exemplars(const TextAttributedGraph& graph,
                                                      const DatasetProfile& profile,
                                                      Predictor& backend,
                                                      const FewShotOptions& options);

}  // namespace tagbench
