#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagbench/answer.hpp"
#include "tagbench/perturb.hpp"
#include "tagbench/prompt.hpp"

namespace tagbench {

// One classified target under one (style, perturbation, context) condition.
// correct implies parsed.label == truth.
struct PredictionRecord {
  std::string node_id;
  PromptStyle style;
  Perturbation perturbation;
  TextContext context = TextContext::rich;
  std::string raw_text;
  ParsedLabel parsed;
  std::optional<std::size_t> truth;
  bool correct = false;
  std::optional<double> homophily;
  std::size_t neighbor_count = 0;
  // Attention styles: the ranking reply failed to parse and the default
  // selection was used.
  bool ranking_fallback = false;

  // Identifies the condition for resume: node, style, perturbation, context.
  std::string task_key() const;
};

// Label names are written alongside indices for readability; only indices
// are read back. Throws SchemaError on malformed input.
nlohmann::json record_to_json(const PredictionRecord& record,
                              const std::vector<std::string>& vocab);
PredictionRecord record_from_json(const nlohmann::json& j);

// Throws ParseError with the offending line number.
std::vector<PredictionRecord> read_records(const std::filesystem::path& path);

}  // namespace tagbench
