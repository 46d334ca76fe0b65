#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagbench/ego.hpp"

namespace tagbench {

enum class AnswerFormat { arxiv_subcategory, arxiv_identifier, option_list };

std::string_view to_string(AnswerFormat format);
AnswerFormat parse_answer_format(std::string_view text);

// Dataset-level instruction and label space. system_prompt may reference
// the label options through template tags:
//   {{#options}}{{name}}{{/options}}, {{options_csv}}, {{options_lower_csv}},
//   {{options_quoted_csv}}
// Prompts without tags are returned verbatim.
struct DatasetProfile {
  std::string name;
  std::string system_prompt;
  AnswerFormat answer_format = AnswerFormat::option_list;
  std::vector<std::string> label_vocab;
  // Optional human-readable names shown to the model instead of label_vocab
  // (same length and order).
  std::vector<std::string> display_names;
  HopCaps caps;

  const std::vector<std::string>& option_names() const {
    return display_names.empty() ? label_vocab : display_names;
  }

  // Adopts the dataset's vocabulary when the profile has none, otherwise
  // requires an exact match. Throws ConfigError.
  DatasetProfile bound_to(const std::vector<std::string>& dataset_vocab) const;
};

std::string render_system_prompt(const DatasetProfile& profile);

// Throws ConfigError when caps/vocab are inconsistent or an option_list
// prompt fails to list every option in vocabulary order.
void validate_profile(const DatasetProfile& profile);

DatasetProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const DatasetProfile& profile);

class ProfileRegistry {
 public:
  // ogbn-arxiv, arxiv-2023, cora, pubmed, ogbn-products and the arXiv
  // prompt-wording variants.
  static const ProfileRegistry& builtin();
  static ProfileRegistry from_json(const nlohmann::json& j);
  static ProfileRegistry from_file(const std::filesystem::path& path);

  void add(DatasetProfile profile);
  // Throws LookupError.
  const DatasetProfile& get(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, DatasetProfile, std::less<>> profiles_;
};

}  // namespace tagbench
